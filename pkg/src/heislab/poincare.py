"""Functional (Poincare-type) sides, coarea decomposition, localization.

For a finitely supported map phi on the rank-k lattice (scalar- or
vector-valued; vector differences are measured in l1) the two sides are

    lhs(phi)^2 = sum_{t >= 1} ( sum_h |phi(h c^t) - phi(h)| )^2 / t^2
    rhs(phi)   = sum_h sum_{generators s} |phi(h s) - phi(h)|.

Beyond the w-span T0 of the support, the inner vertical sum is the
constant 2 sum_h |phi(h)|, so the series closes with the same analytic
tail used for the vertical perimeter.  For an indicator, lhs equals the
vertical perimeter of the set and rhs twice its horizontal boundary.

The coarea path decomposes an integer-valued phi over its sublevel sets
{phi < u}: the rhs decomposition is an exact integer identity, the lhs
obeys the triangle inequality.  Both sublevel families are evaluated on
whichever side (set or complement) is finite; boundary counts agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import fsum

import numpy as np

from .errors import ValidationError
from .perimeter import (
    FiniteSet,
    _psi1_exact,
    _EPS,
    horizontal_perimeter,
    neighbor_tuples,
    vertical_perimeter,
)
from .rng import Rng


def _l1(v) -> float:
    if isinstance(v, np.ndarray):
        return float(np.abs(v).sum())
    return abs(v)


class LatticeFunction:
    """Finitely supported function on the lattice, zero off-support."""

    def __init__(self, k: int, values: dict, vdim: int | None = None):
        self.k = k
        self.vdim = vdim
        vals = {}
        for key, v in values.items():
            t = key.coords() if hasattr(key, "coords") else tuple(int(a) for a in key)
            if len(t) != 2 * k + 1:
                raise ValidationError("coordinate tuple length mismatch")
            if vdim is not None:
                v = np.asarray(v, dtype=float)
                if v.shape != (vdim,):
                    raise ValidationError("vector value dimension mismatch")
                if not np.any(v):
                    continue
            elif v == 0:
                continue
            vals[t] = v
        if not vals:
            raise ValidationError("function has empty support")
        self.values = vals

    @property
    def zero(self):
        return np.zeros(self.vdim) if self.vdim is not None else 0

    def value(self, t: tuple):
        return self.values.get(t, self.zero)

    def support(self):
        return self.values.keys()

    def is_integer_valued(self) -> bool:
        if self.vdim is not None:
            return False
        return all(float(v).is_integer() for v in self.values.values())

    @staticmethod
    def indicator(S: FiniteSet) -> "LatticeFunction":
        return LatticeFunction(S.k, {t: 1 for t in S.members})

    @staticmethod
    def stacked(*funcs: "LatticeFunction") -> "LatticeFunction":
        """Vector-valued function whose coordinates are the given scalars."""
        k = funcs[0].k
        if any(f.k != k or f.vdim is not None for f in funcs):
            raise ValidationError("stacked expects scalar functions of equal rank")
        keys = set()
        for f in funcs:
            keys |= set(f.support())
        vals = {t: np.array([float(f.value(t)) for f in funcs]) for t in keys}
        return LatticeFunction(k, vals, vdim=len(funcs))

    @staticmethod
    def random_integer(S: FiniteSet, lo: int, hi: int, seed: int) -> "LatticeFunction":
        """Integer values uniform on [lo, hi], drawn per member in sorted order."""
        if hi < lo:
            raise ValidationError("empty value range")
        if lo == hi == 0:
            raise ValidationError("value range admits only the zero function")
        rng = Rng(seed)
        members = S.sorted_members()
        draws = rng.integers(len(members), hi - lo + 1) + lo
        vals = {t: int(d) for t, d in zip(members, draws) if d != 0}
        if not vals:
            # all-zero draw degenerates; pin one member so the support is nonempty
            vals = {members[0]: hi if hi != 0 else lo}
        return LatticeFunction(S.k, vals)


@dataclass
class PoincareSides:
    lhs: float
    rhs: float
    lhs_err: float


def _support_columns(phi: LatticeFunction) -> dict:
    cols: dict = {}
    k = phi.k
    for t, v in phi.values.items():
        cols.setdefault(t[: 2 * k], {})[t[2 * k]] = v
    return cols


def _vertical_sums(phi: LatticeFunction):
    """A(t) for t = 1..T0 plus the beyond-span constant M = 2 sum |phi|."""
    cols = _support_columns(phi)
    T0 = max(max(ws) - min(ws) for ws in cols.values())
    A = [0.0] * (T0 + 1)  # index by t, A[0] unused
    for ws in cols.values():
        keys = set(ws)
        lo, hi = min(keys), max(keys)
        for t in range(1, min(T0, hi - lo) + 1):
            s = 0.0
            for w in keys:
                s += _l1(ws.get(w + t, phi.zero) - ws[w])
                if w - t not in keys:
                    s += _l1(ws[w])
            A[t] += s
        col_mass = 2.0 * fsum(_l1(v) for v in ws.values())
        for t in range(hi - lo + 1, T0 + 1):
            A[t] += col_mass
    M = 2.0 * fsum(_l1(v) for v in phi.values.values())
    return A, M, T0


def poincare_sides(phi: LatticeFunction) -> PoincareSides:
    A, M, T0 = _vertical_sums(phi)
    head_sq = fsum((A[t] / t) ** 2 for t in range(1, T0 + 1))
    psi = _psi1_exact(T0 + 1)
    total = head_sq + M * M * psi
    lhs = math.sqrt(total)
    err = (M * M * _EPS * (T0 + 2) * 2.0 + 4.0 * _EPS * total) / (2.0 * lhs) if lhs else 0.0
    return PoincareSides(lhs, poincare_rhs(phi), err)


def poincare_rhs(phi: LatticeFunction, indices=None) -> float:
    """sum_h sum_s |phi(h s) - phi(h)|, optionally over the generator
    subfamily {a_i, b_i : i in indices} (1-based)."""
    k = phi.k
    window = set(phi.support())
    for t in list(window):
        window.update(neighbor_tuples(k, t))
    keep = None if indices is None else {int(i) - 1 for i in indices}
    total = 0.0
    for h in window:
        vh = phi.value(h)
        for j, nb in enumerate(neighbor_tuples(k, h)):
            if keep is not None and (j % (2 * k)) // 2 not in keep:
                continue
            total += _l1(phi.value(nb) - vh)
    return total


@dataclass
class CoareaLevel:
    u: int
    rhs: int
    lhs: float


@dataclass
class CoareaReport:
    rhs_total: int
    rhs_levels: int
    lhs_total: float
    lhs_levels: float
    levels: list

    @property
    def rhs_exact(self) -> bool:
        return self.rhs_total == self.rhs_levels


def _level_members(vals: dict, u: int) -> list:
    # finite representative of {phi < u}: against the zero background the
    # set is co-finite for u > 0, so the complement {phi >= u} stands in
    if u <= 0:
        return [t for t, v in vals.items() if v < u]
    return [t for t, v in vals.items() if v >= u]


def sublevel_set(phi: LatticeFunction, u: int) -> FiniteSet:
    """Finite representative of the sublevel set {phi < u}.

    For u <= 0 this is literally {phi < u}; for u > 0 that set is
    co-finite, so the finite complement {phi >= u} is returned instead.
    Both have the same boundary pairs, which is what level
    decompositions consume.
    """
    if not phi.is_integer_valued():
        raise ValidationError("sublevel sets require integer-valued phi")
    vals = {t: int(v) for t, v in phi.values.items()}
    members = _level_members(vals, u)
    if not members:
        raise ValidationError("level set is empty")
    return FiniteSet(phi.k, members)


def coarea(phi: LatticeFunction) -> CoareaReport:
    """Sublevel decomposition of both sides for integer-valued phi."""
    if not phi.is_integer_valued():
        raise ValidationError("coarea identity requires integer-valued phi")
    vals = {t: int(v) for t, v in phi.values.items()}
    lo = min(0, min(vals.values()))
    hi = max(0, max(vals.values()))
    levels = []
    rhs_sum = 0
    lhs_sum = 0.0
    for u in range(lo + 1, hi + 1):
        finite = _level_members(vals, u)
        if not finite:
            continue
        F = FiniteSet(phi.k, finite)
        rhs_u = 2 * horizontal_perimeter(F)
        lhs_u, _ = vertical_perimeter(F)
        levels.append(CoareaLevel(u, rhs_u, lhs_u))
        rhs_sum += rhs_u
        lhs_sum += lhs_u
    sides = poincare_sides(phi)
    rhs_total = round(sides.rhs)
    return CoareaReport(rhs_total, rhs_sum, sides.lhs, lhs_sum, levels)


@dataclass
class LocalSides:
    lhs: float
    rhs: float
    n: int
    alpha: float


def local_poincare(
    phi: LatticeFunction, n: int, alpha: float = 21.0, mem_cap_mib: float = 4096.0
) -> LocalSides:
    """Both sides localized: lhs over h in B_n with jumps t <= n^2, rhs
    over h in the inflated ball B_ceil(alpha n).

    Ball membership for the rhs window is certified by word-length
    bounds where possible and by exact bidirectional distance otherwise.
    """
    from .cayley import ball, word_distance, word_upper_bound
    from .group import DiscreteElement

    if n < 1:
        raise ValidationError("localization radius must be >= 1")
    k = phi.k
    Bn = ball(k, n, mem_cap_mib)
    A = [0.0] * (n * n + 1)
    for row in Bn.coords:
        h = tuple(int(v) for v in row)
        vh = phi.value(h)
        for t in range(1, n * n + 1):
            up = h[: 2 * k] + (h[2 * k] + t,)
            A[t] += _l1(phi.value(up) - vh)
    lhs = math.sqrt(fsum((A[t] / t) ** 2 for t in range(1, n * n + 1)))

    R = math.ceil(alpha * n)
    window = set(phi.support())
    for t in list(window):
        window.update(neighbor_tuples(k, t))
    rhs = 0.0
    for h in window:
        el = DiscreteElement(k, h[:k], h[k : 2 * k], h[2 * k])
        horiz = sum(abs(v) for v in h[: 2 * k])
        if horiz > R:
            continue
        if word_upper_bound(el) > R and word_distance(el, R, mem_cap_mib) is None:
            continue
        vh = phi.value(h)
        for nb in neighbor_tuples(k, h):
            rhs += _l1(phi.value(nb) - vh)
    return LocalSides(lhs, rhs, n, alpha)


def coset_partition(A, S: FiniteSet) -> dict:
    """Partition S by cosets of the subgroup generated by the generator
    pairs {a_i, b_i : i in A} (1-based indices).

    Two elements share a piece iff their coordinates agree outside A;
    the central direction always lies in the subgroup, so w never enters
    the invariant.  Keys are ((x_j)_{j not in A}, (y_j)_{j not in A}).
    """
    k = S.k
    idx = sorted({int(i) for i in A})
    if not idx or idx[0] < 1 or idx[-1] > k:
        raise ValidationError("A must be a nonempty subset of 1..k")
    outside = [j for j in range(k) if (j + 1) not in idx]
    pieces: dict = {}
    for t in S.members:
        key = (
            tuple(t[j] for j in outside),
            tuple(t[k + j] for j in outside),
        )
        pieces.setdefault(key, []).append(t)
    return {key: FiniteSet(k, mem) for key, mem in pieces.items()}
