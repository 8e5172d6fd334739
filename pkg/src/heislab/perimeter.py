"""Horizontal and vertical perimeters of finite lattice sets.

A finite set Omega splits into columns: fibers over the horizontal
coordinates (x, y), each a finite set of w-values.  The horizontal
boundary counts ordered pairs (g, g') with g in Omega, g' outside, and
g^-1 g' a standard generator.  The vertical boundary at jump t counts
ordered pairs whose quotient is c^t or c^-t; it is computable column by
column, since central multiplication only shifts w.  The vertical
perimeter aggregates the jump spectrum in an l2 sense:

    vperim(Omega)^2 = sum_{t >= 1} |bd_v^t Omega|^2 / t^2.

Beyond the largest column span T0 every member exits in both vertical
directions, so |bd_v^t| = 2|Omega| and the series has the closed-form
tail 4|Omega|^2 (pi^2/6 - sum_{t <= T0} t^-2).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from math import fsum

import numpy as np

from .errors import ValidationError
from .group import DiscreteElement
from .rng import Rng

_EPS = 2.0 ** -52


def coord_tuple(el: DiscreteElement) -> tuple:
    return el.coords()


def neighbor_tuples(k: int, t: tuple):
    """Right-multiplied neighbors of a flat coordinate tuple, in the
    canonical generator order (a_1, b_1, ..., then inverses)."""
    w = t[2 * k]
    for sign in (1, -1):
        for i in range(k):
            yield t[:i] + (t[i] + sign,) + t[i + 1 :]
            yield (
                t[: k + i]
                + (t[k + i] + sign,)
                + t[k + i + 1 : 2 * k]
                + (w + sign * t[i],)
            )


class FiniteSet:
    """Finite subset of the rank-k lattice, stored as coordinate tuples."""

    def __init__(self, k: int, members):
        self.k = k
        mem = set()
        for m in members:
            if isinstance(m, DiscreteElement):
                if m.k != k:
                    raise ValidationError("element rank mismatch")
                mem.add(m.coords())
            else:
                t = tuple(int(v) for v in m)
                if len(t) != 2 * k + 1:
                    raise ValidationError("coordinate tuple length mismatch")
                mem.add(t)
        if not mem:
            raise ValidationError("finite set must be nonempty")
        self.members = frozenset(mem)
        self._columns = None

    @property
    def size(self) -> int:
        return len(self.members)

    def __contains__(self, t) -> bool:
        if isinstance(t, DiscreteElement):
            t = t.coords()
        return t in self.members

    def sorted_members(self):
        return sorted(self.members)

    def columns(self) -> dict:
        """Map (x, y) -> sorted numpy array of member w-values."""
        if self._columns is None:
            cols: dict = {}
            for t in self.members:
                cols.setdefault(t[: 2 * self.k], []).append(t[2 * self.k])
            self._columns = {
                xy: np.array(sorted(ws), dtype=np.int64) for xy, ws in cols.items()
            }
        return self._columns

    def column_span(self) -> int:
        return max(int(ws[-1] - ws[0]) for ws in self.columns().values())

    def bbox(self):
        rows = np.array(self.sorted_members(), dtype=np.int64)
        return rows.min(axis=0), rows.max(axis=0)

    def embedded(self, k_new: int) -> "FiniteSet":
        """The same set inside a higher-rank lattice (new coordinates 0)."""
        if k_new < self.k:
            raise ValidationError("can only embed into larger rank")
        pad = (0,) * (k_new - self.k)
        return FiniteSet(
            k_new,
            [
                t[: self.k] + pad + t[self.k : 2 * self.k] + pad + (t[2 * self.k],)
                for t in self.members
            ],
        )

    def to_lines(self):
        for t in self.sorted_members():
            el = DiscreteElement(
                self.k, t[: self.k], t[self.k : 2 * self.k], t[2 * self.k]
            )
            yield el.to_text()

    @staticmethod
    def from_lines(lines) -> "FiniteSet":
        els = [DiscreteElement.from_text(ln) for ln in lines if ln.strip()]
        if not els:
            raise ValidationError("no elements in input")
        return FiniteSet(els[0].k, els)


def horizontal_perimeter(S: FiniteSet) -> int:
    """|bd_h S|: ordered pairs leaving S along one generator step."""
    count = 0
    members = S.members
    for t in members:
        for nb in neighbor_tuples(S.k, t):
            if nb not in members:
                count += 1
    return count


def vertical_t_count(S: FiniteSet, t: int) -> int:
    """|bd_v^t S| by the column-gap formula 2(|S| - #{w in S : w + t in S})."""
    if t < 1:
        raise ValidationError("vertical jump must be >= 1")
    matches = 0
    for ws in S.columns().values():
        matches += int(np.intersect1d(ws + t, ws, assume_unique=True).size)
    return 2 * (S.size - matches)


def vertical_t_count_direct(S: FiniteSet, t: int) -> int:
    """|bd_v^t S| counted pair by pair over memberships (independent route)."""
    count = 0
    for tup in S.members:
        up = tup[: 2 * S.k] + (tup[2 * S.k] + t,)
        dn = tup[: 2 * S.k] + (tup[2 * S.k] - t,)
        if up not in S.members:
            count += 1
        if dn not in S.members:
            count += 1
    return count


_BITSET_SPAN_CAP = 1 << 16


@dataclass
class VerticalSpectrum:
    """Exact jump counts for t <= T0 plus the closed-form beyond-span tail.

    tail_sq is the contribution sum_{t > T0} (2 size)^2 / t^2 to the
    squared vertical perimeter; tail_err bounds its numerical error.
    """

    size: int
    T0: int
    head: np.ndarray  # head[t - 1] = |bd_v^t|, t = 1..T0
    tail_sq: float
    tail_err: float

    def count(self, t: int) -> int:
        if t <= self.T0:
            return int(self.head[t - 1])
        return 2 * self.size


def _column_counts(ws: np.ndarray, T0: int) -> np.ndarray:
    """Per-column |{w in S: w+t not in S}| + |{w: w-t not in S}| for t=1..span."""
    span = int(ws[-1] - ws[0])
    cnt = len(ws)
    out = np.empty(span, dtype=np.int64)
    if span <= _BITSET_SPAN_CAP:
        bits = 0
        base = int(ws[0])
        for w in ws.tolist():
            bits |= 1 << (w - base)
        for t in range(1, span + 1):
            out[t - 1] = 2 * (cnt - (bits & (bits >> t)).bit_count())
    else:
        for t in range(1, span + 1):
            m = np.intersect1d(ws + t, ws, assume_unique=True).size
            out[t - 1] = 2 * (cnt - m)
    return out


def vertical_spectrum(S: FiniteSet) -> VerticalSpectrum:
    cols = S.columns()
    T0 = S.column_span()
    head = np.zeros(T0, dtype=np.int64)
    plateau = np.zeros(T0 + 1, dtype=np.int64)  # suffix-add via diff array
    for ws in cols.values():
        span = int(ws[-1] - ws[0])
        if span > 0:
            head[:span] += _column_counts(ws, T0)
        if span < T0:
            plateau[span] += 2 * len(ws)
    if T0 > 0:
        head += np.cumsum(plateau)[:T0]
    tail_sq, tail_err = _tail_sq(S.size, T0)
    return VerticalSpectrum(S.size, T0, head, tail_sq, tail_err)


def _psi1_exact(m: int) -> float:
    """sum_{j >= m} j^-2, by compensated subtraction from pi^2/6."""
    if m <= 1:
        return math.pi * math.pi / 6.0
    return math.pi * math.pi / 6.0 - fsum(1.0 / (j * j) for j in range(1, m))


def _psi1_asymptotic(m: int) -> float:
    """Euler-Maclaurin form of the same tail, for large m: with N = m - 1,
    sum_{j > N} j^-2 = 1/N - 1/(2 N^2) + 1/(6 N^3) - 1/(30 N^5) + ..."""
    n = float(m - 1)
    return 1.0 / n - 1.0 / (2.0 * n * n) + 1.0 / (6.0 * n**3) - 1.0 / (30.0 * n**5)


def _tail_sq(size: int, T0: int):
    psi = _psi1_exact(T0 + 1)
    err = _EPS * (T0 + 2) * 2.0
    if T0 > 1000:
        err += abs(psi - _psi1_asymptotic(T0 + 1))
    scale = 4.0 * float(size) * float(size)
    return scale * psi, scale * err


def vertical_perimeter(S: FiniteSet):
    """(value, error_bound) for the l2 vertical perimeter of S."""
    spec = vertical_spectrum(S)
    head_sq = fsum(
        (float(c) / t) ** 2 for t, c in enumerate(spec.head.tolist(), start=1)
    )
    total = head_sq + spec.tail_sq
    value = math.sqrt(total)
    err_sq = spec.tail_err + 4.0 * _EPS * total
    err = err_sq / (2.0 * value) if value > 0 else 0.0
    return value, err


def isoperimetric_ratio(S: FiniteSet):
    """(vperim / hperim, error_bound)."""
    h = horizontal_perimeter(S)
    if h == 0:
        raise ValidationError("horizontal perimeter is zero")
    v, verr = vertical_perimeter(S)
    return v / h, verr / h


# --- set generators ----------------------------------------------------


def box_set(k: int, a: int, b: int, h: int) -> FiniteSet:
    """x_i in [0, a), y_i in [0, b), w in [0, h); a^k b^k h elements."""
    if min(a, b, h) < 1:
        raise ValidationError("box dimensions must be positive")
    import itertools

    members = [
        xs + ys + (w,)
        for xs in itertools.product(range(a), repeat=k)
        for ys in itertools.product(range(b), repeat=k)
        for w in range(h)
    ]
    return FiniteSet(k, members)


def ball_set(k: int, r: int, mem_cap_mib: float = 4096.0) -> FiniteSet:
    from .cayley import ball

    b = ball(k, r, mem_cap_mib)
    return FiniteSet(k, [tuple(int(v) for v in row) for row in b.coords])


def column_set(k: int, height: int) -> FiniteSet:
    if height < 1:
        raise ValidationError("column height must be positive")
    zero = (0,) * (2 * k)
    return FiniteSet(k, [zero + (w,) for w in range(height)])


def random_blob(k: int, size: int, seed: int) -> FiniteSet:
    """Connected random cluster grown from the identity.

    Frontier candidates are visited in FIFO order; each draw accepts the
    candidate with probability 0.7 (uniform from the seeded stream) and
    otherwise requeues it, so the member set is a pure function of
    (k, size, seed).
    """
    if size < 1:
        raise ValidationError("blob size must be positive")
    rng = Rng(seed)
    from collections import deque

    start = (0,) * (2 * k + 1)
    members = {start}
    frontier = deque(neighbor_tuples(k, start))
    while len(members) < size:
        cand = frontier.popleft()
        if cand in members:
            continue
        if rng.uniform() < 0.7:
            members.add(cand)
            for nb in neighbor_tuples(k, cand):
                if nb not in members:
                    frontier.append(nb)
        else:
            frontier.append(cand)
    return FiniteSet(k, members)


_SPEC_RE = re.compile(r"^\s*(box|ball|column|random_blob|singleton)\s*(?:\(([^)]*)\))?\s*$")


def parse_set_spec(k: int, text: str, seed: int | None = None) -> FiniteSet:
    """Build a set from a compact spec string.

    Forms: box(a,b,h), ball(r), column(h), random_blob(size) or
    random_blob(size,seed), singleton.  random_blob without an explicit
    seed requires one passed in.
    """
    m = _SPEC_RE.match(text)
    if not m:
        raise ValidationError(f"unrecognized set spec: {text!r}")
    kind, argtext = m.group(1), m.group(2)
    args = [int(v) for v in argtext.split(",")] if argtext else []
    if kind == "singleton":
        return column_set(k, 1)
    if kind == "box":
        if len(args) != 3:
            raise ValidationError("box takes (a,b,h)")
        return box_set(k, *args)
    if kind == "ball":
        if len(args) != 1:
            raise ValidationError("ball takes (r)")
        return ball_set(k, args[0])
    if kind == "column":
        if len(args) != 1:
            raise ValidationError("column takes (h)")
        return column_set(k, args[0])
    if len(args) == 2:
        return random_blob(k, args[0], args[1])
    if len(args) == 1:
        if seed is None:
            raise ValidationError("random_blob needs a seed")
        return random_blob(k, args[0], seed)
    raise ValidationError("random_blob takes (size) or (size,seed)")


def default_corpus(k: int = 2, seed: int = 20260816):
    """The standard 200-set study corpus: boxes, balls, columns, blobs.

    Returns a list of (set_id, spec_text, FiniteSet).  Blob seeds derive
    from the corpus seed, so the corpus is a pure function of (k, seed).
    """
    out = []
    idx = 0

    def add(spec, S):
        nonlocal idx
        out.append((idx, spec, S))
        idx += 1

    for a in (1, 2, 3):
        for b in (1, 2, 3):
            for h in (1, 2, 3, 5):
                add(f"box({a},{b},{h})", box_set(k, a, b, h))
    for r in range(4):
        add(f"ball({r})", ball_set(k, r))
    for h in (1, 2, 3, 4, 5, 8, 10, 16, 25, 32, 50, 64, 100, 128, 200, 256, 400, 512, 750, 1000):
        add(f"column({h})", column_set(k, h))
    rng = Rng(seed)
    sizes = (20, 50, 100, 200, 400, 800)
    for j in range(140):
        blob_seed = rng.substream(j).seed
        size = sizes[j % len(sizes)]
        add(f"random_blob({size},{blob_seed})", random_blob(k, size, blob_seed))
    return out
