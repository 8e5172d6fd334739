"""Finite metric spaces and exact least-distortion L1 embeddings.

A ``MetricSpace`` wraps a validated distance matrix.  ``c1_distortion``
computes the exact minimum L1 distortion by linear programming over the
cut cone: every L1 embedding of an n-point space is a nonnegative
combination of cut semimetrics, so minimizing the expansion bound t
subject to non-contraction over all pairs is an LP whose optimum is the
distortion.  The certificate is a weighted family of cuts plus the dual
multipliers of both constraint groups.

Negative type is certified spectrally: d is of negative type iff the
doubly centered matrix -(1/2) J d J is positive semidefinite, in which
case the centered Gram factorization reconstructs points whose squared
Euclidean distances reproduce d.  A failure is certified by a zero-sum
vector x with x.d.x > 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .cayley import ball
from .errors import ValidationError
from .group import DiscreteElement
from .rng import Rng
from .simplex import solve_lp

_C1_MAX_POINTS = 16


class MetricSpace:
    """Validated symmetric distance matrix on points 0..n-1."""

    def __init__(self, d, tol: float = 1e-9):
        d = np.array(d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValidationError("distance matrix must be square")
        n = d.shape[0]
        if n == 0:
            raise ValidationError("empty metric space")
        if not np.all(np.isfinite(d)):
            raise ValidationError("distances must be finite")
        scale = max(1.0, float(np.abs(d).max()))
        if np.abs(d - d.T).max() > tol * scale:
            raise ValidationError("distance matrix must be symmetric")
        d = (d + d.T) / 2.0
        if np.abs(np.diag(d)).max() > tol * scale:
            raise ValidationError("diagonal must be zero")
        np.fill_diagonal(d, 0.0)
        off = d[~np.eye(n, dtype=bool)]
        if n > 1 and off.min() <= 0:
            raise ValidationError("distinct points must be at positive distance")
        for k in range(n):
            if (d - (d[:, [k]] + d[[k], :])).max() > tol * scale:
                raise ValidationError(f"triangle inequality fails through point {k}")
        self.d = d
        self.n = n

    # -- pair bookkeeping: lexicographic (p, q), p < q ------------------

    def pairs(self) -> list[tuple[int, int]]:
        return [(p, q) for p in range(self.n) for q in range(p + 1, self.n)]

    def pair_distances(self) -> np.ndarray:
        iu = np.triu_indices(self.n, 1)
        return self.d[iu]

    # -- serialization: first line n, then upper-triangle rows ----------

    def to_text(self) -> str:
        lines = [str(self.n)]
        for i in range(self.n - 1):
            lines.append(" ".join(f"{v:.17g}" for v in self.d[i, i + 1 :]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MetricSpace":
        toks = text.split()
        if not toks:
            raise ValidationError("empty metric file")
        try:
            n = int(toks[0])
        except ValueError:
            raise ValidationError(f"bad point count {toks[0]!r}") from None
        need = n * (n - 1) // 2
        vals = toks[1:]
        if len(vals) != need:
            raise ValidationError(
                f"expected {need} upper-triangle entries for n={n}, got {len(vals)}"
            )
        d = np.zeros((n, n))
        it = iter(vals)
        for i in range(n):
            for j in range(i + 1, n):
                try:
                    v = float(next(it))
                except ValueError:
                    raise ValidationError("non-numeric distance entry") from None
                d[i, j] = d[j, i] = v
        return cls(d)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "MetricSpace":
        with open(path) as fh:
            return cls.from_text(fh.read())

    # -- transforms ------------------------------------------------------

    def snowflake(self, eps: float) -> "MetricSpace":
        """Raise all distances to the power 1 - eps (0 <= eps < 1)."""
        if not 0.0 <= eps < 1.0:
            raise ValidationError("snowflake exponent parameter must be in [0, 1)")
        return MetricSpace(self.d ** (1.0 - eps))

    def restrict(self, indices) -> "MetricSpace":
        idx = np.asarray(indices, dtype=np.int64)
        return MetricSpace(self.d[np.ix_(idx, idx)])

    def subsample_farthest(self, m: int, start: int = 0):
        """Greedy farthest-point subsample of m points; returns (indices, space)."""
        if not 1 <= m <= self.n:
            raise ValidationError("subsample size out of range")
        chosen = [start]
        mind = self.d[start].copy()
        while len(chosen) < m:
            mind[chosen] = -1.0
            nxt = int(np.argmax(mind))
            chosen.append(nxt)
            mind = np.minimum(mind, self.d[nxt])
        idx = np.array(sorted(chosen), dtype=np.int64)
        return idx, self.restrict(idx)


# -- constructors --------------------------------------------------------


def from_points_l1(points) -> MetricSpace:
    pts = np.asarray(points, dtype=float)
    d = np.abs(pts[:, None, :] - pts[None, :, :]).sum(axis=2)
    return MetricSpace(d)


def from_points_l2(points) -> MetricSpace:
    pts = np.asarray(points, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    return MetricSpace(np.sqrt((diff * diff).sum(axis=2)))


def path_metric(n: int) -> MetricSpace:
    idx = np.arange(n, dtype=float)
    return MetricSpace(np.abs(idx[:, None] - idx[None, :]))


def cycle_metric(n: int) -> MetricSpace:
    idx = np.arange(n)
    gap = np.abs(idx[:, None] - idx[None, :])
    return MetricSpace(np.minimum(gap, n - gap).astype(float))


def complete_bipartite_metric(a: int, b: int) -> MetricSpace:
    """Shortest-path metric of the complete bipartite graph on a + b points."""
    n = a + b
    side = np.array([0] * a + [1] * b)
    d = np.where(side[:, None] != side[None, :], 1.0, 2.0)
    np.fill_diagonal(d, 0.0)
    return MetricSpace(d)


def random_metric(n: int, seed: int, low: float = 1.0, high: float = 2.0) -> MetricSpace:
    """Random metric with entries in [low, high]; high <= 2*low keeps triangles."""
    if not low > 0 or high > 2 * low:
        raise ValidationError("need 0 < low and high <= 2*low")
    rng = Rng(seed)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = low + (high - low) * rng.uniform()
    return MetricSpace(d)


def ball_metric(
    k: int,
    r: int,
    mem_cap_mib: int = 4096,
    subsample: int | None = None,
    subsample_seed: int = 0,
) -> tuple[MetricSpace, list[DiscreteElement]]:
    """Word metric restricted to the radius-r ball.

    Distances come from a single radius-2r table: d(g, h) is the distance
    of g^{-1} h from the identity, and that product stays within radius 2r.
    Returns the metric space and the points in the ball's coordinate order.
    With ``subsample`` set, a greedy farthest-point pass keeps that many
    points, seeded deterministically by the choice of starting point.
    """
    small = ball(k, r, mem_cap_mib=mem_cap_mib)
    big = ball(k, 2 * r, mem_cap_mib=mem_cap_mib)
    pts = [el for el, _ in small.elements()]
    n = len(pts)
    d = np.zeros((n, n))
    for i in range(n):
        gi = pts[i].inverse()
        for j in range(i + 1, n):
            dist = big.distance(gi * pts[j])
            if dist is None:
                raise ValidationError("radius-2r table misses a pairwise product")
            d[i, j] = d[j, i] = float(dist)
    ms = MetricSpace(d)
    if subsample is None or subsample >= n:
        return ms, pts
    idx, ms = ms.subsample_farthest(subsample, start=subsample_seed % n)
    return ms, [pts[i] for i in idx]


# -- negative type -------------------------------------------------------


@dataclass
class NegativeTypeReport:
    is_negative_type: bool
    min_eigenvalue: float
    witness: np.ndarray | None
    witness_value: float | None
    reconstruction_error: float | None


def is_negative_type(ms: MetricSpace, tol: float = 1e-8) -> NegativeTypeReport:
    """Spectral test of negative type with a certificate either way.

    Positive case: the centered Gram matrix factors into points whose
    squared Euclidean distances reproduce d (reconstruction_error small).
    Negative case: witness x has sum(x) = 0 and x.d.x = witness_value > 0.
    """
    n = ms.n
    D = ms.d
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    K = -0.5 * (J @ D @ J)
    K = (K + K.T) / 2.0
    w, V = np.linalg.eigh(K)
    scale = max(1.0, float(np.trace(K)))
    ok = bool(w.min() >= -tol * scale)
    if ok:
        X = V * np.sqrt(np.clip(w, 0.0, None))
        sq = np.square(X[:, None, :] - X[None, :, :]).sum(axis=2)
        err = float(np.abs(sq - D).max())
        return NegativeTypeReport(True, float(w.min()), None, None, err)
    v = V[:, int(np.argmin(w))]
    v = v - v.mean()
    v /= np.linalg.norm(v)
    return NegativeTypeReport(False, float(w.min()), v, float(v @ D @ v), None)


# -- cut measures and the distortion LP ----------------------------------


@dataclass
class CutMeasure:
    """Weighted cuts on n points; bit i of mask = point i on the S side.

    The last point never appears in S: each cut is stored with its side
    not containing point n-1, which fixes one representative per
    partition.
    """

    n: int
    entries: list[tuple[int, float]] = field(default_factory=list)

    def side(self, mask: int) -> frozenset:
        return frozenset(i for i in range(self.n) if (mask >> i) & 1)

    def embedding(self) -> np.ndarray:
        """n x (#cuts) matrix whose L1 row distances realize the cut metric."""
        X = np.zeros((self.n, len(self.entries)))
        for j, (mask, w) in enumerate(self.entries):
            for i in range(self.n):
                if (mask >> i) & 1:
                    X[i, j] = w
        return X

    def l1_matrix(self) -> np.ndarray:
        X = self.embedding()
        return np.abs(X[:, None, :] - X[None, :, :]).sum(axis=2)

    def to_json(self) -> str:
        return json.dumps(
            [{"mask": m, "weight": w} for m, w in self.entries], indent=2
        )

    @classmethod
    def from_json(cls, n: int, text: str) -> "CutMeasure":
        rows = json.loads(text)
        if not isinstance(rows, list):
            raise ValidationError("cut measure JSON must be an array")
        entries = []
        for row in rows:
            mask = int(row["mask"])
            w = float(row["weight"])
            if not 0 < mask < (1 << n) or w < 0:
                raise ValidationError("bad cut entry")
            entries.append((mask, w))
        return cls(n, entries)


@dataclass
class DistortionReport:
    distortion: float
    cuts: CutMeasure
    pairs: list[tuple[int, int]]
    noncontraction_duals: np.ndarray  # mu >= 0, sum(mu * d) = distortion
    expansion_duals: np.ndarray  # nu >= 0, sum(nu * d) = 1
    iterations: int
    exact: bool

    def replay(self, ms: MetricSpace) -> tuple[float, float]:
        """(min, max) of embedded distance over original distance."""
        emb = self.cuts.l1_matrix()
        iu = np.triu_indices(ms.n, 1)
        ratios = emb[iu] / ms.d[iu]
        return float(ratios.min()), float(ratios.max())


def c1_distortion(ms: MetricSpace, refine: bool | None = None) -> DistortionReport:
    """Exact minimum distortion of any L1 embedding, via the cut-cone LP.

    Variables: one weight per cut (sides not containing the last point)
    plus the expansion bound t.  For every pair, the weighted cut metric
    must be >= d (non-contraction) and <= t*d (expansion).  Minimizing t
    yields the distortion together with a realizing cut measure.
    """
    n = ms.n
    if n > _C1_MAX_POINTS:
        raise ValidationError(
            f"distortion LP supports at most {_C1_MAX_POINTS} points, got {n}"
        )
    if n == 1:
        return DistortionReport(
            1.0, CutMeasure(1, []), [], np.zeros(0), np.zeros(0), 0, True
        )
    if refine is None:
        refine = n <= 10

    masks = np.arange(1, 1 << (n - 1), dtype=np.uint32)
    ncuts = len(masks)
    pairs = ms.pairs()
    P = len(pairs)
    dvec = ms.pair_distances()

    delta = np.zeros((P, ncuts))
    for row, (p, q) in enumerate(pairs):
        bp = (masks >> p) & 1
        bq = (masks >> q) & 1 if q < n - 1 else np.zeros_like(bp)
        delta[row] = (bp ^ bq).astype(float)

    # columns: cut weights then t
    A = np.zeros((2 * P, ncuts + 1))
    b = np.zeros(2 * P)
    senses = [">="] * P + ["<="] * P
    A[:P, :ncuts] = delta
    b[:P] = dvec
    A[P:, :ncuts] = delta
    A[P:, ncuts] = -dvec
    c = np.zeros(ncuts + 1)
    c[ncuts] = 1.0

    res = solve_lp(c, A, b, senses, refine=refine)
    if res.status != "optimal":
        raise ValidationError(f"distortion LP ended with status {res.status}")

    entries = [
        (int(masks[j]), float(res.x[j]))
        for j in range(ncuts)
        if res.x[j] > 1e-12
    ]
    mu = np.maximum(res.duals[:P], 0.0)
    nu = np.maximum(-res.duals[P:], 0.0)
    return DistortionReport(
        float(res.objective),
        CutMeasure(n, entries),
        pairs,
        mu,
        nu,
        res.iterations,
        res.exact,
    )


def negative_type_with_distortion(
    n: int,
    count: int,
    seed: int,
    min_distortion: float = 1.01,
    max_tries: int = 6000,
) -> list[tuple[MetricSpace, DistortionReport]]:
    """Random negative-type spaces whose L1 distortion exceeds a floor.

    Draws metrics with entries in [1, 2] (triangle inequalities hold for
    free), keeps those certified to be of negative type whose distortion
    LP lands at or above ``min_distortion``, and returns each space with
    its distortion report.  Deterministic in ``seed``.
    """
    out: list[tuple[MetricSpace, DistortionReport]] = []
    for t in range(max_tries):
        ms = random_metric(n, seed=Rng(seed).substream(t).seed)
        if not is_negative_type(ms).is_negative_type:
            continue
        rep = c1_distortion(ms, refine=False)
        if rep.distortion < min_distortion:
            continue
        out.append((ms, c1_distortion(ms, refine=True)))
        if len(out) == count:
            return out
    raise ValidationError(
        f"only {len(out)} of {count} draws met the distortion floor"
    )
