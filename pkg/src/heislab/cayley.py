"""Cayley-graph computations: balls, word distances, growth tables.

The graph has the 4k standard generators as edge moves, acting by right
multiplication.  Frontier expansion is vectorized: a level is a set of
coordinate rows (x_1..x_k, y_1..y_k, w), neighbors are computed per
generator by column arithmetic, and dedup/visited tests run on packed
int64 keys.  Everything is deterministic; members are reported in
lexicographic coordinate order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceCapError
from .group import DiscreteElement, identity


def _estimated_ball_bytes(k: int, r: int) -> int:
    # member count heuristic 4k * (r+1)^(2k+2); each member stores
    # 2k+1 coordinates plus a key and a distance, 8 bytes each
    members = 4 * k * (r + 1) ** (2 * k + 2)
    return members * 8 * (2 * k + 3)


def _pack(coords: np.ndarray, lows: np.ndarray, spans: np.ndarray) -> np.ndarray:
    """Mixed-radix packing of coordinate rows into int64 keys.

    Key order equals lexicographic coordinate order as long as every
    row sits inside [lows, lows + spans).
    """
    key = np.zeros(len(coords), dtype=np.int64)
    for j in range(coords.shape[1]):
        key = key * spans[j] + (coords[:, j] - lows[j])
    return key


def _neighbor_blocks(k: int, coords: np.ndarray) -> np.ndarray:
    """All right-multiplied neighbors, stacked move by move.

    Moves follow the canonical generator order of group.generators.
    a_i^s shifts x_i by s; b_i^s shifts y_i by s and w by s * x_i.
    """
    blocks = []
    for sign in (1, -1):
        for i in range(k):
            blk = coords.copy()
            blk[:, i] += sign
            blocks.append(blk)
            blk = coords.copy()
            blk[:, k + i] += sign
            blk[:, 2 * k] += sign * coords[:, i]
            blocks.append(blk)
    return np.concatenate(blocks, axis=0)


class _Side:
    """One direction of a (possibly bidirectional) BFS."""

    def __init__(self, k: int, start: DiscreteElement, lows, spans):
        self.k = k
        self.lows = np.asarray(lows, dtype=np.int64)
        self.spans = np.asarray(spans, dtype=np.int64)
        if int(np.prod(self.spans.astype(object))) >= (1 << 63):
            raise ResourceCapError("BFS coordinate window does not fit packed keys")
        self.frontier = np.array([start.coords()], dtype=np.int64)
        self.levels = [self.frontier]
        self.radius = 0
        keys = _pack(self.frontier, self.lows, self.spans)
        self.visited_keys = keys
        self.visited_dist = np.zeros(1, dtype=np.int64)

    def expand(self) -> np.ndarray:
        """Advance one level; returns the packed keys of the new frontier."""
        if len(self.frontier) == 0:
            return np.empty(0, dtype=np.int64)
        nbrs = _neighbor_blocks(self.k, self.frontier)
        keys = _pack(nbrs, self.lows, self.spans)
        keys, first = np.unique(keys, return_index=True)
        nbrs = nbrs[first]
        pos = np.searchsorted(self.visited_keys, keys)
        pos = np.clip(pos, 0, len(self.visited_keys) - 1)
        fresh = self.visited_keys[pos] != keys
        keys, nbrs = keys[fresh], nbrs[fresh]
        self.radius += 1
        self.frontier = nbrs
        self.levels.append(nbrs)
        order = np.argsort(
            np.concatenate([self.visited_keys, keys]), kind="stable"
        )
        allk = np.concatenate([self.visited_keys, keys])[order]
        alld = np.concatenate(
            [self.visited_dist, np.full(len(keys), self.radius, dtype=np.int64)]
        )[order]
        self.visited_keys, self.visited_dist = allk, alld
        return keys

    def dist_of(self, keys: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self.visited_keys, keys)
        return self.visited_dist[pos]

    def bytes_estimate(self) -> int:
        return (len(self.visited_keys) + 4 * self.k * len(self.frontier)) * 8 * (
            2 * self.k + 3
        )


@dataclass
class Ball:
    """Word-metric ball: coordinate rows with distances, sorted lexicographically."""

    k: int
    radius: int
    coords: np.ndarray
    dists: np.ndarray
    _keys: np.ndarray
    _lows: np.ndarray
    _spans: np.ndarray

    @property
    def size(self) -> int:
        return len(self.coords)

    def counts(self) -> np.ndarray:
        """counts[r] = number of elements at distance exactly r."""
        return np.bincount(self.dists, minlength=self.radius + 1)

    def distance(self, el: DiscreteElement):
        """d_W(1, el) if el lies in the ball, else None."""
        row = np.asarray([el.coords()], dtype=np.int64)
        if np.any(row[0] < self._lows) or np.any(
            row[0] >= self._lows + self._spans
        ):
            return None
        key = _pack(row, self._lows, self._spans)[0]
        pos = int(np.searchsorted(self._keys, key))
        if pos < len(self._keys) and self._keys[pos] == key:
            return int(self.dists[pos])
        return None

    def __contains__(self, el: DiscreteElement) -> bool:
        return self.distance(el) is not None

    def elements(self):
        for row, d in zip(self.coords, self.dists):
            yield element_from_row(self.k, row), int(d)


def element_from_row(k: int, row) -> DiscreteElement:
    vals = [int(v) for v in row]
    return DiscreteElement(k, tuple(vals[:k]), tuple(vals[k : 2 * k]), vals[2 * k])


def ball(k: int, r: int, mem_cap_mib: float = 4096.0) -> Ball:
    """Closed ball of radius r around the identity.

    Memory is guarded twice: once upfront from the size heuristic, and
    incrementally against the actual visited set while levels expand.
    """
    if r < 0:
        raise ValueError("radius must be >= 0")
    cap = int(mem_cap_mib * (1 << 20))
    if _estimated_ball_bytes(k, r) > cap:
        raise ResourceCapError(
            f"estimated ball size for k={k}, r={r} exceeds memory cap"
        )
    lows = np.array([-r] * (2 * k) + [-r * r - 1], dtype=np.int64)
    spans = np.array([2 * r + 1] * (2 * k) + [2 * r * r + 3], dtype=np.int64)
    side = _Side(k, identity(k), lows, spans)
    for _ in range(r):
        if side.bytes_estimate() > cap:
            raise ResourceCapError("memory cap exceeded during ball BFS")
        side.expand()
    coords = np.concatenate(side.levels, axis=0)
    dists = np.concatenate(
        [np.full(len(lv), d, dtype=np.int64) for d, lv in enumerate(side.levels)]
    )
    keys = _pack(coords, side.lows, side.spans)
    order = np.argsort(keys)
    return Ball(k, r, coords[order], dists[order], keys[order], side.lows, side.spans)


def growth_table(k: int, r_max: int, mem_cap_mib: float = 4096.0):
    """Rows (r, |B_r|, |B_r| / r^(2k+2)); the r = 0 row is normalized by 1."""
    b = ball(k, r_max, mem_cap_mib)
    counts = np.cumsum(b.counts())
    rows = []
    for r in range(r_max + 1):
        denom = float(r ** (2 * k + 2)) if r > 0 else 1.0
        rows.append((r, int(counts[r]), counts[r] / denom))
    return rows


def _bounds_for_pair(k: int, g: DiscreteElement, r: int):
    """A coordinate window certain to contain both BFS sides to radius r."""
    gx = np.asarray(g.coords(), dtype=np.int64)
    lo = np.minimum(0, gx)
    hi = np.maximum(0, gx)
    lows = lo.copy()
    spans = hi - lo + 1
    lows[: 2 * k] -= r
    spans[: 2 * k] += 2 * r
    xmax = int(np.max(np.abs(np.concatenate([gx[:k], np.zeros(1, dtype=np.int64)]))))
    wslack = r * (xmax + r)
    lows[2 * k] -= wslack + 1
    spans[2 * k] += 2 * wslack + 3
    return lows, spans


def word_distance(
    g: DiscreteElement, r_max: int, mem_cap_mib: float = 4096.0
):
    """Exact d_W(1, g), or None when the distance certifiably exceeds r_max.

    Unidirectional BFS for small caps, bidirectional (meeting in the
    middle, always expanding the smaller frontier) beyond radius 8.
    """
    if g.is_identity():
        return 0
    if r_max < 1:
        return None
    cap = int(mem_cap_mib * (1 << 20))
    k = g.k
    lows, spans = _bounds_for_pair(k, g, r_max)
    fwd = _Side(k, identity(k), lows, spans)
    if r_max <= 8:
        target = _pack(np.array([g.coords()], dtype=np.int64), fwd.lows, fwd.spans)[0]
        for _ in range(r_max):
            if fwd.bytes_estimate() > cap:
                raise ResourceCapError("memory cap exceeded during BFS")
            keys = fwd.expand()
            pos = np.searchsorted(keys, target)
            if pos < len(keys) and keys[pos] == target:
                return fwd.radius
        return None
    bwd = _Side(k, g, lows, spans)
    best = None
    while True:
        if fwd.radius + bwd.radius >= (best if best is not None else r_max + 1):
            return best
        side, other = (
            (fwd, bwd) if len(fwd.frontier) <= len(bwd.frontier) else (bwd, fwd)
        )
        if side.bytes_estimate() + other.bytes_estimate() > cap:
            raise ResourceCapError("memory cap exceeded during bidirectional BFS")
        new_keys = side.expand()
        if len(new_keys) == 0:
            return best
        pos = np.searchsorted(other.visited_keys, new_keys)
        pos = np.clip(pos, 0, len(other.visited_keys) - 1)
        hit = other.visited_keys[pos] == new_keys
        if np.any(hit):
            total = side.radius + other.visited_dist[pos[hit]]
            cand = int(np.min(total))
            if best is None or cand < best:
                best = cand
        if best is not None and best > r_max:
            best = None
            if fwd.radius + bwd.radius >= r_max + 1:
                return None


def central_word_upper_bound(m: int) -> int:
    """Certified word-length upper bound for the central element c^m.

    Uses commutator rectangles: [a_1^u, b_1^q] spells c^(u q) in
    2(u + q) letters, plus a remainder rectangle.
    """
    m = abs(m)
    if m == 0:
        return 0
    u = math.isqrt(m)
    if u * u < m:
        u += 1
    q, rem = divmod(m, u)
    bound = 2 * (u + q)
    if rem:
        bound += 2 * rem + 2
    return bound


def word_upper_bound(g: DiscreteElement) -> int:
    """Certified upper bound on d_W(1, g) from an explicit spelling."""
    base = sum(abs(v) for v in g.x) + sum(abs(v) for v in g.y)
    dot = sum(a * b for a, b in zip(g.x, g.y))
    # a-letters first leaves central residue w - x.y, b-letters first leaves w
    return base + min(
        central_word_upper_bound(g.w - dot), central_word_upper_bound(g.w)
    )


def z_power_distance(
    k: int, t: int, r_max: int | None = None, mem_cap_mib: float = 4096.0
):
    """Exact word distance of the central power c^t."""
    from .group import central

    g = central(k, t)
    if r_max is None:
        r_max = word_upper_bound(g)
    return word_distance(g, r_max, mem_cap_mib)
