"""Horizontal lines and the nonmonotonicity functional.

A horizontal line through p with horizontal direction V is
gamma(tau) = p.(tau V); its vertical coordinate is affine in tau with
slope half the symplectic pairing of p's horizontal part with V.  A set
is monotone when its trace on almost every horizontal line is a half
line.  The estimator walks an arithmetic tau-grid, keeps the positions
inside the quasi-ball of radius R, and measures on every in-ball
segment how many trace points any single sub-segment approximation must
flip:

    nm(line) = h * sum over segments of (P_seg - best contiguous run),

where P_seg counts in-set positions and the best run maximizes
(#in - #out) over contiguous stretches (Kadane).  Monotone traces cost
zero on every segment; a slab complement pays min(side, side, gap) per
crossing.  The reported value is the line average of nm / R.

Sampling is in radius-normalized coordinates: substream i at radius R
and at radius 2R yields bases related exactly by the intrinsic dilation
(doubling is exact in binary floating point), so paired-seed runs at
two radii agree except for genuinely new geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .continuum import Region
from .errors import ValidationError
from .parallel import block_map
from .rng import Rng

_LINE_BLOCK = 256


@dataclass(frozen=True)
class HorizontalLine:
    k: int
    base: tuple  # exponential coordinates, length 2k+1
    direction: tuple  # horizontal, length 2k, unit l2 norm

    def points(self, taus: np.ndarray) -> np.ndarray:
        k = self.k
        b = np.asarray(self.base)
        V = np.asarray(self.direction)
        bx, by = b[:k], b[k : 2 * k]
        Vx, Vy = V[:k], V[k:]
        slope = 0.5 * (bx @ Vy - by @ Vx)
        out = np.empty((len(taus), 2 * k + 1))
        out[:, : 2 * k] = b[: 2 * k] + taus[:, None] * V
        out[:, 2 * k] = b[2 * k] + taus * slope
        return out


def sample_horizontal_lines(
    k: int, R: float, count: int, seed: int
) -> list[HorizontalLine]:
    """Lines with bases uniform in the quasi-ball of radius R.

    The base factorizes exactly: horizontal l1 radius rho = R Beta(2k, 3)
    (Gamma sums of log-uniforms), direction on the l1 sphere (normalized
    exponentials with signs), vertical coordinate uniform in the column
    +-((R - rho)/4)^2.  Every draw is a fixed-length block from the
    line's substream and scales linearly with R, so substream i at radii
    R and 2R yields bases related by the intrinsic dilation exactly.
    The line direction is an independent l2-unit horizontal vector.
    """
    return _lines_at(k, R, count, seed, 0)


def _quasi_norm_rows(k: int, pts: np.ndarray) -> np.ndarray:
    return np.abs(pts[:, : 2 * k]).sum(axis=1) + 4.0 * np.sqrt(
        np.abs(pts[:, 2 * k])
    )


def line_trace(region: Region, line: HorizontalLine, R: float, h: float):
    """(taus, in_ball, in_set) on the grid j*h, |j*h| covering the ball.

    Bases lie inside the ball, so in-ball positions obey
    |tau| <= |tau| |V|_1 <= l1(base) + R <= 2R; the grid covers that.
    """
    M = int(math.ceil(2.0 * R / h))
    taus = h * np.arange(-M, M + 1)
    pts = line.points(taus)
    in_ball = _quasi_norm_rows(region.k, pts) <= R
    in_set = region.contains(pts) & in_ball
    return taus, in_ball, in_set


def line_intervals(region: Region, line: HorizontalLine, clip, h: float) -> list:
    """Maximal in-set runs of the sampled trace on the clip window.

    Samples gamma(tau) = base * direction^tau at pitch h over
    [clip[0], clip[1]] and merges consecutive in-set samples; each run
    is reported as (first, last) sample position, so true endpoints are
    recovered to within one pitch.
    """
    t0, t1 = float(clip[0]), float(clip[1])
    if not h > 0.0:
        raise ValidationError("sampling pitch must be positive")
    if not t1 > t0:
        raise ValidationError("clip window must be nondegenerate")
    taus = t0 + h * np.arange(int(math.floor((t1 - t0) / h)) + 1)
    inside = region.contains(line.points(taus))
    idx = np.flatnonzero(inside)
    if len(idx) == 0:
        return []
    splits = np.flatnonzero(np.diff(idx) > 1)
    return [
        (float(taus[run[0]]), float(taus[run[-1]]))
        for run in np.split(idx, splits + 1)
    ]


def _segment_cost(sigma: np.ndarray) -> int:
    """P - best Kadane run on one +-1 segment; zero for monotone traces."""
    P = int((sigma > 0).sum())
    best = 0
    run = 0
    for v in sigma:
        run = max(0, run + int(v))
        best = max(best, run)
    return P - best


def line_nonmonotonicity(region: Region, line: HorizontalLine, R: float, h: float) -> float:
    _, in_ball, in_set = line_trace(region, line, R, h)
    if not in_ball.any():
        return 0.0
    total = 0
    idx = np.flatnonzero(in_ball)
    splits = np.flatnonzero(np.diff(idx) > 1)
    for seg in np.split(idx, splits + 1):
        sigma = np.where(in_set[seg], 1, -1)
        total += _segment_cost(sigma)
    return h * total


@dataclass
class NmReport:
    value: float
    stderr: float
    n_lines: int
    radius: float
    step: float
    per_line: np.ndarray


def _nm_block(payload):
    region, R, h, seed, start, count = payload
    vals = []
    for i in range(start, start + count):
        (line,) = _lines_at(region.k, R, 1, seed, i)
        vals.append(line_nonmonotonicity(region, line, R, h))
    return vals


def _lines_at(k: int, R: float, count: int, seed: int, start: int):
    out = []
    m = 2 * k
    for i in range(start, start + count):
        rng = Rng(seed).substream(i)
        u = rng.uniforms(2 * m + 4)
        expo = -np.log(1.0 - u[:m])  # exponentials for the l1 direction
        signs = np.where(u[m : 2 * m] < 0.5, 1.0, -1.0)
        g1 = float(expo.sum())  # Gamma(2k), reused from the direction draws
        g2 = float(-np.log(1.0 - u[2 * m : 2 * m + 3]).sum())  # Gamma(3)
        rho = R * g1 / (g1 + g2)  # l1 radius with density rho^(2k-1)(R-rho)^2
        base = np.empty(m + 1)
        base[:m] = rho * signs * (expo / g1)
        zmax = ((R - rho) / 4.0) ** 2
        base[m] = zmax * (2.0 * u[2 * m + 3] - 1.0)
        g = rng.normals(m)
        nrm = float(np.linalg.norm(g))
        if nrm == 0.0:  # unreachable in practice, keep the line valid
            g = np.zeros(m)
            g[0] = 1.0
            nrm = 1.0
        out.append(HorizontalLine(k, tuple(base), tuple(g / nrm)))
    return out


def nonmonotonicity(
    region: Region,
    R: float,
    n_lines: int = 2000,
    seed: int = 0,
    steps: int = 120,
    workers: int = 1,
) -> NmReport:
    """Line-averaged nonmonotonicity of the region inside the R-ball.

    steps fixes the grid pitch h = R / steps, so estimates at different
    radii with equal seeds are comparable point for point.
    """
    if n_lines < 2:
        raise ValidationError("need at least two lines")
    h = R / steps
    payloads = []
    for start in range(0, n_lines, _LINE_BLOCK):
        count = min(_LINE_BLOCK, n_lines - start)
        payloads.append((region, R, h, seed, start, count))
    vals = np.array(
        [v for part in block_map(_nm_block, payloads, workers) for v in part]
    )
    value = float(vals.mean()) / R
    stderr = float(vals.std(ddof=1)) / math.sqrt(n_lines) / R
    return NmReport(value, stderr, n_lines, R, h, vals)


# -- interval statistics -----------------------------------------------------


@dataclass
class IntervalHistogram:
    classes: dict  # dyadic class j -> weight; class j holds [2^(j-1), 2^j)
    censored: int  # runs cut off by the tau-grid ends, kept out of classes
    runs: int
    n_lines: int


def _interval_block(payload):
    region, R, h, seed, start, count = payload
    weights: dict[int, float] = {}
    censored = 0
    runs = 0
    for i in range(start, start + count):
        (line,) = _lines_at(region.k, R, 1, seed, i)
        _, in_ball, in_set = line_trace(region, line, R, h)
        idx = np.flatnonzero(in_set)
        if len(idx) == 0:
            continue
        splits = np.flatnonzero(np.diff(idx) > 1)
        for run in np.split(idx, splits + 1):
            runs += 1
            if run[0] == 0 or run[-1] == len(in_set) - 1:
                censored += 1  # touches the grid clip, length unknown
                continue
            length = h * len(run)
            j = int(math.floor(math.log2(length))) + 1
            lo_b, hi_b = 2.0 ** (j - 1), 2.0**j
            if length - lo_b < h:
                weights[j] = weights.get(j, 0.0) + 0.5
                weights[j - 1] = weights.get(j - 1, 0.0) + 0.5
            elif hi_b - length < h:
                weights[j] = weights.get(j, 0.0) + 0.5
                weights[j + 1] = weights.get(j + 1, 0.0) + 0.5
            else:
                weights[j] = weights.get(j, 0.0) + 1.0
    return weights, censored, runs


def interval_histogram(
    region: Region,
    R: float,
    n_lines: int = 2000,
    seed: int = 0,
    steps: int = 120,
    workers: int = 1,
) -> IntervalHistogram:
    """Dyadic histogram of in-set interval lengths along sampled lines.

    Runs within one grid pitch of a class boundary are split half and
    half between the neighboring classes; runs clipped by the grid ends
    are tallied as censored instead of guessing their length.
    """
    h = R / steps
    payloads = []
    for start in range(0, n_lines, _LINE_BLOCK):
        count = min(_LINE_BLOCK, n_lines - start)
        payloads.append((region, R, h, seed, start, count))
    classes: dict[int, float] = {}
    censored = 0
    runs = 0
    for w, c, r in block_map(_interval_block, payloads, workers):
        for j, v in w.items():
            classes[j] = classes.get(j, 0.0) + v
        censored += c
        runs += r
    return IntervalHistogram(dict(sorted(classes.items())), censored, runs, n_lines)
