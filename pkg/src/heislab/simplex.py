"""Dense two-phase revised simplex for small linear programs.

Solves  min c.x  s.t.  A x (<= | >= | =) b,  x >= 0.

Pricing is Dantzig by default and falls back to Bland's rule after a
stall, which guarantees termination on degenerate problems.  The basis
system is re-solved each iteration (problems here are small), pricing is
vectorized over all columns.  Duals follow the convention of the
minimization form: >= rows get nonnegative multipliers, <= rows
nonpositive ones, and c.x* = y.b at optimality.

``refine=True`` recomputes the final basic solution, objective, and
duals in exact rational arithmetic and verifies optimality of the basis
exactly; if a reduced cost is negative in exact arithmetic the float
loop resumes from that column.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

_TOL_RC = 1e-9
_TOL_RATIO = 1e-10
_STALL = 60


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded | iteration_cap
    x: np.ndarray | None = None
    objective: float | None = None
    duals: np.ndarray | None = None
    iterations: int = 0
    exact: bool = False


class _Tableau:
    def __init__(self, A: np.ndarray, b: np.ndarray, c: np.ndarray, n_struct: int):
        self.A = A
        self.b = b
        self.c = c
        self.n_struct = n_struct  # structural + slack columns; artificials after
        self.m, self.n = A.shape
        self.basis = None
        self.iterations = 0

    def run(self, allow, max_iter: int) -> str:
        """Iterate to optimality over the allowed columns."""
        stall = 0
        last_obj = np.inf
        while True:
            if self.iterations >= max_iter:
                return "iteration_cap"
            B = self.A[:, self.basis]
            xb = np.linalg.solve(B, self.b)
            y = np.linalg.solve(B.T, self.c[self.basis])
            red = self.c - y @ self.A
            red[~allow] = np.inf
            red[self.basis] = np.inf
            obj = float(self.c[self.basis] @ xb)
            stall = stall + 1 if obj >= last_obj - 1e-13 * (1 + abs(obj)) else 0
            last_obj = min(last_obj, obj)
            if stall <= _STALL:
                j = int(np.argmin(red))
                if red[j] >= -_TOL_RC * (1.0 + abs(obj)):
                    return "optimal"
            else:
                # Bland: lowest-index improving column, immune to cycling
                neg = np.flatnonzero(red < -_TOL_RC * (1.0 + abs(obj)))
                if len(neg) == 0:
                    return "optimal"
                j = int(neg[0])
            d = np.linalg.solve(B, self.A[:, j])
            pos = d > _TOL_RATIO
            if not np.any(pos):
                return "unbounded"
            ratios = np.full(self.m, np.inf)
            ratios[pos] = xb[pos] / d[pos]
            rmin = float(np.min(ratios))
            cand = np.flatnonzero(ratios <= rmin + _TOL_RATIO)
            # leaving tie-break by lowest basis column index (Bland-compatible)
            leave = int(cand[np.argmin(self.basis[cand])])
            self.basis[leave] = j
            self.iterations += 1

    def pivot_on(self, j: int) -> bool:
        """Force one pivot with entering column j; False if no leave exists."""
        B = self.A[:, self.basis]
        xb = np.linalg.solve(B, self.b)
        d = np.linalg.solve(B, self.A[:, j])
        pos = d > _TOL_RATIO
        if not np.any(pos):
            return False
        ratios = np.full(self.m, np.inf)
        ratios[pos] = xb[pos] / d[pos]
        rmin = float(np.min(ratios))
        cand = np.flatnonzero(ratios <= rmin + _TOL_RATIO)
        leave = int(cand[np.argmin(self.basis[cand])])
        self.basis[leave] = j
        self.iterations += 1
        return True


def solve_lp(
    c,
    A,
    b,
    senses,
    max_iter: int = 20000,
    refine: bool = False,
) -> LpResult:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    senses = list(senses)
    if len(senses) != m or len(b) != m or len(c) != n:
        raise ValueError("inconsistent LP dimensions")

    A = A.copy()
    flip = np.zeros(m, dtype=bool)
    for i in range(m):
        if b[i] < 0:
            A[i] *= -1.0
            b[i] *= -1.0
            flip[i] = True
            senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]

    slack_cols = []
    art_rows = []
    for i, s in enumerate(senses):
        if s == "<=":
            slack_cols.append((i, 1.0))
        elif s == ">=":
            slack_cols.append((i, -1.0))
            art_rows.append(i)
        elif s == "=":
            art_rows.append(i)
        else:
            raise ValueError(f"bad sense {s!r}")

    n_slack = len(slack_cols)
    n_art = len(art_rows)
    N = n + n_slack + n_art
    full = np.zeros((m, N))
    full[:, :n] = A
    for j, (i, sgn) in enumerate(slack_cols):
        full[i, n + j] = sgn
    for j, i in enumerate(art_rows):
        full[i, n + n_slack + j] = 1.0

    tab = _Tableau(full, b, np.zeros(N), n + n_slack)
    basis = np.empty(m, dtype=np.int64)
    art_of_row = {i: n + n_slack + j for j, i in enumerate(art_rows)}
    for j, (i, sgn) in enumerate(slack_cols):
        if sgn > 0:
            basis[i] = n + j
    for i in range(m):
        if i in art_of_row:
            basis[i] = art_of_row[i]
    tab.basis = basis

    if n_art:
        tab.c = np.zeros(N)
        tab.c[n + n_slack :] = 1.0
        allow = np.ones(N, dtype=bool)
        status = tab.run(allow, max_iter)
        if status != "optimal":
            return LpResult(status, iterations=tab.iterations)
        B = full[:, tab.basis]
        xb = np.linalg.solve(B, b)
        if float(tab.c[tab.basis] @ xb) > 1e-7 * (1.0 + float(np.abs(b).sum())):
            return LpResult("infeasible", iterations=tab.iterations)

    tab.c = np.zeros(N)
    tab.c[:n] = c
    allow = np.ones(N, dtype=bool)
    allow[n + n_slack :] = False  # artificials may linger basic at zero
    status = tab.run(allow, max_iter)
    if status != "optimal":
        return LpResult(status, iterations=tab.iterations)

    if refine:
        for _ in range(40):
            res = _exact_from_basis(full, b, tab.c, tab.basis, n, flip, allow)
            if res is None or res[0] == "degenerate":
                break  # keep the float answer
            if res[0] == "ok":
                _, x_ex, obj_ex, y_ex = res
                x = np.array([float(v) for v in x_ex[:n]])
                duals = np.array([float(v) for v in y_ex])
                return LpResult(
                    "optimal", x, float(obj_ex), duals, tab.iterations, exact=True
                )
            # an exactly-improving column slipped past float pricing: pivot on it
            if not tab.pivot_on(int(res[1])):
                break

    B = full[:, tab.basis]
    xb = np.linalg.solve(B, b)
    x_full = np.zeros(N)
    x_full[tab.basis] = xb
    y = np.linalg.solve(B.T, tab.c[tab.basis])
    y = np.where(flip, -y, y)
    return LpResult(
        "optimal",
        x_full[:n],
        float(c @ x_full[:n]),
        y,
        tab.iterations,
    )


def _frac(v) -> Fraction:
    return Fraction(v).limit_denominator(10**12)


def _exact_from_basis(full, b, cost, basis, n, flip, allow):
    """Rational solve of the basis system plus exact optimality check.

    Returns ("ok", x_full, objective, duals) when the basis is exactly
    optimal, ("enter", j) when column j has an exactly negative reduced
    cost, ("degenerate", None) when the basic solution is exactly
    infeasible, or None when the basis matrix is singular.
    """
    m = len(b)
    Bf = [[_frac(full[i, j]) for j in basis] for i in range(m)]
    bf = [_frac(v) for v in b]
    sol = _frac_solve(Bf, bf)
    if sol is None:
        return None
    if any(v < 0 for v in sol):
        return ("degenerate", None)
    cb = [_frac(cost[j]) for j in basis]
    yT = _frac_solve([list(r) for r in zip(*Bf)], cb)
    if yT is None:
        return None
    x_full = [Fraction(0)] * full.shape[1]
    for i, j in enumerate(basis):
        x_full[j] = sol[i]
    obj = sum(_frac(cost[j]) * x_full[j] for j in range(n))
    basis_set = set(int(j) for j in basis)
    for j in range(full.shape[1]):
        if not allow[j] or j in basis_set:
            continue
        red = _frac(cost[j]) - sum(yT[i] * _frac(full[i, j]) for i in range(m))
        if red < 0:
            return ("enter", j)
    duals = [(-y if f else y) for y, f in zip(yT, flip)]
    return ("ok", x_full, obj, duals)


def _frac_solve(M, rhs):
    """Gaussian elimination over Fractions; None if singular."""
    m = len(rhs)
    aug = [row[:] + [rhs[i]] for i, row in enumerate(M)]
    for col in range(m):
        piv = None
        for r in range(col, m):
            if aug[r][col] != 0:
                piv = r
                break
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [v / pv for v in aug[col]]
        for r in range(m):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [aug[i][m] for i in range(m)]
