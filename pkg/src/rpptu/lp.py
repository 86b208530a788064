"""Bounded-variable revised simplex for small dense LPs.

The engine keeps an explicit basis inverse updated by rank-one pivots and
refactored periodically. Variables carry finite lower bounds and possibly
infinite upper bounds; nonbasic variables sit at one of their bounds, and the
ratio test also considers the entering variable flipping to its other bound.
Phase 1 minimises the sum of artificials; redundant rows keep an artificial
pinned to zero in the basis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

EPS_FEAS = 1e-7
EPS_OBJ = 1e-6
EPS_INT = 1e-6

_DUAL_TOL = 1e-9
_PIVOT_TOL = 1e-9
_DEGENERATE_LIMIT = 50
_REFACTOR_EVERY = 50


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass
class LpRow:
    idx: np.ndarray
    val: np.ndarray
    sense: str  # "=", ">=", "<="
    rhs: float
    name: str = ""

    def __post_init__(self):
        self.idx = np.asarray(self.idx, dtype=np.int64)
        self.val = np.asarray(self.val, dtype=float)
        if self.sense not in ("=", ">=", "<="):
            raise ValueError(f"bad row sense {self.sense!r}")

    def activity(self, x) -> float:
        return float(self.val @ np.asarray(x)[self.idx])


@dataclass
class LpProblem:
    c: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    rows: list[LpRow] = field(default_factory=list)
    offset: float = 0.0
    names: list[str] | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        n = len(self.c)
        if self.lo.shape != (n,) or self.hi.shape != (n,):
            raise ValueError("bound vectors must match the objective length")
        if not np.all(np.isfinite(self.lo)):
            raise ValueError("lower bounds must be finite")
        if np.any(self.lo > self.hi):
            j = int(np.argmax(self.lo > self.hi))
            raise ValueError(f"variable {j} has lo > hi")
        for r in self.rows:
            if len(r.idx) and (r.idx.min() < 0 or r.idx.max() >= n):
                raise ValueError(f"row {r.name!r} references a column out of range")

    @property
    def num_cols(self) -> int:
        return len(self.c)

    def add_row(self, idx, val, sense, rhs, name="") -> None:
        self.rows.append(LpRow(idx, val, sense, rhs, name))

    def dense(self) -> np.ndarray:
        A = np.zeros((len(self.rows), self.num_cols))
        for i, r in enumerate(self.rows):
            np.add.at(A[i], r.idx, r.val)
        return A

    def max_violation(self, x) -> float:
        x = np.asarray(x, dtype=float)
        worst = 0.0
        for r in self.rows:
            act = r.activity(x)
            if r.sense == "=":
                v = abs(act - r.rhs)
            elif r.sense == ">=":
                v = r.rhs - act
            else:
                v = act - r.rhs
            worst = max(worst, v)
        return worst

    def to_lp_text(self) -> str:
        """CPLEX-style LP text, for cross-checking with other solvers."""
        names = self.names or [f"x{j}" for j in range(self.num_cols)]

        def expr(idx, val):
            terms = []
            for j, v in zip(idx, val):
                if v == 0:
                    continue
                sign = "-" if v < 0 else "+"
                terms.append(f"{sign} {abs(v):.12g} {names[j]}")
            s = " ".join(terms) or "0 x0"
            return s[2:] if s.startswith("+ ") else s

        nz = np.nonzero(self.c)[0]
        out = ["Minimize", f" obj: {expr(nz, self.c[nz])}", "Subject To"]
        for i, r in enumerate(self.rows):
            name = r.name or f"r{i}"
            out.append(f" {name}: {expr(r.idx, r.val)} {r.sense} {r.rhs:.12g}")
        out.append("Bounds")
        for j in range(self.num_cols):
            hi = "+inf" if np.isinf(self.hi[j]) else f"{self.hi[j]:.12g}"
            out.append(f" {self.lo[j]:.12g} <= {names[j]} <= {hi}")
        out.append("End")
        return "\n".join(out) + "\n"


@dataclass
class LpResult:
    status: LpStatus
    objective: float = float("nan")
    x: np.ndarray | None = None
    iterations: int = 0
    # phase-1 optimum; positive means the rows cannot be met (infeasibility certificate)
    infeasibility: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL


class _Simplex:
    """Primal bounded simplex on ``A x = b, lo <= x <= hi``."""

    def __init__(self, A, b, lo, hi, basis, x, max_iter):
        self.A = A
        self.b = b
        self.lo = lo
        self.hi = hi
        self.basis = np.array(basis, dtype=np.int64)
        self.x = x
        self.max_iter = max_iter
        self.iterations = 0
        self.is_basic = np.zeros(A.shape[1], dtype=bool)
        self.is_basic[self.basis] = True
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis]
        self.Binv = np.linalg.inv(B)
        xn = np.where(self.is_basic, 0.0, self.x)
        self.x[self.basis] = self.Binv @ (self.b - self.A @ xn)

    def run(self, c) -> LpStatus:
        A, lo, hi, x = self.A, self.lo, self.hi, self.x
        degenerate = 0
        since_refactor = 0
        movable = hi > lo
        while True:
            if self.iterations >= self.max_iter:
                return LpStatus.ITERATION_LIMIT
            y = c[self.basis] @ self.Binv
            d = c - y @ A
            d[self.is_basic] = 0.0
            up = (d < -_DUAL_TOL) & (x < hi) & movable
            down = (d > _DUAL_TOL) & (x > lo) & movable
            elig = up | down
            elig &= ~self.is_basic
            if not elig.any():
                return LpStatus.OPTIMAL
            bland = degenerate > _DEGENERATE_LIMIT
            if bland:
                j = int(np.argmax(elig))
            else:
                score = np.where(elig, np.abs(d), -1.0)
                j = int(np.argmax(score))
            direction = 1.0 if up[j] else -1.0

            alpha = self.Binv @ A[:, j]
            rate = -direction * alpha  # d x_B / d theta
            xb = x[self.basis]
            lb = lo[self.basis]
            ub = hi[self.basis]
            limits = np.full(len(xb), np.inf)
            dec = rate < -_PIVOT_TOL
            inc = rate > _PIVOT_TOL
            limits[dec] = (xb[dec] - lb[dec]) / -rate[dec]
            fin = inc & np.isfinite(ub)
            limits[fin] = (ub[fin] - xb[fin]) / rate[fin]
            limits = np.maximum(limits, 0.0)
            flip = hi[j] - lo[j]

            theta_row = limits.min() if len(limits) else np.inf
            if np.isinf(theta_row) and np.isinf(flip):
                return LpStatus.UNBOUNDED
            self.iterations += 1
            if flip <= theta_row:
                theta = flip
                x[j] = hi[j] if direction > 0 else lo[j]
                x[self.basis] = xb + theta * rate
                degenerate = 0
                continue

            # ties: prefer the largest pivot for stability, or smallest index under Bland
            cand = np.nonzero(limits <= theta_row + 1e-12)[0]
            if bland:
                r = int(cand[np.argmin(self.basis[cand])])
            else:
                r = int(cand[np.argmax(np.abs(alpha[cand]))])
            theta = limits[r]
            leaving = self.basis[r]
            x[self.basis] = xb + theta * rate
            x[j] += direction * theta
            x[leaving] = lo[leaving] if rate[r] < 0 else hi[leaving]
            self.is_basic[leaving] = False
            self.is_basic[j] = True
            self.basis[r] = j
            piv_row = self.Binv[r] / alpha[r]
            self.Binv -= np.outer(alpha, piv_row)
            self.Binv[r] = piv_row
            degenerate = degenerate + 1 if theta <= 1e-12 else 0
            since_refactor += 1
            if since_refactor >= _REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0

    def drive_out(self, artificial: np.ndarray):
        """Pivot zero-valued basic artificials out where a real column allows it."""
        n_real = int(np.argmax(artificial)) if artificial.any() else self.A.shape[1]
        for r in range(len(self.basis)):
            if not artificial[self.basis[r]]:
                continue
            row = self.Binv[r] @ self.A[:, :n_real]
            row[self.is_basic[:n_real]] = 0.0
            cand = np.nonzero(np.abs(row) > 1e-7)[0]
            if len(cand) == 0:
                continue  # redundant row
            j = int(cand[np.argmax(np.abs(row[cand]))])
            alpha = self.Binv @ self.A[:, j]
            leaving = self.basis[r]
            self.is_basic[leaving] = False
            self.is_basic[j] = True
            self.basis[r] = j
            piv_row = self.Binv[r] / alpha[r]
            self.Binv -= np.outer(alpha, piv_row)
            self.Binv[r] = piv_row
        self.refactor()


def _simplex_solve(p: LpProblem, max_iter: int) -> LpResult:
    n = p.num_cols
    lo, hi = p.lo, p.hi
    fixed = lo == hi
    x_out = lo.copy()
    free_cols = np.nonzero(~fixed)[0]
    colmap = -np.ones(n, dtype=np.int64)
    colmap[free_cols] = np.arange(len(free_cols))

    # presolve: substitute fixed columns, drop empty rows
    rows = []
    for r in p.rows:
        keep = colmap[r.idx] >= 0
        rhs = r.rhs - float(r.val[~keep] @ lo[r.idx[~keep]])
        idx, val = colmap[r.idx[keep]], r.val[keep]
        nzm = val != 0
        idx, val = idx[nzm], val[nzm]
        if len(idx) == 0:
            bad = (abs(rhs) > EPS_FEAS) if r.sense == "=" else (
                rhs > EPS_FEAS if r.sense == ">=" else rhs < -EPS_FEAS)
            if bad:
                return LpResult(LpStatus.INFEASIBLE, infeasibility=abs(rhs))
            continue
        rows.append((idx, val, r.sense, rhs))

    nf = len(free_cols)
    m = len(rows)
    n_slack = sum(1 for r in rows if r[2] != "=")
    N = nf + n_slack + m
    A = np.zeros((m, N))
    b = np.zeros(m)
    lo_w = np.zeros(N)
    hi_w = np.full(N, np.inf)
    lo_w[:nf] = lo[free_cols]
    hi_w[:nf] = hi[free_cols]
    slack_of = -np.ones(m, dtype=np.int64)
    s = nf
    for i, (idx, val, sense, rhs) in enumerate(rows):
        np.add.at(A[i], idx, val)
        b[i] = rhs
        if sense != "=":
            A[i, s] = -1.0 if sense == ">=" else 1.0
            slack_of[i] = s
            s += 1

    x = np.zeros(N)
    x[:nf] = lo_w[:nf]
    resid = b - A[:, : nf + n_slack] @ x[: nf + n_slack]
    basis = []
    art0 = nf + n_slack
    artificial = np.zeros(N, dtype=bool)
    artificial[art0:] = True
    for i in range(m):
        sl = slack_of[i]
        if sl >= 0 and resid[i] * A[i, sl] >= 0:
            x[sl] = resid[i] / A[i, sl]
            basis.append(sl)
            # artificial for this row stays nonbasic and pinned to zero
            A[i, art0 + i] = 1.0
            hi_w[art0 + i] = 0.0
        else:
            sign = 1.0 if resid[i] >= 0 else -1.0
            A[i, art0 + i] = sign
            x[art0 + i] = abs(resid[i])
            basis.append(art0 + i)

    it = 0
    if m:
        spx = _Simplex(A, b, lo_w, hi_w, basis, x, max_iter)
        c1 = artificial.astype(float)
        st = spx.run(c1)
        it = spx.iterations
        if st == LpStatus.ITERATION_LIMIT:
            return LpResult(st, iterations=it)
        infeas = float(x[artificial].sum())
        if infeas > EPS_FEAS * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LpResult(LpStatus.INFEASIBLE, iterations=it, infeasibility=infeas)
        hi_w[artificial] = 0.0
        x[artificial] = 0.0
        spx.drive_out(artificial)
        c2 = np.zeros(N)
        c2[:nf] = p.c[free_cols]
        st = spx.run(c2)
        it = spx.iterations
        if st != LpStatus.OPTIMAL:
            return LpResult(st, iterations=it)
        spx.refactor()
    else:
        # no rows: each column moves to its cheaper bound
        c = p.c[free_cols]
        if np.any((c < 0) & np.isinf(hi_w[:nf])):
            return LpResult(LpStatus.UNBOUNDED)
        x[:nf] = np.where(c < 0, hi_w[:nf], lo_w[:nf])

    x_out[free_cols] = np.clip(x[:nf], lo_w[:nf], hi_w[:nf])
    obj = float(p.c @ x_out) + p.offset
    return LpResult(LpStatus.OPTIMAL, obj, x_out, it)


def _highs_solve(p: LpProblem) -> LpResult:
    from scipy.optimize import linprog

    A = p.dense()
    eq = [i for i, r in enumerate(p.rows) if r.sense == "="]
    ub_rows, ub_rhs = [], []
    for i, r in enumerate(p.rows):
        if r.sense == "<=":
            ub_rows.append(A[i])
            ub_rhs.append(r.rhs)
        elif r.sense == ">=":
            ub_rows.append(-A[i])
            ub_rhs.append(-r.rhs)
    res = linprog(
        p.c,
        A_ub=np.array(ub_rows) if ub_rows else None,
        b_ub=np.array(ub_rhs) if ub_rhs else None,
        A_eq=A[eq] if eq else None,
        b_eq=np.array([p.rows[i].rhs for i in eq]) if eq else None,
        bounds=list(zip(p.lo, [None if np.isinf(h) else h for h in p.hi])),
        method="highs-ds",
    )
    if res.status == 0:
        x = np.clip(res.x, p.lo, p.hi)
        return LpResult(LpStatus.OPTIMAL, float(p.c @ x) + p.offset, x, int(res.nit))
    if res.status == 2:
        return LpResult(LpStatus.INFEASIBLE, iterations=int(res.nit), infeasibility=float("nan"))
    if res.status == 3:
        return LpResult(LpStatus.UNBOUNDED, iterations=int(res.nit))
    return LpResult(LpStatus.ITERATION_LIMIT, iterations=int(res.nit))


ENGINES = ("simplex", "highs")


def solve_lp(p: LpProblem, engine: str = "simplex", max_iter: int = 100_000) -> LpResult:
    """Minimise ``c x + offset`` subject to the rows and bounds of ``p``."""
    if engine == "simplex":
        return _simplex_solve(p, max_iter)
    if engine == "highs":
        return _highs_solve(p)
    raise ValueError(f"unknown LP engine {engine!r}; choose from {ENGINES}")


def is_integral(x: Sequence[float], tol: float = EPS_INT, mask=None) -> tuple[bool, list[int]]:
    """Integrality test; offenders are sorted by distance to the nearest integer, largest first."""
    x = np.asarray(x, dtype=float)
    dist = np.abs(x - np.round(x))
    if mask is not None:
        dist = np.where(mask, dist, 0.0)
    bad = np.nonzero(dist > tol)[0]
    order = sorted(bad.tolist(), key=lambda j: (-dist[j], j))
    return not order, order
