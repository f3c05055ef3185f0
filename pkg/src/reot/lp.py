"""Standard-form linear programs and a two-phase revised simplex solver.

Problems are ``minimize c @ x  subject to  A @ x = b,  x >= 0`` with ``A``
held as a sparse column store.  The solver keeps a dense LU factorization of
the basis plus a product-form (eta) file of rank-one updates and refactors
periodically.  Problems with millions of columns are handled by pricing
(full vectorized scans, or a partial-pricing candidate pool) without ever
building dense data over the columns.

Rank-deficient constraint systems are supported: artificial variables of
dependent rows stay basic at zero after phase one and are treated as fixed
variables in phase two.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Protocol

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .errors import StructuralError

log = logging.getLogger(__name__)

_TIE_TOL = 1e-12

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"


class ColumnStructure(Protocol):
    """Implicit access to ``A.T @ y`` for structured column sets.

    A structure may also expose ``dense_position`` (ascending position of
    every column in a dense index space) and ``reduced_costs_dense(y,
    phase_one)``, returning reduced costs over that space with ``+inf`` on
    positions that hold no column.  Pricing then scans the dense array.
    """

    def dot_columns(self, y: np.ndarray, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
        ...


@dataclass
class StandardFormLP:
    cost: np.ndarray
    A: sp.csc_matrix
    rhs: np.ndarray
    structure: Optional[ColumnStructure] = None

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=float).ravel()
        self.rhs = np.asarray(self.rhs, dtype=float).ravel()
        A = sp.csc_matrix(self.A, dtype=float)
        A.sum_duplicates()
        A.eliminate_zeros()
        A.sort_indices()
        self.A = A
        m, n = A.shape
        if self.cost.size != n or self.rhs.size != m:
            raise StructuralError(f"shape mismatch: A is {A.shape}, cost {self.cost.size}, rhs {self.rhs.size}")
        if not np.all(np.isfinite(self.rhs)) or not np.all(np.isfinite(self.cost)):
            raise StructuralError("cost and rhs must be finite")
        if n and np.any(np.diff(A.indptr) == 0):
            empty = int(np.flatnonzero(np.diff(A.indptr) == 0)[0])
            raise StructuralError(f"column {empty} has no nonzero entries")

    @property
    def num_vars(self) -> int:
        return self.A.shape[1]

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    def dot_columns(self, y, start=0, stop=None):
        """``A[:, start:stop].T @ y``, through the structure descriptor when present."""
        if self.structure is not None:
            return self.structure.dot_columns(y, start, stop)
        stop = self.num_vars if stop is None else stop
        if start == 0 and stop == self.num_vars:
            return self.A.T @ y
        return self.A[:, start:stop].T @ y


@dataclass
class LPOptions:
    max_iters: int = 1_000_000
    feas_tol: float = 1e-9
    opt_tol: float = 1e-9
    pivot_tol: float = 1e-9
    refactor_every: int = 100
    bland_after: int = 50
    pricing: str = "auto"  # auto | full | partial
    pool_size: int = 2000
    threads: int = 1
    log_every: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "LPOptions":
        known = set(cls.__dataclass_fields__)
        bad = set(d) - known
        if bad:
            raise StructuralError(f"unknown LP options {sorted(bad)}")
        return cls(**d)


@dataclass
class LPSolution:
    status: str
    primal: Optional[sp.csr_matrix]
    objective: float
    duals: Optional[np.ndarray]
    basis: Optional[np.ndarray]
    iterations: int = 0
    phase_one_iterations: int = 0
    redundant_rows: tuple = ()
    message: str = ""
    pivots: list = field(default_factory=list, repr=False)

    @property
    def x(self) -> np.ndarray:
        """Dense primal vector."""
        return self.primal.toarray().ravel()


class _Basis:
    """Dense LU of the basis matrix plus an eta file."""

    def __init__(self, column_fn, rows: int):
        self.column_fn = column_fn
        self.m = rows
        self.etas: list[tuple[int, np.ndarray]] = []

    def factor(self, basis):
        B = np.zeros((self.m, self.m))
        for pos, var in enumerate(basis):
            idx, val = self.column_fn(var)
            B[idx, pos] = val
        self.lu = la.lu_factor(B, check_finite=False)
        self.etas = []

    def ftran(self, a):
        z = la.lu_solve(self.lu, a, check_finite=False)
        for r, alpha in self.etas:
            zr = z[r] / alpha[r]
            z -= zr * alpha
            z[r] = zr
        return z

    def btran(self, c):
        w = np.array(c, dtype=float)
        for r, alpha in reversed(self.etas):
            ar = alpha[r]
            w[r] = (w[r] - (alpha @ w - ar * w[r])) / ar
        return la.lu_solve(self.lu, w, trans=1, check_finite=False)

    def update(self, r, alpha):
        self.etas.append((r, alpha))


def _threads(opts: LPOptions) -> int:
    env = os.environ.get("REOT_THREADS")
    t = opts.threads
    if env:
        try:
            t = min(t, int(env)) if t > 1 else int(env)
        except ValueError:
            pass
    return max(1, t)


class _Pricer:
    def __init__(self, lp: StandardFormLP, opts: LPOptions):
        self.lp = lp
        self.n = lp.num_vars
        self.threads = _threads(opts)
        self.pool = None
        self.pool_A = None
        mode = opts.pricing
        if mode == "auto":
            mode = "full" if lp.structure is not None else "partial"
        if mode not in ("full", "partial"):
            raise StructuralError(f"unknown pricing mode {opts.pricing!r}")
        self.mode = mode
        self.pool_size = opts.pool_size
        self.full_scans = 0
        st = lp.structure
        self.dense = st is not None and hasattr(st, "reduced_costs_dense")
        self.dense_pos = np.asarray(st.dense_position) if self.dense else None

    def dense_select(self, ys, phase, basis, bland, tol):
        """Entering column from a dense implicit scan, or -1 at optimality."""
        d = self.dense_reduced(ys, phase, basis)
        if bland:
            neg = d < -tol
            k = int(np.argmax(neg))
            if not neg[k]:
                return -1
        else:
            k = int(np.argmin(d))
            if not d[k] < -tol:
                return -1
        return int(np.searchsorted(self.dense_pos, k))

    def dense_reduced(self, ys, phase, basis):
        """Reduced costs over the dense index space with basic columns zeroed."""
        self.full_scans += 1
        d = self.lp.structure.reduced_costs_dense(ys, phase == 1)
        real = basis[basis < self.n]
        d[self.dense_pos[real]] = 0.0
        return d

    def pool_reduced(self, ys, cost):
        st = self.lp.structure
        if st is not None and hasattr(st, "take"):
            return cost[self.pool] - st.take(ys, self.pool)
        return cost[self.pool] - self.pool_A.T @ ys

    def refresh_pool(self, ys, cost, phase, basis, is_basic, tol):
        """Rebuild the candidate pool from a full scan; returns the entering column or -1."""
        if self.dense:
            d = self.dense_reduced(ys, phase, basis)
            neg = np.flatnonzero(d < -tol)
            if neg.size == 0:
                return -1
            if neg.size > self.pool_size:
                part = np.argpartition(d[neg], self.pool_size - 1)[: self.pool_size]
                neg = np.sort(neg[part])
            vals = d[neg]
            cols = np.searchsorted(self.dense_pos, neg)
        else:
            dfull = self.full(ys, cost)
            dfull[is_basic[:self.n]] = 0.0
            cols = np.flatnonzero(dfull < -tol)
            if cols.size == 0:
                return -1
            if cols.size > self.pool_size:
                part = np.argpartition(dfull[cols], self.pool_size - 1)[: self.pool_size]
                cols = np.sort(cols[part])
            vals = dfull[cols]
        self.pool = cols
        self.pool_A = None if self.lp.structure is not None else self.lp.A[:, cols]
        return int(cols[int(np.argmin(vals))])

    def full(self, y, cost):
        self.full_scans += 1
        if self.threads == 1 or self.n < 200_000:
            return cost - self.lp.dot_columns(y)
        bounds = np.linspace(0, self.n, self.threads + 1).astype(int)
        with ThreadPoolExecutor(self.threads) as ex:
            parts = list(ex.map(lambda ab: self.lp.dot_columns(y, ab[0], ab[1]), zip(bounds[:-1], bounds[1:])))
        return cost - np.concatenate(parts)


def solve_lp(lp: StandardFormLP, opts: Optional[LPOptions] = None, record_pivots: bool = False) -> LPSolution:
    """Two-phase revised simplex.

    Pricing is Dantzig (most negative reduced cost, lowest index on ties);
    after ``bland_after`` consecutive degenerate pivots Bland's rule takes
    over until a pivot makes progress.
    """
    opts = opts or LPOptions()
    m, n = lp.num_rows, lp.num_vars
    A = lp.A
    sign = np.where(lp.rhs < 0, -1.0, 1.0)
    b = lp.rhs * sign
    indptr, indices, data = A.indptr, A.indices, A.data

    def column(var):
        if var < n:
            lo, hi = indptr[var], indptr[var + 1]
            rows = indices[lo:hi]
            return rows, data[lo:hi] * sign[rows]
        return np.array([var - n]), np.array([1.0])

    def dense_column(var):
        a = np.zeros(m)
        rows, vals = column(var)
        a[rows] = vals
        return a

    basis = np.arange(n, n + m)
    is_basic = np.zeros(n + m, dtype=bool)
    is_basic[basis] = True
    fac = _Basis(column, m)
    fac.factor(basis)
    xB = b.copy()
    pricer = _Pricer(lp, opts)
    pivots = [] if record_pivots else None
    it = 0

    def run_phase(phase):
        nonlocal xB, it
        if phase == 1:
            cost_real = np.zeros(n)
        else:
            cost_real = lp.cost
        ext_cost = np.concatenate([cost_real, np.full(m, 1.0 if phase == 1 else 0.0)])
        streak = 0
        pool_stale = True
        since_refactor = 0
        dfull = None

        while True:
            if it >= opts.max_iters:
                return ITERATION_LIMIT
            cB = ext_cost[basis]
            # sign-flipped rows: y_flipped relates to original duals by y = sign * y_flipped
            y = fac.btran(cB)
            ys = y * sign
            bland = streak >= opts.bland_after
            q = -1
            if pricer.mode == "partial" and not bland:
                if not pool_stale and pricer.pool is not None:
                    dp = pricer.pool_reduced(ys, cost_real)
                    dp[is_basic[pricer.pool]] = 0.0
                    k = int(np.argmin(dp))
                    if dp[k] < -opts.opt_tol:
                        q = int(pricer.pool[k])
                if q < 0:
                    q = pricer.refresh_pool(ys, cost_real, phase, basis, is_basic, opts.opt_tol)
                    if q < 0:
                        return OPTIMAL
                    pool_stale = False
            elif pricer.dense:
                q = pricer.dense_select(ys, phase, basis, bland, opts.opt_tol)
                if q < 0:
                    return OPTIMAL
            else:
                dfull = pricer.full(ys, cost_real)
                dfull[is_basic[:n]] = 0.0
                if bland:
                    neg = np.flatnonzero(dfull < -opts.opt_tol)
                    if neg.size == 0:
                        return OPTIMAL
                    q = int(neg[0])
                else:
                    q = int(np.argmin(dfull))
                    if dfull[q] >= -opts.opt_tol:
                        return OPTIMAL

            alpha = fac.ftran(dense_column(q))
            # ratio test; artificials basic in phase two are fixed at zero
            pos = alpha > opts.pivot_tol
            ratios = np.full(m, np.inf)
            ratios[pos] = np.maximum(xB[pos], 0.0) / alpha[pos]
            if phase == 2:
                fixed = (basis >= n) & (np.abs(alpha) > opts.pivot_tol)
                ratios[fixed] = 0.0
            theta = ratios.min()
            if not np.isfinite(theta):
                return UNBOUNDED
            ties = np.flatnonzero(ratios <= theta + _TIE_TOL)
            if bland:
                r = int(ties[np.argmin(basis[ties])])
            else:
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            theta = ratios[r]

            xB = xB - theta * alpha
            xB[r] = theta
            is_basic[basis[r]] = False
            basis[r] = q
            is_basic[q] = True
            fac.update(r, alpha)
            if pivots is not None:
                pivots.append((q, r))
            it += 1
            since_refactor += 1
            streak = streak + 1 if theta <= opts.feas_tol else 0
            if since_refactor >= opts.refactor_every:
                fac.factor(basis)
                xB = fac.ftran(b)
                xB[np.abs(xB) < 1e-15] = 0.0
                since_refactor = 0
            if opts.log_every and it % opts.log_every == 0:
                art = xB[basis >= n].sum()
                log.info("phase %d it %d theta %.3g artificial %.3g streak %d", phase, it, theta, art, streak)

    status = run_phase(1)
    phase1_iters = it
    if status != OPTIMAL:
        return LPSolution(status, None, np.nan, None, basis.copy(), it, phase1_iters, message="phase one stopped early")
    fac.factor(basis)
    xB = fac.ftran(b)
    infeas = float(np.sum(xB[basis >= n]))
    if infeas > max(opts.feas_tol * m, 1e-8):
        return LPSolution(INFEASIBLE, None, np.nan, None, basis.copy(), it, phase1_iters,
                          message=f"phase one residual {infeas:.3e}")

    status = run_phase(2)
    fac.factor(basis)
    xB = fac.ftran(b)
    cB = np.array([0.0 if v >= n else lp.cost[v] for v in basis])
    y = fac.btran(cB) * sign
    real = basis < n
    vals = np.maximum(xB[real], 0.0)
    primal = sp.csr_matrix((vals, (np.zeros(int(real.sum()), dtype=int), basis[real])), shape=(1, n))
    redundant = tuple(int(v - n) for v in basis[~real])
    obj = float(lp.cost[basis[real]] @ vals)
    return LPSolution(status, primal, obj if status == OPTIMAL else np.nan, y, basis.copy(), it, phase1_iters,
                      redundant_rows=redundant, message=f"{pricer.full_scans} full pricing scans",
                      pivots=pivots or [])


@dataclass
class KKTReport:
    primal_residual: float
    primal_infeasibility: float
    dual_infeasibility: float
    complementarity: float
    basic_reduced_cost: float

    def passed(self, tol: float = 1e-8) -> bool:
        return max(self.primal_residual, self.primal_infeasibility,
                   self.dual_infeasibility, self.complementarity) <= tol

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def check_kkt(lp: StandardFormLP, sol: LPSolution, tol: float = 1e-8, x=None, duals=None) -> KKTReport:
    """Primal residual, sign violation, dual infeasibility and complementarity gap.

    ``x``/``duals`` override the solution's vectors (used to audit perturbed points).
    """
    x = sol.x if x is None else np.asarray(x, dtype=float)
    y = sol.duals if duals is None else np.asarray(duals, dtype=float)
    resid = float(np.max(np.abs(lp.A @ x - lp.rhs))) if lp.num_rows else 0.0
    neg = float(max(0.0, -x.min())) if x.size else 0.0
    d = lp.cost - lp.dot_columns(y)
    dual_inf = float(max(0.0, -d.min())) if d.size else 0.0
    comp = float(np.max(np.abs(x * d))) if d.size else 0.0
    real = sol.basis[sol.basis < lp.num_vars] if sol.basis is not None else np.array([], int)
    basic_rc = float(np.max(np.abs(d[real]))) if real.size else 0.0
    return KKTReport(resid, neg, dual_inf, comp, basic_rc)


# --- MPS -------------------------------------------------------------------

def _row_name(i: int) -> str:
    return f"R{i + 1:04d}"


def _col_name(j: int) -> str:
    return f"X{j + 1:07d}"


def export_mps(lp: StandardFormLP, destination, name: str = "REOT") -> Path:
    """Write ``lp`` as fixed-format MPS.

    Numbers are written with full round-trip precision, so numeric fields
    may run past the classic 12-character columns.
    """
    path = Path(destination)
    A = lp.A
    lines = [f"NAME          {name}", "ROWS", " N  COST"]
    lines += [f" E  {_row_name(i)}" for i in range(lp.num_rows)]
    lines.append("COLUMNS")
    for j in range(lp.num_vars):
        cn = _col_name(j)
        if lp.cost[j] != 0:
            lines.append(f"    {cn:<8}  {'COST':<8}  {float(lp.cost[j])!r}")
        for k in range(A.indptr[j], A.indptr[j + 1]):
            lines.append(f"    {cn:<8}  {_row_name(int(A.indices[k])):<8}  {float(A.data[k])!r}")
    lines.append("RHS")
    for i in np.flatnonzero(lp.rhs):
        lines.append(f"    {'RHS':<8}  {_row_name(int(i)):<8}  {float(lp.rhs[i])!r}")
    lines.append("ENDATA")
    path.write_text("\n".join(lines) + "\n")
    return path


def read_mps(source) -> StandardFormLP:
    """Parse the MPS subset written by ``export_mps`` (equality rows, default bounds)."""
    section = None
    rows: dict[str, int] = {}
    obj_row = None
    cols: dict[str, int] = {}
    entries_r, entries_c, entries_v = [], [], []
    cost: dict[int, float] = {}
    rhs: dict[int, float] = {}
    for raw in Path(source).read_text().splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw[0].isspace():
            section = raw.split()[0]
            if section in ("RANGES", "BOUNDS"):
                raise StructuralError(f"MPS section {section} is not supported")
            continue
        tok = raw.split()
        if section == "ROWS":
            kind, rname = tok
            if kind == "N":
                obj_row = rname
            elif kind == "E":
                rows[rname] = len(rows)
            else:
                raise StructuralError(f"row type {kind} is not supported")
        elif section == "COLUMNS":
            cname = tok[0]
            j = cols.setdefault(cname, len(cols))
            for rname, val in zip(tok[1::2], tok[2::2]):
                if rname == obj_row:
                    cost[j] = float(val)
                else:
                    entries_r.append(rows[rname])
                    entries_c.append(j)
                    entries_v.append(float(val))
        elif section == "RHS":
            for rname, val in zip(tok[1::2], tok[2::2]):
                if rname != obj_row:
                    rhs[rows[rname]] = float(val)
    m, n = len(rows), len(cols)
    A = sp.csc_matrix((entries_v, (entries_r, entries_c)), shape=(m, n))
    c = np.zeros(n)
    for j, v in cost.items():
        c[j] = v
    b = np.zeros(m)
    for i, v in rhs.items():
        b[i] = v
    return StandardFormLP(c, A, b)
