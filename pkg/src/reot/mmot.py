"""Discrete multi-marginal transport for two-line treaties.

Given a joint claim law on an ``N1 x N2`` grid and target laws for the two
retained amounts, find the coupling ``P[i, j, k, l]`` minimizing
``E[(X1 - Y1 + X2 - Y2)^2]`` subject to the claim marginal, both target
marginals and ``Y1 <= X1``, ``Y2 <= X2``.  Cells violating the support
constraint are dropped before the LP is built, so every surviving column
has exactly three unit entries: one per marginal block.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .dist import (DEFAULT_TAIL_QUANTILE, DiscreteDistribution, JointDistribution, discretize,
                   standard_lognormal, standard_pareto, pushforward, pushforward_index, round_sig)
from .errors import InfeasibleError, ReotError, StructuralError
from .lp import LPOptions, LPSolution, OPTIMAL, StandardFormLP, check_kkt, solve_lp
from .measures import RiskReport, mean_variance, reinsured_sum_law
from .treaty import DiscreteTreaty, check_feasible


class MarginalStructure:
    """Implicit pricing for three-block marginal columns.

    ``A.T @ y`` is ``y[r_mu] + y[r_1] + y[r_2]``.  Reduced costs can also be
    formed on the full ``(K2, K1, N2, N1)`` cell array by broadcasting the
    three dual blocks, which is faster than gathering; deleted cells hold
    ``+inf`` there.
    """

    def __init__(self, r_mu, r_1, r_2, shape, dense_position, cost):
        self.r_mu = r_mu
        self.r_1 = r_1
        self.r_2 = r_2
        self.shape = shape  # (N1, N2, K1, K2)
        self.dense_position = dense_position
        n1, n2, k1, k2 = shape
        self._cost = np.full((k2, k1, n2, n1), np.inf)
        self._cost.ravel()[dense_position] = cost
        self._zero = np.where(np.isinf(self._cost), np.inf, 0.0)

    def dot_columns(self, y, start=0, stop=None):
        s = slice(start, stop)
        return y[self.r_mu[s]] + y[self.r_1[s]] + y[self.r_2[s]]

    def take(self, y, cols):
        return y[self.r_mu[cols]] + y[self.r_1[cols]] + y[self.r_2[cols]]

    def reduced_costs_dense(self, y, phase_one=False):
        n1, n2, k1, _ = self.shape
        u = y[: n1 * n2].reshape(n2, n1)
        v = y[n1 * n2: n1 * n2 + k1]
        w = y[n1 * n2 + k1:]
        d = (self._zero if phase_one else self._cost) - u[None, None]
        d -= v[None, :, None, None]
        d -= w[:, None, None, None]
        return d.ravel()


@dataclass
class MmotProblem:
    mu: JointDistribution
    nu1: DiscreteDistribution
    nu2: DiscreteDistribution
    cols: np.ndarray = field(repr=False)  # (K, 4) surviving (i, j, k, l), ascending flat index
    lp: StandardFormLP = field(repr=False)

    @property
    def shape(self) -> tuple:
        return (self.mu.grids[0].size, self.mu.grids[1].size, self.nu1.support.size, self.nu2.support.size)

    @property
    def num_columns(self) -> int:
        return self.cols.shape[0]

    @property
    def deleted(self) -> int:
        return int(np.prod(self.shape)) - self.num_columns

    def flat_index(self) -> np.ndarray:
        """0-based ``i + N1 j + N1 N2 k + N1 N2 K1 l`` of each surviving column."""
        n1, n2, k1, _ = self.shape
        i, j, k, l = self.cols.T
        return i + n1 * j + n1 * n2 * k + n1 * n2 * k1 * l

    def fixed_mean(self) -> float:
        """``E[X1 + X2 - Y1 - Y2]``, the same for every feasible coupling."""
        return (self.mu.marginal(0).mean + self.mu.marginal(1).mean - self.nu1.mean - self.nu2.mean)


def assemble(mu: JointDistribution, nu1: DiscreteDistribution, nu2: DiscreteDistribution) -> MmotProblem:
    """Build the standard-form LP.

    Rows: claim cells ``i + N1 j`` first, then the ``K1`` atoms of ``nu1``,
    then the ``K2`` atoms of ``nu2``.
    """
    if mu.n != 2:
        raise StructuralError("the multi-marginal problem couples exactly two lines")
    for name, m in (("claim law", mu.mass.sum()), ("nu1", nu1.mass.sum()), ("nu2", nu2.mass.sum())):
        if abs(m - 1.0) > 1e-10:
            raise InfeasibleError(f"{name} total mass {m!r} differs from 1")
    x1, x2 = mu.grids
    y1, y2 = nu1.support, nu2.support
    n1, n2, k1, k2 = x1.size, x2.size, y1.size, y2.size
    ok1 = y1[None, :] <= x1[:, None]  # (i, k)
    ok2 = y2[None, :] <= x2[:, None]  # (j, l)
    # nonzero on an (l, k, j, i) mask enumerates columns by ascending flat index
    mask = ok2.T[:, None, :, None] & ok1.T[None, :, None, :]
    l, k, j, i = (a.astype(np.int64) for a in np.nonzero(mask))
    n_rows = n1 * n2 + k1 + k2
    r_mu = i + n1 * j
    r_1 = n1 * n2 + k
    r_2 = n1 * n2 + k1 + l
    counts = np.bincount(np.concatenate([r_mu, r_1, r_2]), minlength=n_rows)
    if np.any(counts == 0):
        row = int(np.flatnonzero(counts == 0)[0])
        raise StructuralError(f"constraint row {row} ({_row_label(row, n1, n2, k1)}) has no admissible column")
    K = i.size
    cost = (x1[i] - y1[k] + x2[j] - y2[l]) ** 2
    indices = np.stack([r_mu, r_1, r_2], axis=1).ravel()
    A = sp.csc_matrix((np.ones(3 * K), indices, np.arange(0, 3 * K + 1, 3)), shape=(n_rows, K))
    rhs = np.concatenate([mu.mass.ravel(order="F"), nu1.mass, nu2.mass])
    flat = i + n1 * j + n1 * n2 * k + n1 * n2 * k1 * l
    structure = MarginalStructure(r_mu, r_1, r_2, (n1, n2, k1, k2), flat, cost)
    lp = StandardFormLP(cost, A, rhs, structure)
    return MmotProblem(mu, nu1, nu2, np.stack([i, j, k, l], axis=1), lp)


def _row_label(row, n1, n2, k1):
    if row < n1 * n2:
        return f"claim cell i={row % n1}, j={row // n1}"
    if row < n1 * n2 + k1:
        return f"first target atom k={row - n1 * n2}"
    return f"second target atom l={row - n1 * n2 - k1}"


def count_deletions(mu: JointDistribution, nu1: DiscreteDistribution, nu2: DiscreteDistribution) -> int:
    """Deleted cells by explicit double loops (independent of :func:`assemble`)."""
    x1, x2 = mu.grids
    bad1 = sum(1 for a in x1 for b in nu1.support if b > a)
    bad2 = sum(1 for a in x2 for b in nu2.support if b > a)
    n1, n2, k1, k2 = x1.size, x2.size, nu1.support.size, nu2.support.size
    good1 = n1 * k1 - bad1
    good2 = n2 * k2 - bad2
    return n1 * n2 * k1 * k2 - good1 * good2


@dataclass
class MmotResult:
    treaty: DiscreteTreaty
    risk: RiskReport
    objective: float
    variance: float
    residuals: dict
    kkt: dict
    lp: LPSolution = field(repr=False)
    pricing_audit: float = 0.0

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "variance": self.variance,
            "reinsured_sum": self.risk.to_dict(),
            "residuals": self.residuals,
            "kkt": self.kkt,
            "lp_status": self.lp.status,
            "iterations": self.lp.iterations,
            "phase_one_iterations": self.lp.phase_one_iterations,
            "redundant_rows": list(self.lp.redundant_rows),
            "pricing_audit": self.pricing_audit,
            "atoms": self.treaty.num_atoms,
        }


def treaty_from_primal(p: MmotProblem, x: np.ndarray, min_mass: float = 0.0) -> DiscreteTreaty:
    keep = np.flatnonzero(x > min_mass)
    cols = p.cols[keep]
    return DiscreteTreaty(p.mu.grids, (p.nu1.support, p.nu2.support), cols[:, :2], cols[:, 2:],
                          x[keep], "retained")


def marginal_residuals(p: MmotProblem, t: DiscreteTreaty) -> dict:
    feas = check_feasible(t, p.mu)
    r1 = float(np.max(np.abs(t.y_marginal_mass(0) - p.nu1.mass)))
    r2 = float(np.max(np.abs(t.y_marginal_mass(1) - p.nu2.mass)))
    return {"claim": feas.marginal_residual, "nu1": r1, "nu2": r2,
            "support": feas.support_violation, "mass": feas.mass_defect}


def solve_mmot(p: MmotProblem, opts: Optional[LPOptions] = None, audit_columns: int = 10_000,
               seed: int = 42) -> MmotResult:
    """Solve the assembled problem; the treaty's second block holds retained amounts."""
    sol = solve_lp(p.lp, opts)
    if sol.status != OPTIMAL:
        raise _lp_failure(sol)
    x = sol.x
    t = treaty_from_primal(p, x)
    mean = p.fixed_mean()
    variance = sol.objective - mean * mean
    law = reinsured_sum_law(t)
    m, v = mean_variance(law)
    res = marginal_residuals(p, t)
    kkt = check_kkt(p.lp, sol).to_dict()
    audit = _audit_pricing(p, sol.duals, audit_columns, seed)
    return MmotResult(t, RiskReport(m, v), sol.objective, variance, res, kkt, sol, audit)


class LPFailure(ReotError):
    def __init__(self, sol: LPSolution):
        super().__init__(f"LP solve ended with status {sol.status}: {sol.message}")
        self.solution = sol


def _lp_failure(sol):
    if sol.status == "infeasible":
        return InfeasibleError(f"multi-marginal LP infeasible: {sol.message}")
    return LPFailure(sol)


def _audit_pricing(p: MmotProblem, y, n: int, seed: int) -> float:
    """Largest gap between implicit and explicit ``A.T @ y`` on random columns."""
    if y is None or p.num_columns == 0:
        return 0.0
    rng = np.random.Generator(np.random.Philox(seed))
    cols = np.sort(rng.choice(p.num_columns, size=min(n, p.num_columns), replace=False))
    explicit = p.lp.A[:, cols].T @ y
    implicit = p.lp.structure.take(y, cols)
    return float(np.max(np.abs(explicit - implicit)))


# deterministic reference treaty -------------------------------------------------------

def eta_det(mu: JointDistribution, map1: Callable, map2: Callable,
            nu1: Optional[DiscreteDistribution] = None,
            nu2: Optional[DiscreteDistribution] = None) -> DiscreteTreaty:
    """Deterministic treaty retaining ``(map1(X1), map2(X2))``.

    Target grids default to the pushforwards of the claim marginals, which is
    how the multi-marginal targets are built.
    """
    m1, m2 = mu.marginal(0), mu.marginal(1)
    nu1 = nu1 or pushforward(m1, map1)
    nu2 = nu2 or pushforward(m2, map2)
    for name, grid, f in (("first", mu.grids[0], map1), ("second", mu.grids[1], map2)):
        fx = np.asarray(f(grid), dtype=float)
        if np.any(fx > grid) or np.any(fx < 0):
            raise StructuralError(f"{name} map leaves [0, x] on the claim grid")
    k = pushforward_index(m1, map1, nu1)
    l = pushforward_index(m2, map2, nu2)
    nz = np.argwhere(mu.mass > 0)
    return DiscreteTreaty(mu.grids, (nu1.support, nu2.support), nz,
                          np.stack([k[nz[:, 0]], l[nz[:, 1]]], axis=1), mu.mass[tuple(nz.T)], "retained")


# the two-line experiment ---------------------------------------------------------------

def half_map(x):
    return 0.5 * np.asarray(x, dtype=float)


def capped_layer_map(x):
    x = np.asarray(x, dtype=float)
    return np.minimum(x, 0.5) + 0.25 * np.maximum(x - 0.95, 0.0)


MAPS = {"half": half_map, "capped_layer": capped_layer_map}


def map_from_spec(spec) -> Callable:
    """Retention map from a JSON spec.

    Accepted: ``"half"``, ``"capped_layer"``, ``{"kind": "proportional", "factor": a}``,
    ``{"kind": "layer", "cap": u, "excess_from": e, "excess_share": s}`` meaning
    ``min(x, u) + s (x - e)_+``.
    """
    if isinstance(spec, str):
        try:
            return MAPS[spec]
        except KeyError:
            raise StructuralError(f"unknown map {spec!r}") from None
    kind = spec.get("kind")
    if kind == "proportional":
        a = float(spec["factor"])
        return lambda x: a * np.asarray(x, dtype=float)
    if kind == "layer":
        u, e, s = float(spec["cap"]), float(spec["excess_from"]), float(spec["excess_share"])
        return lambda x: np.minimum(np.asarray(x, float), u) + s * np.maximum(np.asarray(x, float) - e, 0.0)
    if kind == "identity":
        return lambda x: np.asarray(x, dtype=float)
    raise StructuralError(f"unknown map kind {kind!r}")


@dataclass
class Experiment:
    problem: MmotProblem
    det: DiscreteTreaty
    var_det: float


def two_line_experiment(bins: int = 40, tail_quantile: float = DEFAULT_TAIL_QUANTILE,
                        dists=None, maps=(half_map, capped_layer_map)) -> Experiment:
    """Lognormal and shifted-Pareto lines, independent, with the two default retention maps."""
    d1, d2 = dists or (standard_lognormal(), standard_pareto())
    g1 = discretize(d1, bins, tail_quantile)
    g2 = discretize(d2, bins, tail_quantile)
    mu = JointDistribution.product(g1, g2)
    nu1 = pushforward(g1, maps[0])
    nu2 = pushforward(g2, maps[1])
    det = eta_det(mu, maps[0], maps[1], nu1, nu2)
    _, var_det = mean_variance(reinsured_sum_law(det))
    return Experiment(assemble(mu, nu1, nu2), det, var_det)


# figure data -----------------------------------------------------------------------------

@dataclass
class PmfTable:
    name: str
    rows: np.ndarray
    cols: np.ndarray
    mass: np.ndarray

    def to_csv(self, path=None) -> str:
        lines = ["row\\col," + ",".join(repr(float(c)) for c in self.cols)]
        for r, row in zip(self.rows, self.mass):
            lines.append(repr(float(r)) + "," + ",".join(repr(float(v)) for v in row))
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def _axis(values):
    keys = round_sig(values)
    uniq, inv = np.unique(keys, return_inverse=True)
    grid = np.full(uniq.size, np.inf)
    np.minimum.at(grid, inv, values)
    return grid, inv.ravel()


def _pmf(name, a, b, mass):
    ga, ia = _axis(a)
    gb, ib = _axis(b)
    m = np.zeros((ga.size, gb.size))
    np.add.at(m, (ia, ib), mass)
    return PmfTable(name, ga, gb, m)


def marginal_reports(t: DiscreteTreaty, tol: float = 1e-14) -> dict:
    """Bivariate pmfs for the figure panels plus conditional-support counts.

    Keys: ``X1_Y1``, ``X2_Y2``, ``X1_Y2``, ``X2_Y1``, ``Y1_Y2``, ``R1_R2`` and
    ``support_counts`` (an ``N1 x N2`` table counting the ``(y1, y2)`` atoms of
    the conditional law given each claim cell).  ``Y`` is the retained amount
    and ``R`` the reinsured one whatever the treaty orientation.
    """
    if t.n != 2:
        raise StructuralError("figure tables are defined for two lines")
    x = t.x_values()
    y = t.retained_values()
    r = t.reinsured_values()
    m = t.mass
    out = {
        "X1_Y1": _pmf("X1_Y1", x[:, 0], y[:, 0], m),
        "X2_Y2": _pmf("X2_Y2", x[:, 1], y[:, 1], m),
        "X1_Y2": _pmf("X1_Y2", x[:, 0], y[:, 1], m),
        "X2_Y1": _pmf("X2_Y1", x[:, 1], y[:, 0], m),
        "Y1_Y2": _pmf("Y1_Y2", y[:, 0], y[:, 1], m),
        "R1_R2": _pmf("R1_R2", r[:, 0], r[:, 1], m),
    }
    counts = np.zeros((t.x_grids[0].size, t.x_grids[1].size), dtype=np.int64)
    live = m > tol
    cell = t.x_index[live]
    pairs = np.unique(np.concatenate([cell, t.y_index[live]], axis=1), axis=0)
    np.add.at(counts, (pairs[:, 0], pairs[:, 1]), 1)
    out["support_counts"] = PmfTable("support_counts", t.x_grids[0], t.x_grids[1], counts)
    return out


def off_diagonal_fraction(table: PmfTable) -> float:
    """Total-variation distance between a pmf table and the comonotone coupling of its margins."""
    total = table.mass.sum()
    a = table.mass.sum(axis=1) / total
    b = table.mass.sum(axis=0) / total
    ref = np.zeros_like(table.mass, dtype=float)
    i = k = 0
    while i < a.size and k < b.size:
        q = min(a[i], b[k])
        ref[i, k] += q
        a[i] -= q
        b[k] -= q
        if a[i] <= 1e-15:
            i += 1
        if k < b.size and b[k] <= 1e-15:
            k += 1
    return float(0.5 * np.abs(table.mass / total - ref).sum())
