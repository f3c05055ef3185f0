"""Independent checks: basis enumeration, seeded Monte Carlo, refinement sweeps.

Nothing here shares code paths with the solvers it audits beyond the
problem data structures.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .measures import RiskReport
from .quadrature import rng as philox

MAX_VARS = 20
MAX_ROWS = 10


@dataclass
class OracleReport:
    method: str
    values: dict
    candidate: Optional[float] = None
    seed: Optional[int] = None
    flags: list = field(default_factory=list)

    @property
    def value(self):
        return self.values.get("value")

    @property
    def discrepancy_abs(self) -> Optional[float]:
        if self.candidate is None or self.value is None:
            return None
        return abs(self.value - self.candidate)

    @property
    def discrepancy_rel(self) -> Optional[float]:
        d = self.discrepancy_abs
        if d is None:
            return None
        return d / max(abs(self.value), 1e-300)

    def to_dict(self) -> dict:
        return {"method": self.method, "values": self.values, "candidate": self.candidate,
                "discrepancy_abs": self.discrepancy_abs, "discrepancy_rel": self.discrepancy_rel,
                "seed": self.seed, "flags": self.flags}


class OracleRefusal(DomainError):
    pass


def brute_force_lp(lp, candidate: Optional[float] = None, tol: float = 1e-10) -> OracleReport:
    """Optimum of a small standard-form LP by enumerating every basis.

    An independent row set of ``A`` is chosen first (dependent rows are
    implied when the system is consistent); every column subset of that
    size is tried as a basis and the cheapest nonnegative basic solution
    satisfying all rows is returned.
    """
    A = lp.A.toarray()
    b = lp.rhs
    c = lp.cost
    m, n = A.shape
    if n > MAX_VARS or m > MAX_ROWS:
        raise OracleRefusal(f"basis enumeration limited to {MAX_VARS} variables and {MAX_ROWS} rows")
    rows = []
    for i in range(m):
        trial = rows + [i]
        if np.linalg.matrix_rank(A[trial]) == len(trial):
            rows = trial
    r = len(rows)
    Ar = A[rows]
    best = math.inf
    best_x = None
    count = 0
    for cols in itertools.combinations(range(n), r):
        B = Ar[:, cols]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        xB = np.linalg.solve(B, b[rows])
        count += 1
        if np.any(xB < -tol):
            continue
        x = np.zeros(n)
        x[list(cols)] = np.maximum(xB, 0.0)
        if np.max(np.abs(A @ x - b), initial=0.0) > 1e-9:
            continue
        val = float(c @ x)
        if val < best:
            best, best_x = val, x
    status = "optimal" if best_x is not None else "infeasible"
    values = {"value": best if best_x is not None else None, "status": status, "bases_tried": count,
              "rank": r}
    rep = OracleReport("basis_enumeration", values, candidate)
    rep.values["x"] = None if best_x is None else best_x.tolist()
    return rep


def mc_estimate(contract, dists: Sequence, n_samples: int = 10_000_000, seed: int = 42,
                alpha: Optional[float] = None, betas=None, batch: int = 1_000_000) -> OracleReport:
    """Sample moments of the reinsured and retained sums under ``contract``.

    Claims are drawn line by line in batches from a Philox stream seeded
    with ``seed``; identical arguments give bit-identical results.
    """
    if n_samples < 1:
        raise DomainError("n_samples must be at least 1")
    g = philox(seed)
    n = len(dists)
    ceded = np.empty(n_samples)
    kept = np.empty(n_samples)
    load = np.empty(n_samples) if (betas is not None or hasattr(contract, "betas")) else None
    b = None if load is None else np.asarray(betas if betas is not None else contract.betas, dtype=float)
    done = 0
    batch_means = []
    while done < n_samples:
        size = min(batch, n_samples - done)
        x = np.empty((size, n))
        for i, d in enumerate(dists):
            x[:, i] = d.sample(g, size)
        r = np.asarray(contract.reinsured(x))
        ceded[done:done + size] = r.sum(axis=1)
        kept[done:done + size] = x.sum(axis=1) - ceded[done:done + size]
        if load is not None:
            load[done:done + size] = r @ b
        done += size

    def rep(v):
        m = float(v.mean())
        var = float(v.var())
        out = RiskReport(m, var)
        if alpha is not None:
            s = np.sort(v)
            # smallest u with P(V > u) <= alpha
            k = int(math.ceil((1.0 - alpha) * v.size - 1e-9)) - 1
            out = RiskReport(m, var, float(s[max(k, 0)]), alpha)
        return out

    r_ceded, r_kept = rep(ceded), rep(kept)
    values = {
        "reinsured": r_ceded.to_dict(),
        "retained": r_kept.to_dict(),
        "n_samples": n_samples,
        "reinsured_mean_se": math.sqrt(r_ceded.variance / n_samples),
        "retained_mean_se": math.sqrt(r_kept.variance / n_samples),
        # standard error of the sample variance, from the fourth central moment
        "retained_variance_se": _variance_se(kept),
        "generator": "Philox4x64-10",
    }
    if load is not None:
        values["loading"] = float(load.mean())
        values["loading_se"] = float(load.std() / math.sqrt(n_samples))
        values["value"] = values["loading"]
    else:
        values["value"] = r_ceded.mean
    return OracleReport("monte_carlo", values, seed=seed)


def _variance_se(v: np.ndarray) -> float:
    m = v.mean()
    c = v - m
    m2 = float(np.mean(c * c))
    m4 = float(np.mean(c ** 4))
    return math.sqrt(max(m4 - m2 * m2, 0.0) / v.size)


def batch_mean_variance(values: np.ndarray, batches: int) -> float:
    """Variance across ``batches`` equal batch means (convergence-rate diagnostics)."""
    k = values.size // batches
    means = values[: k * batches].reshape(batches, k).mean(axis=1)
    return float(means.var(ddof=1))


def refinement_sweep(evaluate: Callable, params: Iterable, rel_tol: float = 0.05, abs_tol: float = 0.0,
                     label: str = "N") -> OracleReport:
    """Evaluate ``evaluate(p)`` over ``params`` and flag the sequence if it does not settle.

    The last two values must agree within ``max(abs_tol, rel_tol * |last|)``.
    """
    params = list(params)
    table = []
    for p in params:
        table.append({label: p, "value": float(evaluate(p))})
    vals = [row["value"] for row in table]
    flags = []
    changes = [abs(b - a) for a, b in zip(vals[:-1], vals[1:])]
    if len(vals) >= 2:
        bound = max(abs_tol, rel_tol * abs(vals[-1]))
        if changes[-1] > bound:
            flags.append(f"not stabilized: last change {changes[-1]:.3e} exceeds {bound:.3e}")
    return OracleReport("refinement", {"table": table, "changes": changes,
                                       "value": vals[-1] if vals else None}, flags=flags)


def sweep_to_csv(report: OracleReport, path=None) -> str:
    rows = report.values["table"]
    if not rows:
        return ""
    keys = list(rows[0])
    lines = [",".join(keys)] + [",".join(repr(r[k]) for k in keys) for r in rows]
    text = "\n".join(lines) + "\n"
    if path is not None:
        from pathlib import Path
        Path(path).write_text(text)
    return text
