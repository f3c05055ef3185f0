"""Discrete treaties: joint laws of claims and ceded (or retained) amounts.

A treaty on ``n`` lines is a finite list of atoms
``(x-index tuple, y-index tuple, mass)`` over per-line grids.  Its first
block must reproduce the claim law, and every atom must satisfy
``0 <= y <= x`` componentwise.  The second block holds reinsured amounts
or, for the multi-marginal experiments, retained amounts; both obey the
same box constraint.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .dist import DiscreteDistribution, JointDistribution, round_sig
from .errors import DomainError, PreconditionError, StructuralError

ORIENTATIONS = ("reinsured", "retained")
FEASIBILITY_TOL = 1e-10
DOMINANCE_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteTreaty:
    x_grids: tuple
    y_grids: tuple
    x_index: np.ndarray = field(repr=False)
    y_index: np.ndarray = field(repr=False)
    mass: np.ndarray = field(repr=False)
    orientation: str = "reinsured"

    def __post_init__(self):
        xg = tuple(np.asarray(g, dtype=float).ravel() for g in self.x_grids)
        yg = tuple(np.asarray(g, dtype=float).ravel() for g in self.y_grids)
        xi = np.atleast_2d(np.asarray(self.x_index, dtype=np.int64))
        yi = np.atleast_2d(np.asarray(self.y_index, dtype=np.int64))
        mass = np.asarray(self.mass, dtype=float).ravel()
        n = len(xg)
        if len(yg) != n or xi.shape != (mass.size, n) or yi.shape != (mass.size, n):
            raise StructuralError("treaty grids, index arrays and masses have inconsistent shapes")
        for j in range(n):
            if mass.size and (xi[:, j].min() < 0 or xi[:, j].max() >= xg[j].size
                              or yi[:, j].min() < 0 or yi[:, j].max() >= yg[j].size):
                raise StructuralError(f"atom index out of range on line {j + 1}")
        if self.orientation not in ORIENTATIONS:
            raise DomainError(f"orientation must be one of {ORIENTATIONS}")
        object.__setattr__(self, "x_grids", xg)
        object.__setattr__(self, "y_grids", yg)
        object.__setattr__(self, "x_index", xi)
        object.__setattr__(self, "y_index", yi)
        object.__setattr__(self, "mass", mass)

    @property
    def n(self) -> int:
        return len(self.x_grids)

    @property
    def num_atoms(self) -> int:
        return self.mass.size

    def x_values(self) -> np.ndarray:
        return np.stack([g[self.x_index[:, j]] for j, g in enumerate(self.x_grids)], axis=1)

    def y_values(self) -> np.ndarray:
        return np.stack([g[self.y_index[:, j]] for j, g in enumerate(self.y_grids)], axis=1)

    def reinsured_values(self) -> np.ndarray:
        y = self.y_values()
        return y if self.orientation == "reinsured" else self.x_values() - y

    def retained_values(self) -> np.ndarray:
        y = self.y_values()
        return self.x_values() - y if self.orientation == "reinsured" else y

    def x_marginal(self) -> JointDistribution:
        """Joint claim law carried by the first block."""
        shape = tuple(g.size for g in self.x_grids)
        m = np.zeros(shape)
        np.add.at(m, tuple(self.x_index.T), self.mass)
        return JointDistribution(self.x_grids, m)

    def y_marginal(self, j: int) -> DiscreteDistribution:
        m = np.bincount(self.y_index[:, j], weights=self.mass, minlength=self.y_grids[j].size)
        keep = m > 0
        if keep.all():
            return DiscreteDistribution(self.y_grids[j], m)
        return DiscreteDistribution(self.y_grids[j][keep], m[keep])

    def y_marginal_mass(self, j: int) -> np.ndarray:
        return np.bincount(self.y_index[:, j], weights=self.mass, minlength=self.y_grids[j].size)

    def compress(self, min_mass: float = 0.0) -> "DiscreteTreaty":
        """Merge atoms sharing both index tuples and drop masses ``<= min_mass``."""
        keys = np.concatenate([self.x_index, self.y_index], axis=1)
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        mass = np.bincount(inv.ravel(), weights=self.mass, minlength=uniq.shape[0])
        keep = mass > min_mass
        n = self.n
        return DiscreteTreaty(self.x_grids, self.y_grids, uniq[keep, :n], uniq[keep, n:],
                              mass[keep], self.orientation)

    def with_orientation(self, orientation: str) -> "DiscreteTreaty":
        """Same coupling with the second block flipped between ceded and retained."""
        if orientation == self.orientation:
            return self
        x = self.x_values()
        other = x - self.y_values()
        grids, idx = [], []
        for j in range(self.n):
            keys = round_sig(other[:, j])
            uniq, inv = np.unique(keys, return_inverse=True)
            vals = np.full(uniq.size, np.inf)
            np.minimum.at(vals, inv, np.maximum(other[:, j], 0.0))
            grids.append(vals)
            idx.append(inv.ravel())
        return DiscreteTreaty(self.x_grids, tuple(grids), self.x_index, np.stack(idx, axis=1),
                              self.mass, orientation)

    # serialization -------------------------------------------------------

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = self.n
        w.writerow([f"i{j + 1}" for j in range(n)] + [f"k{j + 1}" for j in range(n)] + ["mass"])
        for xi, yi, m in zip(self.x_index, self.y_index, self.mass):
            w.writerow([int(v) for v in xi] + [int(v) for v in yi] + [repr(float(m))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def sidecar(self) -> dict:
        return {
            "n": self.n,
            "orientation": self.orientation,
            "x_grids": [g.tolist() for g in self.x_grids],
            "y_grids": [g.tolist() for g in self.y_grids],
        }

    def save(self, csv_path) -> tuple[Path, Path]:
        """Write the atom CSV and its JSON sidecar (same stem, ``.json``)."""
        csv_path = Path(csv_path)
        self.to_csv(csv_path)
        side = csv_path.with_suffix(".json")
        side.write_text(json.dumps(self.sidecar(), indent=2))
        return csv_path, side

    @classmethod
    def load(cls, csv_path, sidecar_path=None) -> "DiscreteTreaty":
        csv_path = Path(csv_path)
        side = json.loads(Path(sidecar_path or csv_path.with_suffix(".json")).read_text())
        rows = list(csv.reader(io.StringIO(csv_path.read_text())))
        n = int(side["n"])
        expected = [f"i{j + 1}" for j in range(n)] + [f"k{j + 1}" for j in range(n)] + ["mass"]
        if [c.strip() for c in rows[0]] != expected:
            raise StructuralError(f"treaty CSV header must be {','.join(expected)}")
        body = [r for r in rows[1:] if r]
        try:
            idx = np.array([[int(v) for v in r[: 2 * n]] for r in body], dtype=np.int64).reshape(-1, 2 * n)
            mass = np.array([float(r[2 * n]) for r in body])
        except (ValueError, IndexError) as exc:
            raise StructuralError(f"malformed treaty CSV: {exc}") from exc
        return cls(tuple(side["x_grids"]), tuple(side["y_grids"]), idx[:, :n], idx[:, n:], mass,
                   side["orientation"])


# construction helpers ------------------------------------------------------

def deterministic_treaty(mu: JointDistribution, reinsure: Callable,
                         orientation: str = "reinsured", min_mass: float = 0.0) -> DiscreteTreaty:
    """Treaty induced by a deterministic contract on a grid law.

    ``reinsure`` maps claim points of shape ``(K, n)`` to ceded amounts of the
    same shape.  With ``orientation="retained"`` the stored second block is
    ``x - reinsure(x)``.
    """
    nz = np.argwhere(mu.mass > min_mass)
    mass = mu.mass[tuple(nz.T)]
    x = np.stack([g[nz[:, j]] for j, g in enumerate(mu.grids)], axis=1)
    r = np.asarray(reinsure(x), dtype=float).reshape(x.shape)
    second = r if orientation == "reinsured" else x - r
    grids, idx = [], []
    for j in range(mu.n):
        col = second[:, j]
        keys = round_sig(col)
        uniq, inv = np.unique(keys, return_inverse=True)
        vals = np.full(uniq.size, np.inf)
        np.minimum.at(vals, inv, col)
        grids.append(vals)
        idx.append(inv.ravel())
    return DiscreteTreaty(mu.grids, tuple(grids), nz, np.stack(idx, axis=1), mass, orientation)


def no_reinsurance(mu: JointDistribution) -> DiscreteTreaty:
    return deterministic_treaty(mu, lambda x: np.zeros_like(x))


# checks ---------------------------------------------------------------------

@dataclass(frozen=True)
class FeasibilityReport:
    marginal_residual: float
    support_violation: float
    negative_mass: float
    mass_defect: float
    tol: float = FEASIBILITY_TOL
    worst_support_atom: Optional[int] = None

    @property
    def passed(self) -> bool:
        return max(self.marginal_residual, self.support_violation,
                   self.negative_mass, self.mass_defect) <= self.tol

    def violations(self) -> list[str]:
        out = []
        if self.marginal_residual > self.tol:
            out.append(f"claim marginal residual {self.marginal_residual:.3e}")
        if self.support_violation > self.tol:
            out.append(f"support violation {self.support_violation:.3e} at atom {self.worst_support_atom}")
        if self.negative_mass > self.tol:
            out.append(f"negative mass {self.negative_mass:.3e}")
        if self.mass_defect > self.tol:
            out.append(f"total mass defect {self.mass_defect:.3e}")
        return out

    def to_dict(self) -> dict:
        return {
            "marginal_residual": self.marginal_residual,
            "support_violation": self.support_violation,
            "negative_mass": self.negative_mass,
            "mass_defect": self.mass_defect,
            "tol": self.tol,
            "passed": self.passed,
            "violations": self.violations(),
        }


def check_feasible(t: DiscreteTreaty, mu: JointDistribution, tol: float = FEASIBILITY_TOL) -> FeasibilityReport:
    """Check the treaty conditions against the claim law ``mu``."""
    if mu.n != t.n or any(a.size != b.size for a, b in zip(mu.grids, t.x_grids)):
        raise StructuralError("claim law and treaty use different grid dimensions")
    if any(np.max(np.abs(a - b), initial=0.0) > tol * max(1.0, np.max(np.abs(a), initial=0.0))
           for a, b in zip(mu.grids, t.x_grids)):
        raise StructuralError("claim law and treaty grids disagree")
    shape = tuple(g.size for g in t.x_grids)
    got = np.zeros(shape)
    if t.num_atoms:
        np.add.at(got, tuple(t.x_index.T), t.mass)
    marg = float(np.max(np.abs(got - mu.mass)))
    x, y = t.x_values(), t.y_values()
    viol = np.maximum(y - x, 0.0).max(axis=1) if t.num_atoms else np.zeros(0)
    viol = np.maximum(viol, np.maximum(-y, 0.0).max(axis=1)) if t.num_atoms else viol
    worst = int(np.argmax(viol)) if viol.size else None
    return FeasibilityReport(
        marginal_residual=marg,
        support_violation=float(viol.max(initial=0.0)),
        negative_mass=float(np.maximum(-t.mass, 0.0).max(initial=0.0)),
        mass_defect=abs(float(t.mass.sum()) - 1.0),
        tol=tol,
        worst_support_atom=worst if viol.size and viol.max() > tol else None,
    )


@dataclass(frozen=True)
class DominanceVerdict:
    dominated: bool
    worst_gap: float
    worst_point: Optional[float] = None


def stochastic_dominance(nu: DiscreteDistribution, mu: DiscreteDistribution,
                         tol: float = DOMINANCE_TOL) -> DominanceVerdict:
    """Is ``nu`` first-order dominated by ``mu``, i.e. ``F_nu >= F_mu`` everywhere?

    Both cdfs are step functions, so comparing them on the merged support
    suffices.
    """
    pts = np.union1d(nu.support, mu.support)
    gap = np.asarray(mu.cdf(pts)) - np.asarray(nu.cdf(pts))
    k = int(np.argmax(gap))
    worst = float(gap[k])
    return DominanceVerdict(worst <= tol, worst, float(pts[k]))


def comonotone_map(mu: DiscreteDistribution, nu: DiscreteDistribution,
                   orientation: str = "reinsured") -> DiscreteTreaty:
    """Quantile coupling of ``mu`` and ``nu`` (northwest corner on sorted supports).

    Mass is matched in increasing order on both sides, splitting atoms where
    the cumulative masses interleave.  Requires ``nu`` dominated by ``mu`` so
    the coupling stays below the diagonal.
    """
    verdict = stochastic_dominance(nu, mu)
    if not verdict.dominated:
        raise PreconditionError(
            f"target law is not dominated: F_mu - F_nu = {verdict.worst_gap:.3e} at x = {verdict.worst_point!r}")
    a = mu.mass.astype(float).copy()
    b = nu.mass.astype(float).copy()
    # close the small gap between the two totals on the last atoms
    b[-1] += a.sum() - b.sum()
    xi, yi, mass = [], [], []
    i = k = 0
    while i < a.size and k < b.size:
        m = min(a[i], b[k])
        if m > 0:
            xi.append(i)
            yi.append(k)
            mass.append(m)
        a[i] -= m
        b[k] -= m
        if a[i] <= 1e-15 * max(1.0, m) and i < a.size:
            i += 1
        if k < b.size and b[k] <= 1e-15 * max(1.0, m):
            k += 1
    grids_y = nu.support
    return _one_line_treaty(mu.support, grids_y, xi, yi, mass, orientation)


def _one_line_treaty(xg, yg, xi, yi, mass, orientation):
    return DiscreteTreaty((xg,), (yg,), np.asarray(xi).reshape(-1, 1), np.asarray(yi).reshape(-1, 1),
                          np.asarray(mass, dtype=float), orientation)


def coupling_cost(t: DiscreteTreaty, cost: Callable) -> float:
    """``sum cost(x, y) * mass`` over the atoms."""
    return float(np.asarray(cost(t.x_values(), t.y_values())).reshape(-1) @ t.mass)


class QuantileRearrangement:
    """The map ``F_nu^{-1} o F_mu`` for discrete laws, evaluated on any point."""

    def __init__(self, mu: DiscreteDistribution, nu: DiscreteDistribution):
        self.mu = mu
        self.nu = nu
        self._cum_nu = np.cumsum(nu.mass)

    def __call__(self, x):
        p = np.asarray(self.mu.cdf(x), dtype=float)
        idx = np.searchsorted(self._cum_nu, p - 1e-13, side="left")
        out = self.nu.support[np.minimum(idx, self.nu.support.size - 1)]
        # below the first claim atom nothing is ceded
        return np.where(p <= 0.0, 0.0, out)


def rearrangement_contract(mu_marginals: Sequence[DiscreteDistribution],
                           nu_targets: Sequence[DiscreteDistribution]):
    """Componentwise deterministic contract ``R_i = F_{nu_i}^{-1} o F_{mu_i}``.

    Raises if some target is not dominated by its claim law, or if matching a
    target would require splitting a claim atom (then only a randomized
    coupling, see :func:`comonotone_map`, attains it).
    """
    from .contracts import Componentwise

    if len(mu_marginals) != len(nu_targets):
        raise StructuralError("need one target per line")
    maps = []
    for i, (mu, nu) in enumerate(zip(mu_marginals, nu_targets)):
        verdict = stochastic_dominance(nu, mu)
        if not verdict.dominated:
            raise PreconditionError(
                f"line {i + 1}: target not dominated (gap {verdict.worst_gap:.3e} at {verdict.worst_point!r})")
        g = QuantileRearrangement(mu, nu)
        image = g(mu.support)
        pushed = np.zeros(nu.support.size)
        idx = np.searchsorted(nu.support, image)
        np.add.at(pushed, idx, mu.mass)
        if np.max(np.abs(pushed - nu.mass)) > 1e-12:
            raise PreconditionError(
                f"line {i + 1}: target needs a split claim atom; no deterministic rearrangement reproduces it")
        maps.append(g)
    return Componentwise(tuple(maps))


def validate_support_condition(t: DiscreteTreaty, p: Callable, g: Callable, r_star: float,
                               lambda_star, tol: float = 1e-6, candidates=None,
                               chunk: int = 2_000_000) -> bool:
    """Check that every atom minimizes ``r* p(x, .) + lambda* . g(x, .)`` over ``[0, x]``.

    ``p(x, y)`` and ``g(x, y)`` take arrays of shape ``(..., n)`` and return
    ``(...)`` (``g`` may return ``(..., m)`` for ``m`` constraints).  The
    minimum runs over the product of per-line candidate values lying in
    ``[0, x_j]``; candidates default to the treaty's second-block grids, and
    ``0`` and ``x_j`` are always included.  An integer ``candidates`` adds
    that many equispaced points of ``[0, x_j]`` per atom.
    """
    return support_condition_gap(t, p, g, r_star, lambda_star, candidates, chunk) <= tol


def support_condition_gap(t, p, g, r_star, lambda_star, candidates=None, chunk=2_000_000) -> float:
    """Largest excess of an atom's value over the candidate minimum."""
    lam = np.atleast_1d(np.asarray(lambda_star, dtype=float))

    def h(x, y):
        gv = np.asarray(g(x, y), dtype=float)
        if gv.ndim == x.ndim - 1:
            gv = gv[..., None]
        return r_star * np.asarray(p(x, y), dtype=float) + gv @ lam

    x = t.x_values()
    y = t.y_values()
    n = t.n
    base = t.y_grids if candidates is None or isinstance(candidates, (int, np.integer)) else candidates
    k_lin = int(candidates) if isinstance(candidates, (int, np.integer)) else 0
    worst = -np.inf
    for a in range(t.num_atoms):
        xa = x[a]
        axes = []
        for j in range(n):
            c = np.asarray(base[j], dtype=float)
            c = c[(c >= 0) & (c <= xa[j])]
            extra = [0.0, xa[j]]
            if k_lin:
                extra.extend(np.linspace(0.0, xa[j], k_lin))
            axes.append(np.unique(np.concatenate([c, extra])))
        size = int(np.prod([ax.size for ax in axes]))
        mesh = np.meshgrid(*axes, indexing="ij")
        cand = np.stack([m.ravel() for m in mesh], axis=1)
        best = np.inf
        for s in range(0, size, chunk):
            block = cand[s:s + chunk]
            best = min(best, float(np.min(h(np.broadcast_to(xa, block.shape), block))))
        val = float(h(xa[None, :], y[a][None, :])[0])
        worst = max(worst, val - best)
    return float(worst)
