"""Parametric claim distributions and their discretization onto finite grids.

Continuous laws live on the nonnegative half-line and expose ``cdf``,
``sf``, ``quantile`` and closed-form ``moments``.  ``discretize`` bins a law
into ``N`` equal-width cells up to a high quantile and folds the tail into
the last cell; ``pushforward`` maps a discrete law through a function and
merges atoms that collide.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import DomainError, InfiniteMomentError, StructuralError

#: default tail quantile for ``discretize``
DEFAULT_TAIL_QUANTILE = 0.999

_QUANTILE_ATOL = 1e-12
_MASS_ATOL = 1e-12


def _check_prob(p):
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 0.0)) or np.any(~(p < 1.0)):
        raise DomainError(f"probability must lie strictly inside (0, 1), got {p}")
    return p


class ContinuousDistribution:
    """Base class for laws on [0, inf) with a continuous cdf."""

    family: str = ""

    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def moments(self) -> tuple[float, float]:
        raise NotImplementedError

    @property
    def mean(self) -> float:
        return self.moments()[0]

    @property
    def variance(self) -> float:
        return self.moments()[1]

    def quantile(self, p):
        """Lower quantile ``inf{x : cdf(x) >= p}`` for ``0 < p < 1``."""
        p = _check_prob(p)
        return self._bisect_quantile(p)

    def _bisect_quantile(self, p):
        # cdf(lo) < p <= cdf(hi) is kept throughout; hi is returned.
        p = np.atleast_1d(p).astype(float)
        lo = np.zeros_like(p)
        hi = np.ones_like(p)
        while np.any(self.cdf(hi) < p):
            short = self.cdf(hi) < p
            lo = np.where(short, hi, lo)
            hi = np.where(short, 2.0 * hi, hi)
        for _ in range(400):
            if np.all(hi - lo <= _QUANTILE_ATOL):
                break
            mid = 0.5 * (lo + hi)
            up = self.cdf(mid) >= p
            hi = np.where(up, mid, hi)
            lo = np.where(up, lo, mid)
        return hi if hi.size > 1 else float(hi[0])

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        """Inverse-transform sampling."""
        u = rng.random(size)
        u = np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)
        return np.asarray(self.quantile(u), dtype=float)

    def to_spec(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Gamma(ContinuousDistribution):
    """Gamma law with ``shape`` and ``rate`` (mean ``shape / rate``)."""

    shape: float
    rate: float
    family = "gamma"

    def __post_init__(self):
        if not (self.shape > 0 and self.rate > 0):
            raise DomainError("gamma shape and rate must be positive")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return special.gammainc(self.shape, self.rate * np.maximum(x, 0.0))

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        return special.gammaincc(self.shape, self.rate * np.maximum(x, 0.0))

    def quantile(self, p):
        p = _check_prob(p)
        return special.gammaincinv(self.shape, p) / self.rate

    def moments(self):
        return self.shape / self.rate, self.shape / self.rate**2

    def to_spec(self):
        return {"family": "gamma", "shape": self.shape, "rate": self.rate}


@dataclass(frozen=True)
class ShiftedPareto(ContinuousDistribution):
    """Pareto law shifted to start at 0: ``sf(x) = (scale / (x + scale)) ** tail_index``."""

    scale: float
    tail_index: float
    family = "shifted_pareto"

    def __post_init__(self):
        if not (self.scale > 0 and self.tail_index > 0):
            raise DomainError("pareto scale and tail_index must be positive")

    def cdf(self, x):
        return 1.0 - self.sf(x)

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return (self.scale / (x + self.scale)) ** self.tail_index

    def quantile(self, p):
        p = _check_prob(p)
        return self.scale * ((1.0 - p) ** (-1.0 / self.tail_index) - 1.0)

    def moments(self):
        a, s = self.tail_index, self.scale
        if a <= 2:
            raise InfiniteMomentError(f"tail_index {a} <= 2: variance is infinite")
        return s / (a - 1.0), s * s * a / ((a - 1.0) ** 2 * (a - 2.0))

    def to_spec(self):
        return {"family": "shifted_pareto", "scale": self.scale, "tail_index": self.tail_index}


@dataclass(frozen=True)
class Lognormal(ContinuousDistribution):
    """``exp(N(log_mean, log_sd**2))``."""

    log_mean: float
    log_sd: float
    family = "lognormal"

    def __post_init__(self):
        if not self.log_sd > 0:
            raise DomainError("lognormal log_sd must be positive")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(np.maximum(x, 0.0)) - self.log_mean) / self.log_sd
        return special.ndtr(z)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            z = (np.log(np.maximum(x, 0.0)) - self.log_mean) / self.log_sd
        return special.ndtr(-z)

    def quantile(self, p):
        p = _check_prob(p)
        return np.exp(self.log_mean + self.log_sd * special.ndtri(p))

    def moments(self):
        s2 = self.log_sd**2
        mean = math.exp(self.log_mean + 0.5 * s2)
        return mean, math.expm1(s2) * mean * mean

    def to_spec(self):
        return {"family": "lognormal", "log_mean": self.log_mean, "log_sd": self.log_sd}


@dataclass(frozen=True)
class Exponential(ContinuousDistribution):
    rate: float
    family = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise DomainError("exponential rate must be positive")

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return -np.expm1(-self.rate * x)

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return np.exp(-self.rate * x)

    def quantile(self, p):
        p = _check_prob(p)
        return -np.log1p(-p) / self.rate

    def moments(self):
        return 1.0 / self.rate, 1.0 / self.rate**2

    def to_spec(self):
        return {"family": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class Uniform(ContinuousDistribution):
    lo: float
    hi: float
    family = "uniform"

    def __post_init__(self):
        if not (0 <= self.lo < self.hi):
            raise DomainError("uniform requires 0 <= lo < hi")

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def quantile(self, p):
        p = _check_prob(p)
        return self.lo + p * (self.hi - self.lo)

    def moments(self):
        w = self.hi - self.lo
        return 0.5 * (self.lo + self.hi), w * w / 12.0

    def to_spec(self):
        return {"family": "uniform", "lo": self.lo, "hi": self.hi}


_FAMILIES = {
    "gamma": (Gamma, ("shape", "rate")),
    "shifted_pareto": (ShiftedPareto, ("scale", "tail_index")),
    "pareto": (ShiftedPareto, ("scale", "tail_index")),
    "lognormal": (Lognormal, ("log_mean", "log_sd")),
    "exponential": (Exponential, ("rate",)),
    "uniform": (Uniform, ("lo", "hi")),
}

FAMILY_NAMES = tuple(sorted(_FAMILIES))


def distribution_from_spec(spec: dict) -> ContinuousDistribution:
    """Build a law from a JSON-style dict such as ``{"family": "gamma", "shape": 0.5, "rate": 0.5}``."""
    spec = dict(spec)
    family = spec.pop("family", None)
    if family not in _FAMILIES:
        raise DomainError(f"unknown distribution family {family!r}; expected one of {FAMILY_NAMES}")
    cls, params = _FAMILIES[family]
    if set(spec) != set(params):
        raise DomainError(f"{family} takes parameters {params}, got {sorted(spec)}")
    return cls(**{k: float(spec[k]) for k in params})


# Laws used in the worked numerical examples.
def standard_gamma() -> Gamma:
    return Gamma(0.5, 0.5)


def standard_pareto() -> ShiftedPareto:
    return ShiftedPareto(3.0, 4.0)


def standard_lognormal() -> Lognormal:
    return Lognormal(-0.5 * math.log(3.0), math.sqrt(math.log(3.0)))


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported law on [0, inf) with strictly increasing support."""

    support: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        support = np.array(self.support, dtype=float).ravel()
        mass = np.array(self.mass, dtype=float).ravel()
        if support.shape != mass.shape or support.size == 0:
            raise StructuralError("support and mass must be nonempty and of equal length")
        if np.any(support < 0) or np.any(np.diff(support) <= 0):
            raise DomainError("support must be nonnegative and strictly increasing")
        if np.any(mass < 0) or abs(mass.sum() - 1.0) > _MASS_ATOL:
            raise DomainError(f"masses must be nonnegative and sum to 1 (sum={mass.sum()!r})")
        support.flags.writeable = False
        mass.flags.writeable = False
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "mass", mass)

    def __len__(self):
        return self.support.size

    @classmethod
    def point_mass(cls, value: float) -> "DiscreteDistribution":
        return cls([value], [1.0])

    @classmethod
    def from_samples(cls, values, weights=None) -> "DiscreteDistribution":
        """Aggregate weighted atoms, merging values equal to 12 significant digits."""
        values = np.asarray(values, dtype=float).ravel()
        weights = np.full(values.size, 1.0 / values.size) if weights is None else np.asarray(weights, float).ravel()
        uniq, inv = np.unique(round_sig(values), return_inverse=True)
        at = np.full(uniq.size, np.inf)
        np.minimum.at(at, inv, values)
        m = np.bincount(inv, weights=weights, minlength=uniq.size)
        return cls(np.maximum(at, 0.0), m / m.sum())

    def cdf(self, x):
        idx = np.searchsorted(self.support, np.asarray(x, dtype=float), side="right")
        cum = np.concatenate([[0.0], np.cumsum(self.mass)])
        return np.minimum(cum[idx], 1.0)

    def quantile(self, p):
        p = _check_prob(p)
        cum = np.cumsum(self.mass)
        idx = np.searchsorted(cum, p - 1e-15, side="left")
        return self.support[np.minimum(idx, self.support.size - 1)]

    @property
    def mean(self) -> float:
        return float(self.mass @ self.support)

    @property
    def variance(self) -> float:
        m = self.mean
        return float(self.mass @ (self.support - m) ** 2)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["value", "mass"])
        for v, m in zip(self.support, self.mass):
            w.writerow([repr(float(v)), repr(float(m))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "DiscreteDistribution":
        """Read a ``value,mass`` CSV from a path or a CSV string."""
        text = Path(source).read_text() if isinstance(source, Path) or "\n" not in str(source) else source
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["value", "mass"]:
            raise StructuralError("expected CSV header 'value,mass'")
        data = np.array([[float(a), float(b)] for a, b in rows[1:] if a.strip()])
        return cls(data[:, 0], data[:, 1])


@dataclass(frozen=True)
class JointDistribution:
    """Mass array on a product grid; ``mass[i1, ..., in]`` sits at ``(grids[0][i1], ...)``."""

    grids: tuple
    mass: np.ndarray = field(repr=False)

    def __post_init__(self):
        grids = tuple(np.asarray(g, dtype=float).ravel() for g in self.grids)
        mass = np.asarray(self.mass, dtype=float)
        if mass.shape != tuple(g.size for g in grids):
            raise StructuralError(f"mass shape {mass.shape} does not match grids")
        if np.any(mass < 0) or abs(mass.sum() - 1.0) > 1e-10:
            raise DomainError("joint masses must be nonnegative and sum to 1")
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "mass", mass)

    @property
    def n(self) -> int:
        return len(self.grids)

    @classmethod
    def product(cls, *marginals: DiscreteDistribution) -> "JointDistribution":
        """Independent coupling of the given marginals."""
        mass = marginals[0].mass
        for d in marginals[1:]:
            mass = np.multiply.outer(mass, d.mass)
        return cls(tuple(d.support for d in marginals), mass)

    def marginal(self, i: int) -> DiscreteDistribution:
        axes = tuple(a for a in range(self.n) if a != i)
        return DiscreteDistribution(self.grids[i], self.mass.sum(axis=axes))


def discretize(dist: ContinuousDistribution, bins: int,
               tail_quantile: float = DEFAULT_TAIL_QUANTILE) -> DiscreteDistribution:
    """Bin ``dist`` into ``bins`` equal cells of ``[0, u]`` with ``u = quantile(tail_quantile)``.

    Cell ``k`` is represented by its right endpoint ``k u / N`` and carries
    ``cdf(k u/N) - cdf((k-1) u/N)``; the last cell also absorbs ``(u, inf)``.
    """
    if int(bins) != bins or bins < 1:
        raise DomainError("bins must be a positive integer")
    bins = int(bins)
    u = float(dist.quantile(tail_quantile))
    k = np.arange(1, bins + 1)
    points = k * u / bins
    edges = np.concatenate([[0.0], np.asarray(dist.cdf(points[:-1]), dtype=float)])
    mass = np.empty(bins)
    mass[:-1] = np.diff(edges)
    mass[-1] = 1.0 - edges[-1]
    mass = np.maximum(mass, 0.0)
    return DiscreteDistribution(points, mass)


def round_sig(values, digits: int = 12) -> np.ndarray:
    """Round to ``digits`` significant digits (deterministic merge keys).

    Decimal formatting is used so the whole float range, subnormals
    included, rounds without overflow.
    """
    v = np.asarray(values, dtype=float)
    fmt = f"{{:.{digits - 1}e}}"
    return np.array([float(fmt.format(x)) for x in v.ravel()]).reshape(v.shape)


def pushforward(d: DiscreteDistribution, f: Callable) -> DiscreteDistribution:
    """Image law of ``d`` under ``f``.

    Images equal after rounding to 12 significant digits are merged.  A
    merged atom sits at the smallest exact image in its group, so a map with
    ``f(x) <= x`` keeps that property atom by atom.
    """
    fx = np.asarray(f(d.support), dtype=float).ravel()
    if fx.shape != d.support.shape:
        raise StructuralError("f must map the support elementwise")
    keys = round_sig(fx)
    uniq, inv = np.unique(keys, return_inverse=True)
    values = np.full(uniq.size, np.inf)
    np.minimum.at(values, inv, fx)
    mass = np.bincount(inv, weights=d.mass, minlength=uniq.size)
    return DiscreteDistribution(values, mass)


def pushforward_index(d: DiscreteDistribution, f: Callable, image: DiscreteDistribution) -> np.ndarray:
    """Index into ``image.support`` of the merged image of each support point of ``d``."""
    keys = round_sig(np.asarray(f(d.support), dtype=float).ravel())
    ikeys = round_sig(image.support)
    idx = np.searchsorted(ikeys, keys)
    if np.any(idx >= ikeys.size) or np.any(ikeys[np.minimum(idx, ikeys.size - 1)] != keys):
        raise StructuralError("image grid does not contain every mapped value")
    return idx


def law_of(values: Sequence[float], mass: Sequence[float]) -> DiscreteDistribution:
    """Discrete law of a weighted list of (possibly repeated) values."""
    return DiscreteDistribution.from_samples(values, mass)
