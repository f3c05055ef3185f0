"""Risk functionals on discrete laws: mean, variance and Value-at-Risk."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dist import DiscreteDistribution
from .errors import DomainError


@dataclass(frozen=True)
class RiskReport:
    mean: float
    variance: float
    var_alpha: Optional[float] = None
    alpha: Optional[float] = None

    def to_dict(self) -> dict:
        out = {"mean": self.mean, "variance": self.variance}
        if self.alpha is not None:
            out["alpha"] = self.alpha
            out["value_at_risk"] = self.var_alpha
        return out


def mean_variance(d: DiscreteDistribution) -> tuple[float, float]:
    """First moment and variance of ``d``."""
    m = float(d.mass @ d.support)
    return m, float(d.mass @ (d.support - m) ** 2)


def value_at_risk(d: DiscreteDistribution, alpha: float, tol: float = 0.0) -> float:
    """``inf{u : P(X > u) <= alpha}``, always a support point or 0.

    ``tol`` loosens the tail comparison to ``P(X > u) <= alpha + tol``.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    # tail[k] = mass strictly above support[k]
    tail = np.concatenate([np.cumsum(d.mass[::-1])[::-1][1:], [0.0]])
    k = int(np.argmax(tail <= alpha + tol))
    return float(d.support[k])


def risk_report(d: DiscreteDistribution, alpha: Optional[float] = None) -> RiskReport:
    m, v = mean_variance(d)
    if alpha is None:
        return RiskReport(m, v)
    return RiskReport(m, v, value_at_risk(d, alpha), alpha)


def retained_sum_law(t, orientation: Optional[str] = None) -> DiscreteDistribution:
    """Law of the total retained amount under treaty ``t``.

    With a ``reinsured`` second block this is the image of the treaty mass
    under ``sum(x - y)``; with a ``retained`` block it is ``sum(y)``.
    """
    orientation = orientation or t.orientation
    if orientation == "reinsured":
        vals = (t.x_values() - t.y_values()).sum(axis=1)
    elif orientation == "retained":
        vals = t.y_values().sum(axis=1)
    else:
        raise DomainError(f"unknown orientation {orientation!r}")
    return DiscreteDistribution.from_samples(np.maximum(vals, 0.0), t.mass)


def reinsured_sum_law(t) -> DiscreteDistribution:
    """Law of the total reinsured amount under treaty ``t``."""
    if t.orientation == "reinsured":
        vals = t.y_values().sum(axis=1)
    else:
        vals = (t.x_values() - t.y_values()).sum(axis=1)
    return DiscreteDistribution.from_samples(np.maximum(vals, 0.0), t.mass)
