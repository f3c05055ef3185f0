"""Parametric reinsurance contracts and the solvers fitting their parameters.

Every contract maps a claim vector ``x`` (shape ``(..., n)``; plain scalars
are accepted for one line) to ceded amounts in ``[0, x]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import ConvergenceError, DomainError, InfeasibleError, PreconditionError, StructuralError
from .quadrature import IntegrationSettings, integration_grid, tensor_grid

LAMBDA_BRACKET = (1e-8, 1e3)
VARIANCE_TOL = 1e-7
SIGMA_MAX_ITER = 200
SIGMA_TOL = 1e-13


def _claims(x, n):
    """Coerce ``x`` to shape ``(..., n)``; returns the array and a squeeze flag."""
    a = np.asarray(x, dtype=float)
    squeeze = False
    if n == 1 and (a.ndim == 0 or a.shape[-1] != 1):
        a = a[..., None]
        squeeze = True
    if a.ndim == 0 or a.shape[-1] != n:
        raise StructuralError(f"claim vector must have last dimension {n}, got shape {np.shape(x)}")
    if np.any(a < 0):
        raise DomainError("claims must be nonnegative")
    return a, squeeze


def _out(r, squeeze):
    return r[..., 0] if squeeze else r


def _check_betas(betas):
    b = np.asarray(betas, dtype=float).ravel()
    if b.size == 0 or np.any(b <= 0) or np.any(np.diff(b) <= 0):
        raise PreconditionError("loadings must satisfy 0 < beta_1 < ... < beta_n")
    return b


class Contract:
    """Deterministic treaty ``x -> R(x)``."""

    n: int = 1

    def reinsured(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def evaluate(self, x):
        a, squeeze = _claims(x, self.n)
        return _out(self.reinsured(a), squeeze)

    __call__ = evaluate

    def retained(self, x):
        a, squeeze = _claims(x, self.n)
        return _out(a - self.reinsured(a), squeeze)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class StopLoss(Contract):
    a: float
    n: int = 1

    def __post_init__(self):
        if not self.a >= 0:
            raise DomainError("deductible must be nonnegative")

    def reinsured(self, x):
        return np.maximum(x - self.a, 0.0)

    def to_dict(self):
        return {"variant": "stop_loss", "a": self.a}


@dataclass(frozen=True)
class QuotaShare(Contract):
    factors: tuple

    def __post_init__(self):
        f = tuple(float(v) for v in np.atleast_1d(self.factors))
        if any(not 0 <= v <= 1 for v in f):
            raise DomainError("quota-share factors must lie in [0, 1]")
        object.__setattr__(self, "factors", f)

    @property
    def n(self):
        return len(self.factors)

    def reinsured(self, x):
        return x * np.asarray(self.factors)

    def to_dict(self):
        return {"variant": "quota_share", "factors": list(self.factors)}


@dataclass(frozen=True)
class MultilineMeanVariance(Contract):
    """``R_i(x) = min((sum_{j>=i} x_j - beta_i / (2 lambda) - sigma)_+, x_i)``."""

    betas: tuple
    lambda_star: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(v) for v in _check_betas(self.betas)))
        if not self.lambda_star > 0:
            raise PreconditionError("lambda_star must be positive")

    @property
    def n(self):
        return len(self.betas)

    def reinsured(self, x):
        tail = np.cumsum(x[..., ::-1], axis=-1)[..., ::-1]
        b = np.asarray(self.betas)
        return np.minimum(np.maximum(tail - b / (2.0 * self.lambda_star) - self.sigma, 0.0), x)

    def to_dict(self):
        return {"variant": "multiline_mean_variance", "betas": list(self.betas),
                "lambda_star": self.lambda_star, "sigma": self.sigma}


@dataclass(frozen=True)
class VarConstrained(Contract):
    """Cede ``y*(x)`` on ``{q(x) <= d}`` and nothing elsewhere.

    ``y*_i = min(Q_i, x_i)`` for ``i < n`` and ``y*_n = Q_n`` with
    ``Q_i = (sum_{j>=i} x_j - v)_+``; ``q = sum beta_i y*_i``.
    """

    betas: tuple
    v_star: float
    d: float

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(float(v) for v in _check_betas(self.betas)))
        if self.v_star < 0 or self.d < 0:
            raise DomainError("v_star and d must be nonnegative")

    @property
    def n(self):
        return len(self.betas)

    def layer(self, x):
        """``y*(x)``: the cheapest cession bringing the retained sum down to ``v*``."""
        tail = np.cumsum(x[..., ::-1], axis=-1)[..., ::-1]
        q = np.maximum(tail - self.v_star, 0.0)
        y = np.minimum(q, x)
        y[..., -1] = q[..., -1]
        return y

    def loading(self, x):
        return self.layer(x) @ np.asarray(self.betas)

    def reinsured(self, x):
        y = self.layer(x)
        return np.where((y @ np.asarray(self.betas) <= self.d)[..., None], y, 0.0)

    def to_dict(self):
        return {"variant": "var_constrained", "betas": list(self.betas), "v_star": self.v_star, "d": self.d}


@dataclass(frozen=True)
class Componentwise(Contract):
    """``R_i(x) = maps[i](x_i)``, each map clipped into ``[0, x_i]``."""

    maps: tuple

    @property
    def n(self):
        return len(self.maps)

    def reinsured(self, x):
        cols = [np.clip(np.asarray(f(x[..., i]), dtype=float), 0.0, x[..., i]) for i, f in enumerate(self.maps)]
        return np.stack(cols, axis=-1)

    def to_dict(self):
        return {"variant": "componentwise", "maps": [repr(f) for f in self.maps]}


@dataclass
class FitReport:
    parameters: dict
    residuals: dict
    objective: float
    iterations: int
    converged: bool = True
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"parameters": self.parameters, "residuals": self.residuals, "objective": self.objective,
                "iterations": self.iterations, "converged": self.converged, **self.extra}


# one line, closed form ------------------------------------------------------------

def stop_loss_premium(mu, a: float, nodes: Optional[int] = None) -> float:
    """``E[(X - a)_+] = int_a^inf sf``.

    Adaptive quadrature by default; with ``nodes`` a fixed Gauss-Legendre
    rule after mapping ``[a, inf)`` onto ``[0, 1)`` by ``t = a + s / (1 - s)``.
    """
    if nodes is None:
        val, _ = integrate.quad(lambda t: float(mu.sf(t)), a, np.inf, epsabs=1e-14, epsrel=1e-13, limit=500)
        return val
    s, w = np.polynomial.legendre.leggauss(int(nodes))
    s = 0.5 * (s + 1.0)
    w = 0.5 * w
    return float(w @ (np.asarray(mu.sf(a + s / (1.0 - s)), dtype=float) / (1.0 - s) ** 2))


def _limited_moments(mu, a: float) -> tuple[float, float]:
    """Mean and variance of ``min(X, a)`` from the survival function."""
    m1, _ = integrate.quad(lambda t: float(mu.sf(t)), 0.0, a, epsabs=1e-14, epsrel=1e-13, limit=500)
    m2, _ = integrate.quad(lambda t: 2.0 * t * float(mu.sf(t)), 0.0, a, epsabs=1e-14, epsrel=1e-13, limit=500)
    return m1, m2 - m1 * m1


def solve_stop_loss(mu, c: float, tol: float = 1e-8, max_iter: int = 200, nodes: Optional[int] = None):
    """Deductible ``a*`` with ``E[(X - a*)_+] = c`` (premium budget ``c``).

    ``nodes`` selects a fixed Gauss-Legendre rule for the premium integral
    (see :func:`stop_loss_premium`); the default is adaptive.
    """
    mean = mu.mean
    if not 0 < c <= mean * (1 + 1e-12):
        raise InfeasibleError(f"premium budget must lie in (0, E[X]] = (0, {mean:.9g}], got {c!r}")
    if c >= mean:
        a = 0.0
        it = 0
    else:
        lo, hi = 0.0, max(1.0, mean)
        while stop_loss_premium(mu, hi, nodes) > c:
            lo, hi = hi, 2.0 * hi
        it = 0
        while it < max_iter and hi - lo > 1e-14 * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if stop_loss_premium(mu, mid, nodes) > c:
                lo = mid
            else:
                hi = mid
            it += 1
        a = 0.5 * (lo + hi)
    resid = abs(stop_loss_premium(mu, a, nodes) - c)
    _, var_ret = _limited_moments(mu, a)
    report = FitReport({"a": a}, {"premium": resid}, var_ret, it, converged=resid <= tol,
                       extra={"retained_variance": var_ret})
    if resid > tol:
        raise ConvergenceError(f"stop-loss bisection residual {resid:.3e} above {tol:.1e}", {"premium": resid})
    return StopLoss(a), report


def solve_quota_share_variance_premium(mu, c: float):
    """Quota share whose ceded variance equals the budget: ``factor = sqrt(c / Var X)``.

    The associated multiplier is ``lambda = 1 - sqrt(Var X / c)``, i.e.
    ``(1 - lambda)^2 = Var X / c``.
    """
    var = mu.variance
    if not c > 0:
        raise InfeasibleError("variance budget must be positive")
    if c > var:
        raise InfeasibleError(f"budget {c!r} exceeds Var(X) = {var:.9g}; the factor would exceed 1")
    factor = math.sqrt(c / var)
    lam = 1.0 - math.sqrt(var / c)
    ceded_var = factor * factor * var
    report = FitReport({"factor": factor, "lambda": lam}, {"variance": abs(ceded_var - c)}, ceded_var, 0,
                       extra={"retained_variance": (1 - factor) ** 2 * var})
    return QuotaShare((factor,)), report


# de Finetti ---------------------------------------------------------------------

def _definetti_a(k, lam):
    return np.maximum(1.0 - k / lam, 0.0)


def solve_definetti_proportions(means, variances, betas, c: float, tol: float = 1e-10):
    """Optimal quota shares for independent lines under a retained-variance budget.

    ``a_i = (1 - beta_i E_i / (2 lambda Var_i))_+`` with ``lambda`` fitted so
    that ``sum (1 - a_i)^2 Var_i = c``.
    """
    E = np.asarray(means, dtype=float)
    V = np.asarray(variances, dtype=float)
    b = np.asarray(betas, dtype=float)
    if not (E.shape == V.shape == b.shape) or np.any(V <= 0):
        raise StructuralError("means, variances and loadings must have equal length; variances positive")
    total = float(V.sum())
    if not 0 < c < total:
        raise InfeasibleError(f"no proportions reach the budget: need 0 < c < sum Var = {total:.9g}")
    k = b * E / (2.0 * V)

    def retained(lam):
        return float(np.sum((1.0 - _definetti_a(k, lam)) ** 2 * V))

    lo, hi = math.log(1e-12), math.log(1e12)
    it = 0
    # retained variance decreases in lambda
    while it < 400 and hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        if retained(math.exp(mid)) > c:
            lo = mid
        else:
            hi = mid
        it += 1
    lam = math.exp(0.5 * (lo + hi))
    a = _definetti_a(k, lam)
    resid = abs(retained(lam) - c)
    if resid > tol:
        raise ConvergenceError(f"de Finetti budget residual {resid:.3e}", {"variance": resid})
    loading = float(np.sum(b * a * E))
    printed = float(np.sum((b * E) ** 2 / V) / (4.0 * c))
    report = FitReport({"a": a.tolist(), "lambda": lam}, {"variance": resid}, loading, it,
                       extra={"formula_lambda": printed, "formula_lambda_sqrt": math.sqrt(printed)})
    return QuotaShare(tuple(a)), report


# multiline mean-variance ------------------------------------------------------------

def _retained_moments(contract, points, weights):
    r = contract.reinsured(points)
    t = points.sum(axis=1) - r.sum(axis=1)
    m = float(weights @ t)
    return m, float(weights @ (t - m) ** 2), r


def solve_mean_variance_multiline(dists: Sequence, betas, c: float,
                                  settings: IntegrationSettings = IntegrationSettings(),
                                  tol: float = VARIANCE_TOL, baseline: bool = True):
    """Fit ``(lambda*, sigma)`` of the layered multiline contract.

    For each trial ``lambda`` the shift ``sigma`` is the damped fixed point of
    ``sigma -> mean retained sum``; ``lambda`` is then bisected (in log
    space) until the retained variance equals ``c``.
    """
    b = _check_betas(betas)
    if len(dists) != b.size:
        raise StructuralError("need one loading per line")
    points, weights = integration_grid(dists, settings)
    S = points.sum(axis=1)
    mean_s = float(weights @ S)
    var_s = float(weights @ (S - mean_s) ** 2)
    if not 0 < c < var_s:
        raise InfeasibleError(f"variance budget must lie in (0, Var(sum X) = {var_s:.9g})")

    inner_total = 0

    def retained_mean(lam, sigma):
        nonlocal inner_total
        inner_total += 1
        return _retained_moments(MultilineMeanVariance(tuple(b), lam, sigma), points, weights)[0]

    def fit_sigma(lam, sigma0):
        sigma = sigma0
        for _ in range(SIGMA_MAX_ITER):
            m = retained_mean(lam, sigma)
            new = 0.5 * sigma + 0.5 * m
            if abs(new - sigma) <= SIGMA_TOL * max(1.0, abs(sigma)):
                return new
            sigma = new
        # slow contraction (deductible near zero): m(sigma) - sigma is
        # nonincreasing, so bracket the root on [0, E[S]] instead
        try:
            return optimize.brentq(lambda s: retained_mean(lam, s) - s, 0.0, mean_s, xtol=1e-15, rtol=1e-15)
        except ValueError as exc:
            raise ConvergenceError(f"sigma fixed point failed for lambda={lam:.6g}",
                                   {"sigma_residual": abs(retained_mean(lam, sigma) - sigma),
                                    "lambda": lam}) from exc

    lo, hi = math.log(LAMBDA_BRACKET[0]), math.log(LAMBDA_BRACKET[1])
    sigma = mean_s
    it = 0
    resid = np.inf
    lam = math.exp(0.5 * (lo + hi))
    while it < 200:
        lam = math.exp(0.5 * (lo + hi))
        sigma = fit_sigma(lam, sigma)
        _, v, _ = _retained_moments(MultilineMeanVariance(tuple(b), lam, sigma), points, weights)
        resid = v - c
        it += 1
        if abs(resid) <= tol:
            break
        if resid > 0:
            lo = math.log(lam)
        else:
            hi = math.log(lam)
    if abs(resid) > tol:
        raise ConvergenceError(f"variance constraint residual {resid:.3e} after {it} bisection steps",
                               {"variance": abs(resid), "lambda": lam, "sigma": sigma})
    contract = MultilineMeanVariance(tuple(b), lam, sigma)
    m, v, r = _retained_moments(contract, points, weights)
    objective = float(weights @ (r @ b))
    extra = {"retained_mean": m, "retained_variance": v, "mode": settings.resolve(len(dists)),
             "inner_iterations": inner_total, "two_lambda": 2.0 * lam}
    if baseline:
        means = [d.mean for d in dists]
        variances = [d.variance for d in dists]
        try:
            _, fin = solve_definetti_proportions(means, variances, b, c)
            extra["quota_share_loading"] = fin.objective
            extra["improvement"] = 1.0 - objective / fin.objective
        except InfeasibleError:
            pass
    report = FitReport({"lambda_star": lam, "sigma": sigma}, {"variance": abs(v - c), "sigma": abs(m - sigma)},
                       objective, it, extra=extra)
    return contract, report


def multiline_support_functions(contract: MultilineMeanVariance):
    """``p(x, y) = sum beta_i y_i`` and the linearized variance ``g`` at the fit."""
    b = np.asarray(contract.betas)
    sigma = contract.sigma

    def p(x, y):
        return y @ b

    def g(x, y):
        t = (x - y).sum(axis=-1)
        return t * t - 2.0 * sigma * t

    return p, g


# VaR-constrained ------------------------------------------------------------------

@dataclass(frozen=True)
class _ConditionalLaw:
    """Axis ``n`` integrated exactly through its cdf, the others by quadrature."""

    outer: np.ndarray  # (P, n-1) points of the first n-1 claims
    weights: np.ndarray
    last: object       # distribution of X_n


def _conditional_law(dists, settings):
    if len(dists) == 1:
        return _ConditionalLaw(np.zeros((1, 0)), np.ones(1), dists[0])
    pts, w = tensor_grid(dists[:-1], settings)
    return _ConditionalLaw(pts, w, dists[-1])


def _largest_last_claim(contract: VarConstrained, outer, d):
    """``sup{x_n : q(x_outer, x_n) <= d}`` per outer point (``q`` is nondecreasing in ``x_n``)."""
    b_n = contract.betas[-1]
    P = outer.shape[0]
    lo = np.zeros(P)
    hi = np.full(P, contract.v_star + d / b_n + 1.0)

    def q(xn):
        x = np.concatenate([outer, xn[:, None]], axis=1)
        return contract.loading(x)

    ok0 = q(lo) <= d
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        below = q(mid) <= d
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return np.where(ok0, lo, -1.0)


def _prob_q_below(contract, law: _ConditionalLaw, d):
    xn = _largest_last_claim(contract, law.outer, d)
    F = np.where(xn >= 0, law.last.cdf(np.maximum(xn, 0.0)), 0.0)
    return float(law.weights @ F)


def sum_value_at_risk(dists: Sequence, alpha: float, settings: IntegrationSettings = IntegrationSettings()):
    """``VaR_alpha`` of the total claim for independent continuous lines."""
    if len(dists) == 1:
        return float(dists[0].quantile(1.0 - alpha))
    law = _conditional_law(dists, settings)
    rest = law.outer.sum(axis=1)

    def tail(s):
        return float(law.weights @ np.where(s - rest >= 0, law.last.sf(np.maximum(s - rest, 0.0)), 1.0))

    lo, hi = 0.0, max(1.0, sum(d.mean for d in dists))
    while tail(hi) > alpha:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if tail(mid) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    return hi


def _lower_quantile(values, weights, p):
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    k = int(np.searchsorted(cum, p - 1e-15, side="left"))
    return float(values[order][min(k, values.size - 1)])


def solve_var_constrained(dists: Sequence, betas, alpha: float, c: float,
                          settings: IntegrationSettings = IntegrationSettings()):
    """Contract minimizing the expected loading under ``VaR_alpha(retained) <= c``.

    The threshold ``v*`` is pinned to ``c`` (the constraint binds) and ``d``
    is the lower ``(1 - alpha)``-quantile of ``q(X)``.  With at most
    ``max_quadrature_dim`` lines the law of ``q(X)`` is computed by
    integrating the last claim exactly through its cdf (``q`` is
    nondecreasing in it); otherwise from the seeded Monte Carlo sample.
    """
    b = _check_betas(betas)
    n = b.size
    if len(dists) != n:
        raise StructuralError("need one loading per line")
    if not 0 < alpha < 1:
        raise DomainError("alpha must lie in (0, 1)")
    var_sum = sum_value_at_risk(dists, alpha, settings)
    if not 0 < c < var_sum:
        raise InfeasibleError(f"VaR budget must lie in (0, VaR_alpha(sum X) = {var_sum:.9g})")
    probe = VarConstrained(tuple(b), c, 0.0)
    target = 1.0 - alpha
    mode = settings.resolve(n)
    it = 0
    if mode == "quadrature":
        law = _conditional_law(dists, settings)
        if _prob_q_below(probe, law, 0.0) >= target:
            d = 0.0
        else:
            lo, hi = 0.0, float(b[-1]) * max(1.0, var_sum)
            while _prob_q_below(VarConstrained(tuple(b), c, hi), law, hi) < target:
                lo, hi = hi, 2.0 * hi
            while it < 200 and hi - lo > 1e-13 * max(1.0, hi):
                mid = 0.5 * (lo + hi)
                if _prob_q_below(VarConstrained(tuple(b), c, mid), law, mid) >= target:
                    hi = mid
                else:
                    lo = mid
                it += 1
            d = hi
        coverage = _prob_q_below(VarConstrained(tuple(b), c, d), law, d)
    else:
        points, weights = integration_grid(dists, settings)
        qv = probe.loading(points)
        d = max(_lower_quantile(qv, weights, target), 0.0)
        coverage = float(weights[qv <= d].sum())
    contract = VarConstrained(tuple(b), c, d)
    points, weights = integration_grid(dists, settings)
    r = contract.reinsured(points)
    objective = float(weights @ (r @ b))
    tail_at_v = retained_tail(contract, dists, c, settings)
    report = FitReport(
        {"v_star": c, "d": d},
        {"coverage": abs(coverage - target), "tail_at_v": max(tail_at_v - alpha, 0.0)},
        objective, it,
        converged=d > 0,
        extra={"alpha": alpha, "coverage": coverage, "sum_value_at_risk": var_sum, "mode": mode,
               "retained_tail_at_v": tail_at_v,
               "degenerate": d == 0.0,
               "note": "d = 0: no reinsurance is optimal" if d == 0.0 else ""},
    )
    return contract, report


def retained_tail(contract: VarConstrained, dists: Sequence, u: float,
                  settings: IntegrationSettings = IntegrationSettings()) -> float:
    """``P(retained sum > u)`` under a fitted VaR-constrained contract.

    Below ``v*`` the retained sum exceeds ``u`` exactly when the total claim
    does; from ``v*`` on only the uncovered states ``{q > d}`` contribute.
    """
    n = contract.n
    v = contract.v_star
    if settings.resolve(n) != "quadrature":
        points, weights = integration_grid(dists, settings)
        t = points.sum(axis=1) - contract.reinsured(points).sum(axis=1)
        return float(weights[t > u].sum())
    law = _conditional_law(dists, settings)
    rest = law.outer.sum(axis=1)
    if u < v:
        sf = np.where(u - rest >= 0, law.last.sf(np.maximum(u - rest, 0.0)), 1.0)
        return float(law.weights @ sf)
    xn = _largest_last_claim(contract, law.outer, contract.d)
    # {q > d} is {x_n > xn}; intersect with {S > u}
    thresh = np.maximum(np.maximum(xn, 0.0), u - rest)
    sf = np.where(xn < 0, np.where(u - rest >= 0, law.last.sf(np.maximum(u - rest, 0.0)), 1.0),
                  law.last.sf(thresh))
    return float(law.weights @ sf)


def retained_value_at_risk_check(contract: VarConstrained, dists, alpha: float, eps: float = 1e-9,
                                 settings: IntegrationSettings = IntegrationSettings(), tol: float = 1e-9):
    """Is ``VaR_alpha(retained) = v*``?  Tail at ``v*`` within ``alpha`` and strictly above just below."""
    at = retained_tail(contract, dists, contract.v_star, settings)
    below = retained_tail(contract, dists, contract.v_star - eps, settings)
    return (at <= alpha + tol) and (below > alpha), {"tail_at_v": at, "tail_below_v": below}


# generic expectations ------------------------------------------------------------------

def expected_loading(contract: Contract, dists: Sequence, betas=None,
                     settings: IntegrationSettings = IntegrationSettings()) -> float:
    """``sum beta_i E[R_i(X)]`` for independent lines."""
    b = np.asarray(betas if betas is not None else getattr(contract, "betas"), dtype=float)
    points, weights = integration_grid(dists, settings)
    r = np.asarray(contract.reinsured(points))
    return float(weights @ (r @ b))


def retained_moments(contract: Contract, dists: Sequence,
                     settings: IntegrationSettings = IntegrationSettings()) -> tuple[float, float]:
    points, weights = integration_grid(dists, settings)
    m, v, _ = _retained_moments(contract, points, weights)
    return m, v


def contract_from_dict(d: dict) -> Contract:
    kind = d.get("variant")
    if kind == "stop_loss":
        return StopLoss(float(d["a"]))
    if kind == "quota_share":
        return QuotaShare(tuple(d["factors"]))
    if kind == "multiline_mean_variance":
        return MultilineMeanVariance(tuple(d["betas"]), float(d["lambda_star"]), float(d["sigma"]))
    if kind == "var_constrained":
        return VarConstrained(tuple(d["betas"]), float(d["v_star"]), float(d["d"]))
    raise StructuralError(f"cannot rebuild contract variant {kind!r}")
