"""Acceptance criteria 1-8.

Each test records one line in the end-of-run summary (see conftest) and
then asserts; tolerances are the stated ones.  The N=40 multi-marginal
runs are marked slow.
"""

import functools
import math
import time

import numpy as np
import pytest

from _builders import dominated_pair, ot_lp, random_lp, random_mmot
from reot.contracts import (MultilineMeanVariance, expected_loading, multiline_support_functions,
                            retained_value_at_risk_check, solve_definetti_proportions,
                            solve_mean_variance_multiline, solve_quota_share_variance_premium, solve_stop_loss,
                            solve_var_constrained, stop_loss_premium)
from reot.dist import (DiscreteDistribution, Exponential, JointDistribution, Uniform, discretize, standard_gamma,
                       standard_pareto)
from reot.lp import solve_lp
from reot.measures import value_at_risk
from reot.mmot import solve_mmot, two_line_experiment
from reot.oracle import brute_force_lp
from reot.quadrature import rng
from reot.treaty import comonotone_map, coupling_cost, deterministic_treaty, validate_support_condition

BETAS = (0.1, 0.25)
SWEEP = (0.995, 0.999, 0.9995)
VAR_DET_REF, VAR_OT_REF = 1.05314, 0.82875


def _rel(a, b):
    return abs(a - b) / abs(b)


@functools.lru_cache(maxsize=None)
def _mmot(n, q):
    """``(var_det, var_ot, worst marginal residual, seconds)``, or the failure message."""
    t = time.perf_counter()
    e = two_line_experiment(n, q)
    try:
        r = solve_mmot(e.problem)
    except Exception as exc:  # reported, not hidden: the criterion fails on it
        return e.var_det, math.nan, math.nan, time.perf_counter() - t, f"{type(exc).__name__}: {exc}"
    res = max(r.residuals[k] for k in ("claim", "nu1", "nu2"))
    return e.var_det, r.variance, res, time.perf_counter() - t, ""


@pytest.fixture(scope="module")
def multiline():
    t = time.perf_counter()
    out = solve_mean_variance_multiline([standard_gamma(), standard_pareto()], BETAS, 2.0)
    return out + (time.perf_counter() - t,)


def test_criterion_1_definetti(verdict):
    t = time.perf_counter()
    contract, rep = solve_definetti_proportions((1.0, 1.0), (2.0, 2.0), BETAS, 2.0)
    loading = expected_loading(contract, [standard_gamma(), standard_pareto()], BETAS)
    elapsed = time.perf_counter() - t
    a = np.array(contract.factors)
    ok = (np.max(np.abs(a - [0.6286093, 0.0715233])) <= 1e-4 and abs(loading - 0.0807417) <= 1e-4
          and elapsed < 1.0)
    verdict("1", ok, f"a={np.round(a, 7).tolist()} loading={loading:.7f} time={elapsed:.2f}s")
    assert ok


def test_criterion_2_multiline(verdict, multiline):
    contract, rep, elapsed = multiline
    checks = {
        "sigma": _rel(contract.sigma, 1.8026351) <= 5e-3,
        "lambda": _rel(contract.lambda_star, 0.0443408) <= 5e-3,
        "objective": _rel(rep.objective, 0.0232948) <= 5e-3,
        "improvement": abs(100 * rep.extra["improvement"] - 71.14) <= 1.0,
        "runtime": elapsed < 120.0,
    }
    failed = [k for k, v in checks.items() if not v]
    verdict("2", not failed,
            f"sigma={contract.sigma:.7f} lambda={contract.lambda_star:.7f} (2 lambda={2 * contract.lambda_star:.7f}) "
            f"objective={rep.objective:.7f} improvement={100 * rep.extra['improvement']:.2f}% "
            f"time={elapsed:.1f}s" + (f" failed: {failed}" if failed else ""))
    assert not failed, checks


@pytest.mark.slow
def test_criterion_3_mmot_sweep(verdict):
    rows = {q: _mmot(40, q) for q in SWEEP}
    close = [q for q, r in rows.items() if _rel(r[0], VAR_DET_REF) <= 0.02 and _rel(r[1], VAR_OT_REF) <= 0.03]
    every = all(r[1] < r[0] and 1 - r[1] / r[0] >= 0.18 for r in rows.values())
    timely = all(r[3] <= 600 for r in rows.values())
    ok = bool(close) and every and timely
    detail = "; ".join(f"q={q}: det={r[0]:.5f} ot={r[1]:.5f} impr={100 * (1 - r[1] / r[0]):.2f}% "
                       f"t={r[3]:.0f}s{' ' + r[4] if r[4] else ''}" for q, r in rows.items())
    verdict("3", ok, f"reference q found: {bool(close)}, all improve >= 18%: {every}, "
                     f"all <= 10 min: {timely} | {detail}")
    assert ok


def test_criterion_3_fallback_n20(verdict):
    det, ot, res, elapsed, err = _mmot(20, 0.999)
    ok = ot < det and res <= 1e-8 and elapsed <= 30.0
    verdict("3 (N=20 fallback)", ok, f"det={det:.5f} ot={ot:.5f} residual={res:.1e} time={elapsed:.1f}s {err}")
    assert ok


@pytest.mark.slow
def test_reference_quantile_reproduces_mmot_values(verdict):
    # at q = 0.99 both reference variances are reproduced
    det, ot, res, elapsed, err = _mmot(40, 0.99)
    ok = _rel(det, VAR_DET_REF) <= 0.02 and _rel(ot, VAR_OT_REF) <= 0.03 and res <= 1e-8
    verdict("3 (q=0.99 reproduction)", ok,
            f"det={det:.5f} ot={ot:.5f} impr={100 * (1 - ot / det):.2f}% time={elapsed:.0f}s {err}")
    assert ok


def test_criterion_4_comonotone(verdict):
    g = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        mu, nu = dominated_pair(g, 12)
        sol = solve_lp(ot_lp(mu, nu))
        co = coupling_cost(comonotone_map(mu, nu), lambda x, y: ((x - y) ** 2).sum(axis=1))
        worst = max(worst, abs(sol.objective - co) if sol.status == "optimal" else math.inf)
    ok = worst <= 1e-9
    verdict("4", ok, f"largest |LP - comonotone| over 100 pairs = {worst:.2e}")
    assert ok


def test_criterion_5_lp_oracle(verdict):
    g = np.random.default_rng(5)
    gaps = []
    for _ in range(50):
        lp = random_lp(g, 8, 5)
        sol = solve_lp(lp)
        gaps.append(abs(sol.objective - brute_force_lp(lp).value) if sol.status == "optimal" else math.inf)
    lp_gap = max(gaps)
    gaps = []
    for _ in range(10):
        p = random_mmot(g, 2)
        sol = solve_lp(p.lp)
        gaps.append(abs(sol.objective - brute_force_lp(p.lp).value) if sol.status == "optimal" else math.inf)
    mm_gap = max(gaps)
    ok = lp_gap <= 1e-8 and mm_gap <= 1e-8
    verdict("5", ok, f"largest gap: 50 LPs {lp_gap:.1e}, 10 MMOT {mm_gap:.1e}")
    assert ok


class _Var:
    def __init__(self, v):
        self.variance = v


def test_criterion_6_closed_forms(verdict):
    c = math.exp(-1.0)
    contract, rep = solve_stop_loss(Exponential(1.0), c)
    resid = abs(stop_loss_premium(Exponential(1.0), contract.a) - c)
    qs_worst = 0.0
    exact = True
    for var, budget in ((2.0, 0.5), (3.0, 1.7), (10.0, 0.01), (0.7, 0.7)):
        q, _ = solve_quota_share_variance_premium(_Var(var), budget)
        a = q.factors[0]
        exact &= a == math.sqrt(budget / var)
        qs_worst = max(qs_worst, abs(a * a * var - budget) / budget)
    ok = resid <= 1e-8 and abs(contract.a - 1.0) <= 1e-7 and exact and qs_worst <= 4 * np.finfo(float).eps
    verdict("6", ok, f"a*={contract.a:.10f} residual={resid:.1e}; quota share exact={exact} "
                     f"relative variance error={qs_worst:.1e}")
    assert ok


def test_criterion_7_var_constrained(verdict):
    alpha, c = 0.1, 0.5
    law = Uniform(0.0, 1.0)
    contract, rep = solve_var_constrained([law], (1.0,), alpha, c)
    # coverage on a 10^4-bin grid of the claim law
    grid = discretize(law, 10_000, 1.0 - 1e-12)
    covered = float(grid.mass[contract.loading(grid.support[:, None]) <= contract.d].sum())
    coverage_ok = abs(covered - (1 - alpha)) <= 1e-4 and abs(rep.extra["coverage"] - (1 - alpha)) <= 1e-9
    ok_var, info = retained_value_at_risk_check(contract, [law], alpha)
    kept = grid.support - contract.reinsured(grid.support[:, None])[:, 0]
    # the tail mass is exactly alpha on the grid; allow rounding in its sum
    grid_var = value_at_risk(DiscreteDistribution.from_samples(kept, grid.mass), alpha, tol=1e-12)
    var_ok = ok_var and abs(grid_var - c) <= 1e-4
    # layering invariant on a two-line fit
    dists = [standard_gamma(), standard_pareto()]
    two, _ = solve_var_constrained(dists, BETAS, 0.05, 2.0)
    g = rng(7)
    x = np.stack([d.sample(g, 10_000) for d in dists], axis=1)
    r = two.reinsured(x)
    bad = int(np.sum((r[:, 1] > 0) & (r[:, 0] != x[:, 0])))
    ok = contract.v_star == c and coverage_ok and var_ok and bad == 0 and rep.extra["coverage"] > 0
    verdict("7", ok, f"v*={contract.v_star} d={contract.d:.9f} grid coverage={covered:.6f} "
                     f"VaR(retained)={grid_var:.6f} tail at v*={info['tail_at_v']:.6f} "
                     f"layering violations={bad}/10000 on {int(np.sum(r[:, 1] > 0))} ceding second lines")
    assert ok


def test_criterion_8_support_condition(verdict, multiline):
    contract, _, _ = multiline
    g1 = discretize(standard_gamma(), 50, 0.999)
    g2 = discretize(standard_pareto(), 50, 0.999)
    mu = JointDistribution.product(g1, g2)
    p, g = multiline_support_functions(contract)
    t = deterministic_treaty(mu, contract.reinsured)
    accepts = validate_support_condition(t, p, g, 1.0, contract.lambda_star, tol=1e-6, candidates=101)
    moved = MultilineMeanVariance(contract.betas, contract.lambda_star, contract.sigma + 0.25)
    rejects = not validate_support_condition(deterministic_treaty(mu, moved.reinsured), p, g, 1.0,
                                             contract.lambda_star, tol=1e-6, candidates=101)
    ok = accepts and rejects
    verdict("8", ok, f"fitted contract accepted: {accepts}, perturbed contract rejected: {rejects}")
    assert ok
