import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from reot.contracts import (Componentwise, MultilineMeanVariance, QuotaShare, StopLoss, VarConstrained,
                            contract_from_dict, expected_loading, multiline_support_functions,
                            retained_moments, retained_tail, retained_value_at_risk_check,
                            solve_definetti_proportions, solve_mean_variance_multiline,
                            solve_quota_share_variance_premium, solve_stop_loss, solve_var_constrained,
                            stop_loss_premium)
from reot.dist import (DiscreteDistribution, Exponential, JointDistribution, Uniform, discretize,
                       standard_gamma, standard_pareto)
from reot.errors import InfeasibleError, PreconditionError
from reot.oracle import refinement_sweep
from reot.quadrature import IntegrationSettings, rng
from reot.treaty import deterministic_treaty, validate_support_condition

BETAS = (0.1, 0.25)


@pytest.fixture(scope="module")
def multiline():
    return solve_mean_variance_multiline([standard_gamma(), standard_pareto()], BETAS, 2.0)


@pytest.fixture(scope="module")
def uniform_var():
    return solve_var_constrained([Uniform(0.0, 1.0)], (1.0,), 0.1, 0.5)


def _random_claims(n, size=100_000, seed=0):
    g = rng(seed)
    return np.stack([standard_gamma().sample(g, size), standard_pareto().sample(g, size)][:n], axis=1) \
        if n <= 2 else g.exponential(1.0, (size, n))


# evaluation ------------------------------------------------------------------------

def test_stop_loss_values():
    c = StopLoss(1.0)
    assert c(0.5) == 0.0 and c(3.0) == 2.0
    assert np.array_equal(c(np.array([0.5, 3.0])), [0.0, 2.0])


def test_multiline_at_origin():
    c = MultilineMeanVariance(BETAS, 0.0443408, 1.8026351)
    assert np.array_equal(c(np.zeros(2)), [0.0, 0.0])


def test_var_constrained_pointwise():
    c = VarConstrained((1.0,), 0.5, 0.4)
    assert c(0.8) == pytest.approx(0.3, abs=1e-15)
    assert c(0.95) == 0.0


def test_componentwise_clips():
    c = Componentwise((lambda x: 2 * x, lambda x: x - 5))
    assert np.array_equal(c(np.array([1.0, 2.0])), [1.0, 0.0])


@pytest.mark.parametrize("contract", [
    StopLoss(0.7), QuotaShare((0.3, 0.8)), MultilineMeanVariance(BETAS, 0.0221678, 1.8026313),
    MultilineMeanVariance((0.05, 0.2, 0.4), 0.01, 0.5), VarConstrained(BETAS, 2.0, 0.54),
    VarConstrained((0.1, 0.2, 0.3), 1.0, 0.2),
], ids=lambda c: type(c).__name__)
def test_reinsured_between_zero_and_claim(contract):
    n = getattr(contract, "n", 1) if not isinstance(contract, StopLoss) else 1
    x = _random_claims(n, 100_000, seed=n)
    if isinstance(contract, StopLoss):
        x = x[:, 0]
    r = contract.reinsured(x)
    assert np.all(r >= 0.0) and np.all(r <= x)
    assert np.allclose(contract.retained(x), x - r)


@pytest.mark.parametrize("contract", [MultilineMeanVariance(BETAS, 0.0221678, 1.8026313),
                                      MultilineMeanVariance((0.05, 0.2, 0.4), 0.01, 0.5),
                                      VarConstrained(BETAS, 2.0, 0.54),
                                      VarConstrained((0.1, 0.2, 0.3), 1.0, 5.0)],
                         ids=["mv2", "mv3", "var2", "var3"])
def test_layer_structure(contract):
    # R_i > 0 for some i >= 2 forces R_j = x_j for every j < i
    x = _random_claims(contract.n, 10_000, seed=3)
    r = contract.reinsured(x)
    for i in range(1, contract.n):
        hit = r[:, i] > 0
        assert np.all(r[hit, :i] == x[hit, :i])


def test_contract_validation():
    with pytest.raises(PreconditionError):
        MultilineMeanVariance(BETAS, 0.0, 1.0)
    with pytest.raises(PreconditionError):
        MultilineMeanVariance((-0.1, 0.2), 1.0, 1.0)


@pytest.mark.parametrize("contract", [StopLoss(1.5), QuotaShare((0.5, 0.25)),
                                      MultilineMeanVariance(BETAS, 0.02, 1.8),
                                      VarConstrained(BETAS, 2.0, 0.5)])
def test_contract_dict_roundtrip(contract):
    assert contract_from_dict(contract.to_dict()) == contract


# stop-loss and quota share -------------------------------------------------------------

def test_stop_loss_exponential():
    c = math.exp(-1.0)
    contract, rep = solve_stop_loss(Exponential(1.0), c)
    assert abs(contract.a - 1.0) <= 1e-7
    assert abs(stop_loss_premium(Exponential(1.0), contract.a) - c) <= 1e-8
    assert rep.residuals["premium"] <= 1e-8


def test_stop_loss_full_budget():
    contract, _ = solve_stop_loss(Exponential(1.0), 1.0)
    assert contract.a == 0.0


@pytest.mark.parametrize("c", [0.0, -1.0, 1.5])
def test_stop_loss_infeasible(c):
    with pytest.raises(InfeasibleError):
        solve_stop_loss(Exponential(1.0), c)


@given(st.floats(0.01, 0.99))
def test_stop_loss_residual_property(frac):
    d = standard_pareto()
    contract, rep = solve_stop_loss(d, frac * d.mean)
    assert rep.residuals["premium"] <= 1e-8
    assert 0.0 <= contract.a


@pytest.mark.parametrize("dist,c", [(Exponential(1.0), math.exp(-1.0)), (standard_pareto(), 0.3),
                                    (standard_gamma(), 0.2)], ids=["exp", "pareto", "gamma"])
def test_stop_loss_node_refinement(dist, c):
    rep = refinement_sweep(lambda k: solve_stop_loss(dist, c, nodes=k)[0].a, [64, 128, 256], rel_tol=0.0,
                           abs_tol=1e-9, label="nodes")
    assert max(rep.values["changes"]) <= 1e-9, rep.values


class _Var:
    def __init__(self, v):
        self.variance = v


def test_quota_share_boundary_and_scaling():
    c, _ = solve_quota_share_variance_premium(_Var(2.0), 2.0)
    assert c.factors == (1.0,)
    c, rep = solve_quota_share_variance_premium(_Var(2.0), 0.5)
    assert c.factors[0] == 0.5
    assert c.factors[0] ** 2 * 2.0 == 0.5
    assert rep.parameters["lambda"] == pytest.approx(1 - math.sqrt(2.0 / 0.5))


@given(st.floats(0.1, 50.0), st.floats(0.01, 1.0))
def test_quota_share_variance_exact(var, frac):
    c = frac * var
    contract, rep = solve_quota_share_variance_premium(_Var(var), c)
    a = contract.factors[0]
    assert a == math.sqrt(c / var)
    assert abs(a * a * var - c) <= 4 * np.finfo(float).eps * c


def test_quota_share_infeasible():
    with pytest.raises(InfeasibleError):
        solve_quota_share_variance_premium(_Var(2.0), 2.5)


# de Finetti -----------------------------------------------------------------------------

def test_definetti_reference_instance():
    contract, rep = solve_definetti_proportions((1, 1), (2, 2), BETAS, 2.0)
    assert np.allclose(contract.factors, (0.6286093, 0.0715233), atol=1e-4)
    assert abs(rep.objective - 0.0807417) <= 1e-4
    assert rep.parameters["lambda"] == pytest.approx(rep.extra["formula_lambda_sqrt"], rel=1e-9)


def test_definetti_loading_by_quadrature():
    contract, rep = solve_definetti_proportions((1, 1), (2, 2), BETAS, 2.0)
    q = expected_loading(contract, [standard_gamma(), standard_pareto()], BETAS)
    assert abs(q - 0.0807417) <= 1e-4
    assert abs(q - rep.objective) <= 1e-6


@given(st.floats(0.01, 1.0), st.floats(0.2, 5.0), st.floats(0.5, 10.0), st.floats(0.05, 0.95))
def test_definetti_symmetry(beta, mean, var, frac):
    contract, rep = solve_definetti_proportions((mean, mean), (var, var), (beta, beta), frac * 2 * var)
    assert contract.factors[0] == contract.factors[1]
    assert rep.residuals["variance"] <= 1e-10


def test_definetti_infeasible():
    with pytest.raises(InfeasibleError):
        solve_definetti_proportions((1, 1), (2, 2), BETAS, 4.0)


# multiline mean-variance ---------------------------------------------------------------

def test_multiline_fit_frozen(multiline):
    contract, rep = multiline
    # frozen values of the tensor-quadrature fit
    assert contract.sigma == pytest.approx(1.8026313, abs=2e-6)
    assert contract.lambda_star == pytest.approx(0.0221678, abs=2e-7)
    assert rep.objective == pytest.approx(0.0232940, abs=2e-7)
    assert rep.extra["improvement"] == pytest.approx(0.71150, abs=5e-5)
    assert rep.residuals["variance"] <= 1e-7
    assert rep.residuals["sigma"] <= 1e-10


def test_multiline_half_multiplier(multiline):
    contract, rep = multiline
    assert rep.extra["two_lambda"] == pytest.approx(0.0443408, rel=5e-3)


def test_multiline_sigma_is_retained_mean(multiline):
    contract, rep = multiline
    m, v = retained_moments(contract, [standard_gamma(), standard_pareto()])
    assert m == pytest.approx(contract.sigma, abs=1e-10)
    assert v == pytest.approx(2.0, abs=1e-7)


def test_multiline_support_condition(multiline):
    contract, _ = multiline
    g1 = discretize(standard_gamma(), 50, 0.999)
    g2 = discretize(standard_pareto(), 50, 0.999)
    t = deterministic_treaty(JointDistribution.product(g1, g2), contract.reinsured)
    p, g = multiline_support_functions(contract)
    assert validate_support_condition(t, p, g, 1.0, contract.lambda_star, tol=1e-6, candidates=101)


def test_multiline_budget_near_total_variance():
    dists = [standard_gamma(), standard_pareto()]
    s = IntegrationSettings(nodes=64)
    lams = []
    for c in (3.0, 3.8, 3.99):
        contract, rep = solve_mean_variance_multiline(dists, BETAS, c, s, baseline=False)
        lams.append(contract.lambda_star)
        loads = rep.objective
    assert lams[0] > lams[1] > lams[2]
    assert loads < 1e-3


def test_multiline_infeasible_budget():
    with pytest.raises(InfeasibleError):
        solve_mean_variance_multiline([standard_gamma(), standard_pareto()], BETAS, 10.0, IntegrationSettings(nodes=32))


# VaR-constrained ------------------------------------------------------------------------

def test_var_uniform_instance(uniform_var):
    contract, rep = uniform_var
    assert contract.v_star == 0.5
    assert contract.d == pytest.approx(0.4, abs=1e-12)
    x = np.linspace(0.0, 1.0, 1001)[:, None]
    r = contract.reinsured(x)[:, 0]
    expect = np.where(x[:, 0] <= 0.9, np.maximum(x[:, 0] - 0.5, 0.0), 0.0)
    assert np.allclose(r, expect, atol=1e-12)
    ok, info = retained_value_at_risk_check(contract, [Uniform(0.0, 1.0)], 0.1)
    assert ok, info
    assert info["tail_at_v"] == pytest.approx(0.1, abs=1e-12)


def test_var_two_line_instance():
    dists = [standard_gamma(), standard_pareto()]
    contract, rep = solve_var_constrained(dists, BETAS, 0.05, 2.0)
    assert contract.v_star == 2.0
    assert rep.extra["coverage"] == pytest.approx(0.95, abs=1e-9)
    assert contract.d == pytest.approx(0.538645, abs=1e-6)
    ok, info = retained_value_at_risk_check(contract, dists, 0.05)
    assert ok, info


def test_var_d_decreases_in_alpha():
    ds = [solve_var_constrained([Uniform(0.0, 1.0)], (1.0,), a, 0.5)[0].d for a in (0.05, 0.1, 0.2, 0.4)]
    assert all(b < a for a, b in zip(ds[:-1], ds[1:]))


def test_var_d_vanishes_at_budget_boundary():
    # c -> VaR_alpha(S) leaves nothing to cover: d -> 0
    ds = [solve_var_constrained([Uniform(0.0, 1.0)], (1.0,), 0.1, c)[0].d for c in (0.5, 0.8, 0.9 - 1e-6)]
    assert ds[0] > ds[1] > ds[2] and ds[2] <= 2e-6


def test_var_infeasible():
    with pytest.raises(InfeasibleError):
        solve_var_constrained([Uniform(0.0, 1.0)], (1.0,), 0.1, 0.95)


def test_var_retained_tail_above_and_below():
    contract, _ = solve_var_constrained([Uniform(0.0, 1.0)], (1.0,), 0.1, 0.5)
    assert retained_tail(contract, [Uniform(0.0, 1.0)], 0.3) == pytest.approx(0.7, abs=1e-12)
    assert retained_tail(contract, [Uniform(0.0, 1.0)], 0.95) == pytest.approx(0.05, abs=1e-12)


def test_var_monte_carlo_mode_agrees():
    dists = [standard_gamma(), standard_pareto()]
    quad, _ = solve_var_constrained(dists, BETAS, 0.05, 2.0)
    mc, _ = solve_var_constrained(dists, BETAS, 0.05, 2.0, IntegrationSettings(mode="monte_carlo",
                                                                                n_samples=1_000_000))
    assert mc.d == pytest.approx(quad.d, abs=5e-3)
