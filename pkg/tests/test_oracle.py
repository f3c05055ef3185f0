import numpy as np
import pytest
import scipy.sparse as sp

from reot.contracts import QuotaShare, solve_definetti_proportions
from reot.dist import standard_gamma, standard_pareto
from reot.lp import StandardFormLP
from reot.mmot import assemble, solve_mmot, two_line_experiment
from reot.oracle import (OracleRefusal, batch_mean_variance, brute_force_lp, mc_estimate, refinement_sweep,
                         sweep_to_csv)
from reot.quadrature import rng

BETAS = (0.1, 0.25)
DISTS = [standard_gamma(), standard_pareto()]


def _lp(c, A, b):
    return StandardFormLP(np.asarray(c, float), sp.csc_matrix(np.asarray(A, float)), np.asarray(b, float))


def test_enumeration_trivial():
    rep = brute_force_lp(_lp([1, 0], [[1, 1]], [1]), candidate=0.0)
    assert rep.value == 0.0 and rep.values["x"] == [0.0, 1.0]
    assert rep.discrepancy_abs == 0.0


def test_enumeration_transport():
    A = [[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 0], [0, 1, 0, 1]]
    rep = brute_force_lp(_lp([0, 1, 1, 0], A, [0.5] * 4))
    assert rep.value == 0.0 and rep.values["rank"] == 3


def test_enumeration_infeasible():
    rep = brute_force_lp(_lp([1, 1], [[1, 1]], [-1]))
    assert rep.values["status"] == "infeasible" and rep.value is None


def test_enumeration_refuses_large():
    with pytest.raises(OracleRefusal):
        brute_force_lp(_lp(np.ones(21), np.ones((1, 21)), [1]))
    with pytest.raises(OracleRefusal):
        brute_force_lp(_lp(np.ones(11), np.eye(11), np.ones(11)))


def test_discrepancy_fields():
    rep = brute_force_lp(_lp([2, 1], [[1, 1]], [1]), candidate=1.5)
    assert rep.discrepancy_abs == pytest.approx(0.5)
    assert rep.discrepancy_rel == pytest.approx(0.5)
    d = rep.to_dict()
    assert {"discrepancy_abs", "discrepancy_rel", "method"} <= set(d)


def test_zero_contract_mean_exact():
    rep = mc_estimate(QuotaShare((0.0, 0.0)), DISTS, 10_000)
    assert rep.values["reinsured"]["mean"] == 0.0


def test_mc_bit_reproducible():
    c = QuotaShare((0.5, 0.2))
    a = mc_estimate(c, DISTS, 50_000, seed=7, batch=20_000)
    b = mc_estimate(c, DISTS, 50_000, seed=7, batch=20_000)
    assert a.values == b.values
    assert a.values["generator"] == "Philox4x64-10" and a.seed == 7


def test_mc_var_alpha_reported():
    rep = mc_estimate(QuotaShare((0.5, 0.2)), DISTS, 100_000, alpha=0.05)
    assert rep.values["retained"]["alpha"] == 0.05
    assert rep.values["retained"]["value_at_risk"] > rep.values["retained"]["mean"]


def test_mc_rate():
    g = rng(11)
    v = standard_gamma().sample(g, 4_000_000)
    small = batch_mean_variance(v, 400)   # batches of 10^4
    large = batch_mean_variance(v, 100)   # batches of 4 x 10^4
    assert 2.0 <= small / large <= 8.0


@pytest.mark.slow
def test_mc_definetti_loading():
    contract, _ = solve_definetti_proportions((1, 1), (2, 2), BETAS, 2.0)
    rep = mc_estimate(contract, DISTS, 10_000_000, betas=BETAS)
    assert abs(rep.values["loading"] - 0.0807417) <= 3 * rep.values["loading_se"]


@pytest.mark.slow
def test_mc_multiline_retained_variance():
    from reot.contracts import solve_mean_variance_multiline
    contract, _ = solve_mean_variance_multiline(DISTS, BETAS, 2.0)
    rep = mc_estimate(contract, DISTS, 10_000_000)
    assert abs(rep.values["retained"]["variance"] - 2.0) <= 3 * rep.values["retained_variance_se"]


def test_refinement_identity_problem():
    def value(n):
        e = two_line_experiment(n, 0.99)
        m = e.problem.mu
        return solve_mmot(assemble(m, m.marginal(0), m.marginal(1))).variance
    rep = refinement_sweep(value, [2, 4, 6], abs_tol=1e-12)
    assert all(abs(r["value"]) <= 1e-12 for r in rep.values["table"])
    assert rep.flags == []


def test_refinement_flags_unsettled(tmp_path):
    rep = refinement_sweep(lambda n: 1.0 / n, [1, 2, 4], rel_tol=0.05)
    assert rep.flags and "not stabilized" in rep.flags[0]
    text = sweep_to_csv(rep, tmp_path / "s.csv")
    assert text.splitlines()[0] == "N,value" and len(text.splitlines()) == 4
