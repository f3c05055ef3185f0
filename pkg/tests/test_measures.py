import numpy as np
import pytest
from hypothesis import given, strategies as st

from reot.dist import (DiscreteDistribution, JointDistribution, discretize, standard_lognormal, pushforward)
from reot.errors import DomainError
from reot.measures import mean_variance, reinsured_sum_law, retained_sum_law, risk_report, value_at_risk
from reot.mmot import half_map, capped_layer_map, two_line_experiment
from reot.treaty import deterministic_treaty, no_reinsurance


@st.composite
def discrete_laws(draw, max_size=15):
    n = draw(st.integers(1, max_size))
    pts = np.sort(np.array(draw(st.lists(st.floats(0.0, 100.0), min_size=n, max_size=n, unique=True))))
    w = np.array(draw(st.lists(st.floats(0.01, 1.0), min_size=n, max_size=n)))
    return DiscreteDistribution(pts, w / w.sum())


@pytest.mark.parametrize("c", [0.0, 1.5, 7.0])
def test_point_mass_moments_and_var(c):
    d = DiscreteDistribution.point_mass(c)
    assert mean_variance(d) == (c, 0.0)
    for a in (0.01, 0.5, 0.99):
        assert value_at_risk(d, a) == c


def test_two_point_moments():
    assert mean_variance(DiscreteDistribution([0.0, 2.0], [0.5, 0.5])) == (1.0, 1.0)


def test_two_point_var_thresholds():
    d = DiscreteDistribution([0.0, 10.0], [0.9, 0.1])
    assert value_at_risk(d, 0.05) == 10.0
    assert value_at_risk(d, 0.10) == 0.0


def test_var_enumeration_oracle():
    # enumerate the definition over every candidate threshold
    g = np.random.default_rng(11)
    for _ in range(50):
        n = g.integers(1, 12)
        pts = np.sort(g.choice(np.arange(0, 40), size=n, replace=False)).astype(float)
        w = g.uniform(0.05, 1.0, n)
        d = DiscreteDistribution(pts, w / w.sum())
        for a in (0.01, 0.05, 0.2, 0.5):
            cands = [u for u in np.concatenate([[0.0], pts]) if d.mass[pts > u].sum() <= a]
            assert value_at_risk(d, a) == min(cands)


@pytest.mark.parametrize("a", [0.0, 1.0, -0.2])
def test_var_alpha_domain(a):
    with pytest.raises(DomainError):
        value_at_risk(DiscreteDistribution([1.0], [1.0]), a)


@given(discrete_laws(), st.lists(st.floats(0.001, 0.999), min_size=2, max_size=10))
def test_var_nonincreasing_in_alpha(d, alphas):
    alphas = sorted(alphas)
    vals = [value_at_risk(d, a) for a in alphas]
    assert all(b <= a for a, b in zip(vals[:-1], vals[1:]))


@given(discrete_laws(), st.floats(0.001, 0.999))
def test_var_is_support_point_or_zero(d, a):
    v = value_at_risk(d, a)
    assert v == 0.0 or v in d.support.tolist()
    assert v >= 0.0


def test_risk_report():
    d = DiscreteDistribution([0.0, 10.0], [0.9, 0.1])
    r = risk_report(d, 0.05)
    assert r.to_dict() == {"mean": 1.0, "variance": pytest.approx(9.0), "alpha": 0.05, "value_at_risk": 10.0}


def test_half_lognormal_grid_mean():
    x = discretize(standard_lognormal(), 40, 0.999)
    y1 = pushforward(x, half_map)
    assert abs(y1.mean - 0.5) <= 0.02 * 0.5


def _mu():
    a = DiscreteDistribution([0.5, 1.0, 2.0], [0.3, 0.5, 0.2])
    b = DiscreteDistribution([0.25, 3.0], [0.6, 0.4])
    return JointDistribution.product(a, b)


def test_full_reinsurance_retains_nothing():
    t = deterministic_treaty(_mu(), lambda x: x)
    law = retained_sum_law(t)
    assert law.support.tolist() == [0.0] and law.mass.tolist() == [1.0]


def test_no_reinsurance_retains_everything():
    mu = _mu()
    law = retained_sum_law(no_reinsurance(mu))
    x = mu.grids[0][:, None] + mu.grids[1][None, :]
    ref = DiscreteDistribution.from_samples(x.ravel(), mu.mass.ravel())
    assert np.allclose(law.support, ref.support) and np.allclose(law.mass, ref.mass)


def test_retained_orientation_uses_second_block():
    mu = _mu()
    f = lambda x: 0.3 * x
    t_re = deterministic_treaty(mu, f, "reinsured")
    t_ret = deterministic_treaty(mu, f, "retained")
    a, b = retained_sum_law(t_re), retained_sum_law(t_ret)
    assert np.allclose(a.support, b.support) and np.allclose(a.mass, b.mass)
    with pytest.raises(DomainError):
        retained_sum_law(t_re, "neither")


@given(st.floats(0.0, 1.0), st.floats(0.0, 3.0))
def test_linearity_of_means(a, d):
    mu = _mu()
    t = deterministic_treaty(mu, lambda x: np.maximum(a * x - d, 0.0))
    total = float((mu.grids[0][:, None] + mu.grids[1][None, :]).ravel() @ mu.mass.ravel())
    m_ret, _ = mean_variance(retained_sum_law(t))
    m_re, _ = mean_variance(reinsured_sum_law(t))
    assert abs(m_ret + m_re - total) <= 1e-10


def test_deterministic_reference_variance():
    # right-endpoint grid cut at the 0.99 quantile
    e = two_line_experiment(40, 0.99)
    _, v = mean_variance(reinsured_sum_law(e.det))
    assert abs(v - 1.05314) <= 1e-5
