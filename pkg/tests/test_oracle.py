import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparsitron_ggm import (
    DimensionMismatch,
    PrecisionModel,
    derive_params,
    draw_samples,
    expected_risk,
    generate_model,
    linf_bound,
    make_oracle,
    normalize_for_node,
    risk_identity_check,
)
from sparsitron_ggm.oracle import expected_risks


def test_zero_at_truth(two_node):
    oracle = make_oracle(two_node, 0)
    assert expected_risk(oracle, oracle.w) == 0.0
    assert linf_bound(oracle, oracle.w, 2.0) == 0.0


def test_two_node_hand_value(two_node):
    # (0.7 - 0.5)^2 * Sigma_22 with Sigma_22 = 2/3
    assert expected_risk(make_oracle(two_node, 0), [0.7]) == pytest.approx(0.04 * 2 / 3, abs=1e-15)


def test_dimension_mismatch(two_node):
    with pytest.raises(DimensionMismatch):
        expected_risk(make_oracle(two_node, 0), [0.1, 0.2])


def test_monte_carlo_cross_check(rng):
    model = generate_model(6, 3, (0.4, 0.6), seed=4)
    oracle = make_oracle(model, 2)
    v = oracle.w + rng.normal(scale=0.3, size=5)
    x = draw_samples(model, 1_000_000, seed=5).data
    others = np.arange(6) != 2
    mc = np.mean((x[:, others] @ (v - oracle.w)) ** 2)
    assert mc == pytest.approx(expected_risk(oracle, v), rel=0.01)


def test_xi_scale(two_node):
    oracle = make_oracle(two_node, 1, scale=0.2)
    assert oracle.xi == pytest.approx(0.04 / 2.0)


def _identity_case(model, i, v, M, seed):
    params = derive_params(model)
    view = normalize_for_node(draw_samples(model, M, seed), i, params, T=M, delta=0.1)
    oracle = make_oracle(model, i, scale=view.scale)
    sq = (view.x_tilde @ v - view.y_tilde) ** 2
    residual = risk_identity_check(oracle, v, view.x_tilde, view.y_tilde)
    return residual, 4 * sq.std(ddof=1) / math.sqrt(M)


def test_identity_at_truth():
    model = generate_model(5, 2, (0.4, 0.6), seed=1)
    residual, slack = _identity_case(model, 0, make_oracle(model, 0).w, 100_000, 3)
    assert residual <= slack


def test_identity_random_v(rng):
    model = generate_model(5, 2, (0.4, 0.6), seed=2)
    residual, slack = _identity_case(model, 3, rng.normal(size=4), 100_000, 4)
    assert residual <= slack


def test_identity_noiseless_limit():
    base = generate_model(4, 2, (0.4, 0.6), seed=3)
    model = PrecisionModel.from_theta(base.theta * 1e6)
    x = draw_samples(model, 1000, seed=1).data
    oracle = make_oracle(model, 0)
    a, b = x[:, 1:], x[:, 0]
    empirical = np.mean((a @ oracle.w - b) ** 2)
    assert empirical < 1e-5
    assert risk_identity_check(oracle, oracle.w, a, b) < 1e-5


def test_linf_bound_random_pairs(rng):
    for k in range(100):
        p = int(rng.integers(2, 12))
        model = generate_model(p, min(3, p - 1), (0.2, 0.6), seed=1000 + k)
        i = int(rng.integers(p))
        oracle = make_oracle(model, i)
        v = oracle.w + rng.normal(scale=rng.uniform(0.01, 1), size=p - 1)
        risk = expected_risk(oracle, v)
        theta_others = np.diag(model.theta)[np.arange(p) != i]
        # per-coordinate form, then the uniform theta_max form
        assert np.all(np.abs(v - oracle.w) <= np.sqrt(risk * theta_others) + 1e-12)
        assert np.abs(v - oracle.w).max() <= linf_bound(oracle, v, derive_params(model).theta_max) + 1e-12


def test_linf_one_dimensional(two_node):
    oracle = make_oracle(two_node, 0)
    v = np.array([0.9])
    # risk = (v-w)^2 Sigma_22, and theta_max * Sigma_22 = 4/3 >= 1
    assert linf_bound(oracle, v, 2.0) == pytest.approx(0.4 * math.sqrt(4 / 3), rel=1e-14)
    assert abs(v[0] - oracle.w[0]) <= linf_bound(oracle, v, 2.0)


@given(st.integers(0, 2**32), st.integers(2, 9))
def test_risk_is_nonnegative_quadratic(seed, p):
    rng = np.random.default_rng(seed)
    model = generate_model(p, min(2, p - 1), (0.2, 0.6), seed=seed)
    oracle = make_oracle(model, 0)
    vs = oracle.w + rng.normal(size=(20, p - 1))
    risks = expected_risks(oracle, vs)
    assert (risks >= 0).all()
    np.testing.assert_allclose(risks, [expected_risk(oracle, v) for v in vs], rtol=1e-10)
    assert expected_risk(oracle, oracle.w) == 0
