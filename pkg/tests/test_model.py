import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparsitron_ggm import (
    EmptyGraph,
    InfeasibleDegree,
    NotPositiveDefinite,
    PrecisionModel,
    derive_params,
    generate_model,
    load_model,
    save_model,
    weight_vector,
)
from sparsitron_ggm.model import model_from_dict, model_to_dict


def test_params_two_node(two_node):
    params = derive_params(two_node)
    assert params.kappa == pytest.approx(0.5, abs=1e-15)
    assert params.lam == pytest.approx(0.5, abs=1e-15)
    assert params.theta_max == 2.0
    assert params.d == 1
    # Sigma = (1/3) [[2, 1], [1, 2]] by hand
    assert params.nu_max == pytest.approx(2 / 3, abs=1e-14)
    np.testing.assert_allclose(two_node.sigma, np.array([[2, 1], [1, 2]]) / 3, atol=1e-14)


def test_params_identity():
    model = PrecisionModel.from_theta(np.eye(4))
    params = derive_params(model)
    assert model.edges == ()
    assert params.kappa is None
    assert params.lam == 0.0
    assert params.theta_max == 1.0
    assert params.nu_max == 1.0
    with pytest.raises(EmptyGraph):
        params.require_kappa()


def test_not_positive_definite():
    with pytest.raises(NotPositiveDefinite):
        PrecisionModel.from_theta([[1.0, 2.0], [2.0, 1.0]])


def test_weight_vector_examples(two_node):
    np.testing.assert_array_equal(weight_vector(two_node, 0), [0.5])
    np.testing.assert_array_equal(weight_vector(PrecisionModel.from_theta(np.eye(3)), 1), [0.0, 0.0])
    model = PrecisionModel.from_theta([[4, 1, -2], [1, 4, 0], [-2, 0, 4]])
    np.testing.assert_array_equal(weight_vector(model, 0), [-0.25, 0.5])
    with pytest.raises(IndexError):
        weight_vector(model, 3)


def test_generate_single_edge():
    model = generate_model(2, 1, (0.5, 0.5), seed=3)
    assert model.edges == ((0, 1),)
    assert abs(derive_params(model).kappa - 0.5) <= 1e-9


def test_generate_no_edges():
    model = generate_model(5, 0, (0.3, 0.5), seed=1)
    assert model.edges == ()
    assert np.count_nonzero(model.theta - np.diag(np.diag(model.theta))) == 0


def test_generate_deterministic():
    a = generate_model(12, 3, (0.4, 0.6), seed=11)
    b = generate_model(12, 3, (0.4, 0.6), seed=11)
    c = generate_model(12, 3, (0.4, 0.6), seed=12)
    assert a.theta.tobytes() == b.theta.tobytes()
    assert a != c


@pytest.mark.parametrize("degree", [5, 6, -1])
def test_infeasible_degree(degree):
    with pytest.raises(InfeasibleDegree):
        generate_model(5, degree, (0.4, 0.6), seed=0)


@given(
    p=st.integers(2, 25),
    degree_frac=st.floats(0, 1),
    lo=st.floats(0.05, 0.6),
    width=st.floats(0, 0.3),
    seed=st.integers(0, 2**32),
)
def test_generated_model_invariants(p, degree_frac, lo, width, seed):
    degree = min(p - 1, int(round(degree_frac * 4)))
    rng_range = (lo, lo + width)
    model = generate_model(p, degree, rng_range, seed)
    theta = model.theta
    assert np.array_equal(theta, theta.T)
    assert np.linalg.eigvalsh(theta).min() > 0
    assert np.abs(theta @ model.sigma - np.eye(p)).max() <= 1e-8
    support = {(i, j) for i in range(p) for j in range(i + 1, p) if theta[i, j] != 0}
    assert set(model.edges) == support
    assert model.degrees().max(initial=0) <= degree
    params = derive_params(model)
    assert params.theta_max == np.diag(theta).max()
    assert params.theta_max >= np.abs(theta).max()
    if model.edges:
        assert rng_range[0] - 1e-9 <= params.kappa <= rng_range[1] + 1e-9
        assert 0 < params.kappa <= 1
        assert params.lam >= params.kappa * params.d
    for i in range(p):
        others = [j for j in range(p) if j != i]
        assert np.array_equal(weight_vector(model, i), np.array([-theta[i, j] / theta[i, i] for j in others]))


def test_large_model_inverse():
    model = generate_model(200, 3, (0.4, 0.6), seed=5)
    assert np.abs(model.theta @ model.sigma - np.eye(200)).max() <= 1e-8


def test_model_json_roundtrip(tmp_path):
    model = generate_model(7, 2, (0.3, 0.5), seed=2)
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.theta.tobytes() == model.theta.tobytes()
    data = json.loads(path.read_text())
    assert data["p"] == 7
    assert len(data["theta"]) == 49
    assert data["params"]["kappa"] == derive_params(model).kappa
    assert model_from_dict(model_to_dict(model)) == model
