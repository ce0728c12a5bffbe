import itertools
import math

import numpy as np
import pytest

from sparsitron_ggm import (
    MalformedInput,
    ModelParams,
    NotPositiveDefinite,
    PrecisionModel,
    cholesky_lower,
    derive_params,
    draw_samples,
    generate_model,
    normalize_for_node,
    stream_source,
    weight_vector,
)
from sparsitron_ggm.sampler import (
    CHUNK_ROWS,
    SampleBlock,
    normalization_bound,
    read_samples_csv,
    write_samples_csv,
)


def test_cholesky_examples():
    np.testing.assert_array_equal(cholesky_lower(np.eye(3)), np.eye(3))
    sigma = np.array([[4.0, 2.0], [2.0, 5.0]])
    chol = cholesky_lower(sigma)
    np.testing.assert_allclose(chol, [[2.0, 0.0], [1.0, 2.0]], atol=1e-15)
    assert np.abs(chol @ chol.T - sigma).max() <= 1e-10
    with pytest.raises(NotPositiveDefinite):
        cholesky_lower([[1.0, 2.0], [2.0, 1.0]])


def test_identity_covariance():
    block = draw_samples(PrecisionModel.from_theta(np.eye(3)), 100_000, seed=1)
    assert np.abs(np.cov(block.data.T) - np.eye(3)).max() < 0.05
    assert np.abs(block.data.mean(axis=0)).max() < 0.02


def test_single_row():
    block = draw_samples(PrecisionModel.from_theta(np.eye(4)), 1, seed=0)
    assert block.data.shape == (1, 4)
    assert np.isfinite(block.data).all()


def test_two_node_regression(two_node):
    x = draw_samples(two_node, 100_000, seed=2).data
    slope = np.cov(x[:, 0], x[:, 1])[0, 1] / x[:, 1].var(ddof=1)
    resid = x[:, 0] - 0.5 * x[:, 1]
    assert slope == pytest.approx(0.5, abs=0.02)
    assert resid.var() == pytest.approx(1 / two_node.theta[0, 0], abs=0.02)


def test_conditional_decomposition():
    model = generate_model(6, 3, (0.4, 0.6), seed=8)
    x = draw_samples(model, 100_000, seed=9).data
    for i in range(model.p):
        others = np.arange(model.p) != i
        resid = x[:, i] - x[:, others] @ weight_vector(model, i)
        assert resid.var() == pytest.approx(1 / model.theta[i, i], rel=0.05)
        for j in np.flatnonzero(others):
            assert abs(np.corrcoef(resid, x[:, j])[0, 1]) < 0.02


def test_block_is_deterministic_and_read_only(two_node):
    a = draw_samples(two_node, 50, seed=4)
    b = draw_samples(two_node, 50, seed=4)
    assert a.data.tobytes() == b.data.tobytes()
    assert not a.data.flags.writeable
    # prefixes agree across block sizes
    c = draw_samples(two_node, 3 * CHUNK_ROWS + 7, seed=4)
    assert np.array_equal(c.data[:50], a.data)


def test_stream_matches_block():
    model = generate_model(5, 2, (0.3, 0.5), seed=1)
    block = draw_samples(model, 100, seed=6)
    pulled = np.array(list(itertools.islice(stream_source(model, 6), 100)))
    assert pulled.tobytes() == block.data.tobytes()


def test_two_streams_identical():
    model = generate_model(4, 2, (0.3, 0.5), seed=1)
    a, b = stream_source(model, 3), stream_source(model, 3)
    for _ in range(CHUNK_ROWS + 5):
        assert np.array_equal(next(a), next(b))


def test_interleaved_streams():
    model = generate_model(5, 2, (0.3, 0.5), seed=1)
    n = CHUNK_ROWS + 300
    s1, s2 = stream_source(model, 10), stream_source(model, 11)
    rows1, rows2 = [], []
    for k in range(n):
        rows1.append(next(s1))
        if k % 3:
            rows2.append(next(s2))
    assert np.array_equal(np.array(rows1), draw_samples(model, n, 10).data)
    assert np.array_equal(np.array(rows2), draw_samples(model, len(rows2), 11).data)


def test_normalization_bound_value():
    # frozen from an mpmath evaluation of sqrt(2 ln(2*10*1000/0.1))
    assert normalization_bound(10, 1000, 0.1) == pytest.approx(4.9408648323001457, abs=1e-12)


def test_normalize_lambda_zero():
    block = draw_samples(PrecisionModel.from_theta(np.eye(3)), 20, seed=0)
    params = ModelParams(kappa=None, lam=0.0, theta_max=1.0, nu_max=1.0)
    view = normalize_for_node(block, 1, params, T=20, delta=0.3)
    bound = normalization_bound(3, 20, 0.3)
    assert view.scale == pytest.approx(1 / bound, rel=1e-15)
    np.testing.assert_array_equal(view.y_tilde, view.scale * block.data[:, 1])
    np.testing.assert_array_equal(view.x_tilde, view.scale * block.data[:, [0, 2]])
    assert view.limit == 1.0


def test_normalize_zero_block(two_node_params):
    view = normalize_for_node(SampleBlock(np.zeros((5, 2))), 0, two_node_params, 5, 0.1)
    assert not view.x_tilde.any() and not view.y_tilde.any()
    assert not view.exceeds_limit()


def test_normalized_entries_bounded_mostly():
    model = generate_model(8, 2, (0.4, 0.6), seed=3)
    params = derive_params(model)
    T, delta, reps = 50, 0.2, 300
    hits = sum(
        normalize_for_node(draw_samples(model, T, seed=r), 0, params, T, delta).exceeds_limit()
        for r in range(reps)
    )
    # a single node sees a subset of the union-bounded events
    assert hits / reps <= delta + 3 * math.sqrt(delta / reps)


def test_csv_roundtrip_exact(tmp_path):
    model = generate_model(4, 2, (0.3, 0.5), seed=1)
    block = draw_samples(model, 37, seed=2)
    path = tmp_path / "s.csv"
    write_samples_csv(block, path)
    assert path.read_text().splitlines()[0] == "x0,x1,x2,x3"
    assert read_samples_csv(path).data.tobytes() == block.data.tobytes()


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("x0,x1\n1,2\n3\n", "row 3"),
        ("x0,x1\n1,abc\n", "row 2"),
        ("a,b\n1,2\n", "header"),
        ("", "empty"),
    ],
)
def test_csv_malformed(tmp_path, text, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(MalformedInput, match=fragment):
        read_samples_csv(path)
