import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramsey_gauss import graph
from ramsey_gauss.exceptions import DomainError
from ramsey_gauss.graph import BARTLETT, DIRECT
from ramsey_gauss.params import build_params

# mpmath chi-square integral of E[Phi(c_p / |x1|)], p = 0.25, d = 400
EDGE_PROB_P25_D400 = 0.75034112978076876


def p25(d):
    return build_params(2.0, 100, math.sqrt(d) / 100, p_override=0.25)


def test_direct_sample_shape_and_readonly(rng):
    vs = graph.sample_direct(p25(400), 7, rng)
    assert vs.vectors.shape == (7, 400)
    with pytest.raises(ValueError):
        vs.vectors[0, 0] = 1.0


def test_graph_symmetric_no_loops(rng):
    params = p25(400)
    g = graph.build_graph(graph.sample_direct(params, 60, rng), params)
    assert np.array_equal(g.adjacency, g.adjacency.T)
    assert not g.adjacency.diagonal().any()
    assert np.array_equal(g.gram, g.gram.T)
    iu = np.triu_indices(60, 1)
    assert np.array_equal(g.adjacency[iu], g.gram[iu] >= params.threshold)


def test_large_graph_blockwise_matches_threshold(rng):
    params = build_params(2.0, 1, 4.0, p_override=0.25)  # d = 16
    vs = graph.sample_direct(params, graph.GRAM_MAX_N + 10, rng)
    g = graph.build_graph(vs, params)
    assert g.gram is None
    assert np.array_equal(g.adjacency, g.adjacency.T)
    V = np.asarray(vs.vectors)
    i, j = 5, graph.GRAM_MAX_N + 3
    assert g.adjacency[i, j] == (V[i] @ V[j] >= params.threshold)


@pytest.mark.parametrize("model", [DIRECT, BARTLETT])
def test_edge_probability_matches_oracle(model):
    params = p25(400)
    rng = np.random.default_rng(11)
    n = 400_000
    g = graph.gram_batch(400, 2, n, rng, model)
    frac = float(np.mean(g[:, 0, 1] >= params.threshold))
    se = math.sqrt(EDGE_PROB_P25_D400 * (1 - EDGE_PROB_P25_D400) / n)
    assert abs(frac - EDGE_PROB_P25_D400) < 4 * se


def test_bartlett_structure(rng):
    vs = graph.sample_bartlett(p25(400), 5, rng)
    L = np.asarray(vs.vectors)
    assert L.shape == (5, 5)
    assert np.allclose(np.triu(L, 1), 0)
    assert np.all(np.diag(L) > 0)
    with pytest.raises(DomainError):
        graph.sample_bartlett(p25(400), 401, rng)


def test_bartlett_diagonal_mean():
    rng = np.random.default_rng(3)
    g = graph.gram_batch(400, 3, 200_000, rng, BARTLETT)
    # |y_i|^2 = (chi2_{i-1} + chi2_{d-i+1}) / d has mean 1 and variance 2/d
    se = math.sqrt(2 / 400 / 200_000)
    for i in range(3):
        assert abs(g[:, i, i].mean() - 1.0) < 4 * se


def test_clique_and_independent_set():
    params = p25(400)
    adj = np.zeros((4, 4), dtype=bool)
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        adj[i, j] = adj[j, i] = True
    g = graph.GraphSample(None, adj, params)
    assert graph.is_clique(g, [0, 1, 2])
    assert not graph.is_clique(g, [0, 1, 3])
    assert graph.is_independent_set(g, [3])
    assert graph.is_independent_set(g, [0, 3]) and not graph.is_independent_set(g, [0, 1])


def test_edge_list_format(rng):
    params = p25(400)
    g = graph.build_graph(graph.sample_direct(params, 12, rng), params)
    edges = graph.edge_list(g)
    assert edges == sorted(edges)
    assert all(i < j for i, j in edges)
    buf = io.StringIO()
    graph.write_edge_list(g, buf)
    assert buf.getvalue().splitlines() == [f"{i} {j}" for i, j in edges]


def test_same_seed_same_graph():
    params = p25(400)
    g1 = graph.build_graph(graph.sample_direct(params, 20, np.random.default_rng(9)), params)
    g2 = graph.build_graph(graph.sample_direct(params, 20, np.random.default_rng(9)), params)
    assert np.array_equal(g1.adjacency, g2.adjacency)


def test_perfect_orthonormal_rows():
    params = build_params(2.0, 1, 10.0, p_override=0.25)  # d = 100
    vs = graph.VectorSample(np.eye(100)[:10].copy())
    ok, fail = graph.is_perfect(vs, params, delta=0.1, proj_limit=1e-9)
    assert ok and fail is None


def test_perfect_reports_first_failure():
    params = build_params(2.0, 1, 10.0, p_override=0.25)
    V = np.eye(100)[:4].copy()
    V[2] = (V[0] + V[1]) / math.sqrt(2)  # in the span of its predecessors
    ok, fail = graph.is_perfect(graph.VectorSample(V), params, delta=0.1, proj_limit=0.5)
    assert not ok
    assert (fail.index, fail.condition) == (2, "projection")
    assert fail.value == pytest.approx(1.0)
    V = V.copy()
    V[1] *= 2.0
    ok, fail = graph.is_perfect(graph.VectorSample(V), params, delta=0.1, proj_limit=0.5)
    assert (fail.index, fail.condition) == (1, "norm")


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31), st.integers(min_value=2, max_value=30))
def test_extracted_subsequence_is_perfect(seed, n):
    params = build_params(2.0, 1, 8.0, p_override=0.25)  # d = 64
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((n, 64)) / 8.0
    V[rng.random(n) < 0.3] *= 1.5
    vs = graph.VectorSample(V)
    kw = dict(delta=0.2, proj_limit=0.6)
    kept = graph.extract_perfect_subsequence(vs, params, **kw)
    assert kept == sorted(kept)
    ok, _ = graph.is_perfect(graph.VectorSample(V[kept].copy()), params, **kw)
    assert ok


def test_projection_matches_lstsq(rng):
    # incremental Gram-Schmidt projection norm vs a least-squares projection
    A = rng.standard_normal((6, 50))
    x = rng.standard_normal(50)
    basis = graph._IncrementalBasis(50)
    for row in A:
        _, resid = basis.project(row)
        basis.add(resid, np.linalg.norm(row))
    proj, _ = basis.project(x)
    coef, *_ = np.linalg.lstsq(A.T, x, rcond=None)
    assert proj == pytest.approx(np.linalg.norm(A.T @ coef), rel=1e-12)


def test_rejects_huge_direct_sample(rng):
    with pytest.raises(DomainError):
        graph.sample_direct(build_params(2.0, 100, 100.0), 10, rng)
