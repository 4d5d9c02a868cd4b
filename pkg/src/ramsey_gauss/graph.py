"""Gaussian random graph G(n, d, p): samplers, adjacency and predicates.

Vertices are vectors with i.i.d. N(0, 1/d) coordinates; ``i ~ j`` iff
``<x_i, x_j> >= -c_p / sqrt(d)`` (edge on equality).  Non-edges are the
red colour, edges the blue one.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DomainError
from .params import ModelParams

__all__ = [
    "DIRECT", "BARTLETT", "VectorSample", "GraphSample", "PerfectFailure",
    "sample_direct", "sample_bartlett", "gram_batch", "build_graph",
    "is_independent_set", "is_clique", "is_perfect",
    "extract_perfect_subsequence", "edge_list", "write_edge_list",
]

DIRECT = "direct"
BARTLETT = "bartlett"

# gram matrices above this size are not materialised
GRAM_MAX_N = 4096
_MAX_ELEMENTS = 50_000_000


@dataclass(frozen=True)
class VectorSample:
    """Sampled vectors, one per row.

    Bartlett samples store only the leading ``r x r`` block; every later
    coordinate is identically zero, so inner products are unaffected.
    The array is frozen in place (no copy), so pass one you own.
    """

    vectors: np.ndarray
    model: str = DIRECT

    def __post_init__(self):
        self.vectors.setflags(write=False)

    @property
    def n(self):
        return self.vectors.shape[0]


@dataclass(frozen=True)
class GraphSample:
    gram: Optional[np.ndarray]
    adjacency: np.ndarray
    params: ModelParams

    @property
    def n(self):
        return self.adjacency.shape[0]


def sample_direct(params: ModelParams, n, rng) -> VectorSample:
    """``n`` independent vectors from N(0, I_d / d)."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n!r}")
    if n * params.d > _MAX_ELEMENTS:
        raise DomainError(f"n * d = {n * params.d} exceeds {_MAX_ELEMENTS}; use gram_batch for Monte Carlo")
    return VectorSample(rng.standard_normal((n, params.d)) / math.sqrt(params.d), DIRECT)


def _bartlett_rows(d, r, rng, batch=None):
    """Lower-triangular Bartlett factor(s); ``batch=None`` gives one ``r x r``."""
    shape = () if batch is None else (batch,)
    L = np.zeros(shape + (r, r))
    scale = math.sqrt(d)
    for i in range(r):
        L[..., i, :i] = rng.standard_normal(shape + (i,)) / scale
        # chi2 with d - i degrees of freedom (row i is 0-based) as gamma(k/2, 2)
        L[..., i, i] = np.sqrt(rng.gamma((d - i) / 2.0, 2.0, size=shape) / d)
    return L


def sample_bartlett(params: ModelParams, r, rng) -> VectorSample:
    """Bartlett vectors ``y_1..y_r``: row ``i`` has ``i-1`` N(0, 1/d)
    coordinates, then ``sqrt(chi2_{d-i+1} / d)``, then zeros."""
    if not 1 <= r <= params.d:
        raise DomainError(f"need 1 <= r <= d, got r={r!r}, d={params.d}")
    return VectorSample(_bartlett_rows(params.d, r, rng), BARTLETT)


def gram_batch(d, r, trials, rng, model=DIRECT):
    """``trials`` independent ``r x r`` Gram matrices, shape ``(trials, r, r)``.

    Both models have the same joint law; ``bartlett`` costs ``O(r**2)`` per
    trial instead of ``O(r d)``.
    """
    if model == BARTLETT:
        if r > d:
            raise DomainError(f"need r <= d, got r={r}, d={d}")
        L = _bartlett_rows(d, r, rng, batch=trials)
    elif model == DIRECT:
        L = rng.standard_normal((trials, r, d)) / math.sqrt(d)
    else:
        raise ValueError(f"unknown model {model!r}")
    return L @ L.transpose(0, 2, 1)


def build_graph(sample: VectorSample, params: ModelParams) -> GraphSample:
    """Threshold inner products at ``-c_p / sqrt(d)``.

    For ``n > 4096`` the Gram matrix is not kept; adjacency is filled in row
    blocks.
    """
    V = np.asarray(sample.vectors)
    n = V.shape[0]
    thr = params.threshold
    if n <= GRAM_MAX_N:
        g = V @ V.T
        # mirror the upper triangle so symmetry is exact
        gram = np.triu(g) + np.triu(g, 1).T
        adj = gram >= thr
        np.fill_diagonal(adj, False)
        gram.setflags(write=False)
        return GraphSample(gram, adj, params)
    adj = np.zeros((n, n), dtype=bool)
    for start in range(0, n, 1024):
        block = V[start:start + 1024] @ V.T
        adj[start:start + 1024] = block >= thr
    adj = np.triu(adj, 1)
    adj = adj | adj.T
    return GraphSample(None, adj, params)


def _pairs(subset):
    idx = np.asarray(sorted(set(int(i) for i in subset)), dtype=int)
    return np.ix_(idx, idx), idx.size


def is_independent_set(g: GraphSample, subset):
    """No edge between any two vertices of ``subset`` (a red clique)."""
    sel, k = _pairs(subset)
    return k < 2 or not g.adjacency[sel].any()


def is_clique(g: GraphSample, subset):
    """Every pair of ``subset`` adjacent (a blue clique)."""
    sel, k = _pairs(subset)
    if k < 2:
        return True
    sub = g.adjacency[sel]
    return bool(sub.sum() == k * (k - 1))


@dataclass(frozen=True)
class PerfectFailure:
    index: int
    condition: str  # "norm" or "projection"
    value: float
    limit: float


class _IncrementalBasis:
    """Orthonormal basis grown one vector at a time (modified Gram-Schmidt
    with one reorthogonalisation pass)."""

    def __init__(self, dim):
        self.Q = np.empty((0, dim))

    def project(self, x):
        """Return (norm of the projection onto the span, residual)."""
        coeff_sq = 0.0
        resid = np.array(x, dtype=float)
        total = np.zeros(self.Q.shape[0])
        for _ in range(2):
            c = np.empty(self.Q.shape[0])
            for k, q in enumerate(self.Q):
                c[k] = q @ resid
                resid -= c[k] * q
            total += c
        coeff_sq = float(total @ total)
        return math.sqrt(coeff_sq), resid

    def add(self, resid, scale):
        nrm = np.linalg.norm(resid)
        # a vector already in the span adds no direction
        if nrm > 1e-12 * max(scale, 1e-300):
            self.Q = np.vstack([self.Q, resid / nrm])


def _limits(params, delta, proj_limit):
    if delta is None:
        delta = params.delta
    if proj_limit is None:
        proj_limit = params.alpha * math.sqrt(params.ell) / math.sqrt(params.d)
    return delta, proj_limit


def is_perfect(sample: VectorSample, params: ModelParams, *, delta=None, proj_limit=None):
    """Check the two perfect-sequence conditions row by row.

    Row ``i`` needs ``|x_i|`` in ``(1 - delta, 1 + delta)`` and the projection
    of ``x_i`` onto the span of ``x_1..x_{i-1}`` to have norm at most
    ``alpha sqrt(ell) / sqrt(d)``.  ``delta`` and ``proj_limit`` override the
    values derived from ``params``.

    Returns
    -------
    (bool, PerfectFailure or None)
        The first violated condition, if any.
    """
    delta, proj_limit = _limits(params, delta, proj_limit)
    V = np.asarray(sample.vectors)
    basis = _IncrementalBasis(V.shape[1])
    for i, x in enumerate(V):
        nrm = float(np.linalg.norm(x))
        if not 1.0 - delta < nrm < 1.0 + delta:
            return False, PerfectFailure(i, "norm", nrm, delta)
        proj, resid = basis.project(x)
        if proj > proj_limit:
            return False, PerfectFailure(i, "projection", proj, proj_limit)
        basis.add(resid, nrm)
    return True, None


def extract_perfect_subsequence(sample: VectorSample, params: ModelParams, *, delta=None, proj_limit=None):
    """Greedy scan in index order keeping rows that satisfy both conditions
    relative to the rows kept so far.  The kept rows form a perfect sequence."""
    delta, proj_limit = _limits(params, delta, proj_limit)
    V = np.asarray(sample.vectors)
    basis = _IncrementalBasis(V.shape[1])
    kept = []
    for i, x in enumerate(V):
        nrm = float(np.linalg.norm(x))
        if not 1.0 - delta < nrm < 1.0 + delta:
            continue
        proj, resid = basis.project(x)
        if proj > proj_limit:
            continue
        basis.add(resid, nrm)
        kept.append(i)
    return kept


def edge_list(g: GraphSample):
    """Edges as ``(i, j)`` pairs, ``i < j``, 0-indexed, lexicographic."""
    i, j = np.nonzero(np.triu(g.adjacency, 1))
    return list(zip(i.tolist(), j.tolist()))


def write_edge_list(g: GraphSample, fh):
    """Write one ``"i j"`` line per edge."""
    for i, j in edge_list(g):
        fh.write(f"{i} {j}\n")
