"""Monte Carlo estimates of clique probabilities and empirical checks of
the truncated-Gaussian and concentration inequalities.

Trials are split into fixed-size blocks; block ``i`` draws from its own
stream seeded by ``(seed, experiment tag, i)``.  Only integer counts and
per-block sums are aggregated, so results do not depend on how many
threads run the blocks (``RAMSEY_GAUSS_THREADS``).
"""

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np
from scipy import stats

from . import specfn, truncgauss
from .exceptions import DomainError
from .graph import BARTLETT, DIRECT, gram_batch
from .params import ModelParams, beta_quad

__all__ = [
    "HMS_RED", "NEW_RED", "BLUE", "CONSISTENT", "VIOLATED", "INCONCLUSIVE",
    "McEstimate", "BoundComparison", "clopper_pearson", "n_threads",
    "estimate_cliques", "estimate_red", "estimate_blue", "log_bound",
    "in_mc_range", "compare_to_bound", "verify_cgf_empirical",
    "verify_mean_shift", "square_mgf_bound", "quadratic_mgf_bound",
    "refined_variance_factor", "bartlett_equivalence",
    "verify_norm_concentration", "verify_projection_tail", "make_record",
    "write_records",
]

HMS_RED = "HmsRed"
NEW_RED = "NewRed"
BLUE = "Blue"

CONSISTENT = "ConsistentBelow"
VIOLATED = "Violated"
INCONCLUSIVE = "Inconclusive"

BLOCK_SIZE = 100_000
MIN_EXPECTED_SUCCESSES = 50
# elements per drawn chunk inside one block, bounds memory
_CHUNK_ELEMENTS = 4_000_000

# one independent stream family per experiment
_STREAMS = {"cliques": 1, "cgf": 2, "mean_shift": 3, "bartlett_direct": 4,
            "bartlett_bartlett": 5, "norm": 6, "projection": 7}


def n_threads():
    env = os.environ.get("RAMSEY_GAUSS_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("RAMSEY_GAUSS_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def _block_rng(seed, stream, block):
    return np.random.default_rng(np.random.SeedSequence([int(seed), _STREAMS[stream], block]))


def _run_blocks(kernel, trials, seed, stream, block_size=BLOCK_SIZE):
    """Apply ``kernel(rng, n)`` to every block; results in block order."""
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials!r}")
    if seed < 0:
        raise DomainError("seed must be a non-negative integer")
    sizes = [min(block_size, trials - s) for s in range(0, trials, block_size)]

    def run(i):
        return kernel(_block_rng(seed, stream, i), sizes[i])

    workers = min(n_threads(), len(sizes))
    if workers == 1:
        return [run(i) for i in range(len(sizes))]
    with ThreadPoolExecutor(workers) as ex:
        return list(ex.map(run, range(len(sizes))))


def clopper_pearson(successes, trials, level=0.99):
    """Exact binomial interval.  At 0 (or ``trials``) successes the open end
    uses the one-sided exact bound ``1 - (1 - level)**(1/n)``."""
    alpha = 1.0 - level
    if successes == 0:
        return 0.0, 1.0 - alpha ** (1.0 / trials)
    if successes == trials:
        return alpha ** (1.0 / trials), 1.0
    lo = stats.beta.ppf(alpha / 2, successes, trials - successes + 1)
    hi = stats.beta.ppf(1 - alpha / 2, successes + 1, trials - successes)
    return float(lo), float(hi)


@dataclass(frozen=True)
class McEstimate:
    trials: int
    successes: int
    p_hat: float
    ci_low: float
    ci_high: float
    seed: int
    level: float = 0.99

    @classmethod
    def from_counts(cls, successes, trials, seed, level=0.99):
        lo, hi = clopper_pearson(successes, trials, level)
        p_hat = successes / trials
        return cls(int(trials), int(successes), p_hat, min(lo, p_hat), max(hi, p_hat), int(seed), level)


def estimate_cliques(params: ModelParams, r, trials, seed, sampler=DIRECT):
    """Red (independent set) and blue (clique) estimates for ``r`` vertices,
    counted on the same draws.

    Returns
    -------
    (McEstimate, McEstimate)
        red, blue
    """
    if r < 2:
        raise DomainError(f"r must be >= 2, got {r!r}")
    if sampler not in (DIRECT, BARTLETT):
        raise ValueError(f"unknown sampler {sampler!r}")
    d, thr = params.d, params.threshold
    iu = np.triu_indices(r, 1)
    per_trial = r * (d if sampler == DIRECT else r)
    chunk = max(1, _CHUNK_ELEMENTS // per_trial)

    def kernel(rng, n):
        red = blue = 0
        for start in range(0, n, chunk):
            g = gram_batch(d, r, min(chunk, n - start), rng, sampler)
            edges = g[:, iu[0], iu[1]] >= thr
            red += int(np.count_nonzero(~edges.any(axis=1)))
            blue += int(np.count_nonzero(edges.all(axis=1)))
        return red, blue

    counts = _run_blocks(kernel, trials, seed, "cliques")
    red = sum(c[0] for c in counts)
    blue = sum(c[1] for c in counts)
    return McEstimate.from_counts(red, trials, seed), McEstimate.from_counts(blue, trials, seed)


def estimate_red(params, r, trials, seed, sampler=DIRECT):
    """Fraction of ``r``-vertex samples that form an independent set."""
    return estimate_cliques(params, r, trials, seed, sampler)[0]


def estimate_blue(params, r, trials, seed, sampler=DIRECT):
    """Fraction of ``r``-vertex samples that form a clique."""
    return estimate_cliques(params, r, trials, seed, sampler)[1]


@dataclass(frozen=True)
class BoundComparison:
    estimate: McEstimate
    bound_value: float
    log_bound: float
    bound_name: str
    verdict: str
    in_range: bool
    K: float = 0.0
    notes: tuple = field(default=("O(D^-1) r^4/d slack term dropped",))


def log_bound(params: ModelParams, r, variant, K=0.0):
    """log of the perfect-sequence probability bound for ``r`` vertices.

    ``HmsRed``: ``C(r,2) log p - a^3/(p^3 sqrt d) C(r,3) + K r^3/(D sqrt d)``;
    ``NewRed`` additionally subtracts ``beta_quad(p) r^4/d``;
    ``Blue``: ``C(r,2) log(1-p) + a^3/((1-p)^3 sqrt d) C(r,3) + K r^3/(D sqrt d)``.
    """
    p, a, d, D = params.p, params.a, params.d, params.D
    sd = math.sqrt(d)
    pairs, triples = math.comb(r, 2), math.comb(r, 3)
    k_term = K * r ** 3 / (D * sd)
    if variant in (HMS_RED, NEW_RED):
        out = pairs * math.log(p) - a ** 3 / (p ** 3 * sd) * triples + k_term
        if variant == NEW_RED:
            out -= beta_quad(p) * r ** 4 / d
        return out
    if variant == BLUE:
        return pairs * math.log1p(-p) + a ** 3 / ((1 - p) ** 3 * sd) * triples + k_term
    raise ValueError(f"unknown bound variant {variant!r}")


def in_mc_range(params, r, trials, variant=HMS_RED):
    """Whether independent-edge odds give at least 50 expected successes."""
    q = params.p if variant in (HMS_RED, NEW_RED) else 1.0 - params.p
    return q ** math.comb(r, 2) * trials >= MIN_EXPECTED_SUCCESSES


def compare_to_bound(est: McEstimate, params, r, variant, K=0.0) -> BoundComparison:
    """Classify an estimate against an upper bound.

    ``Violated`` iff the lower confidence limit exceeds the bound; otherwise
    ``ConsistentBelow``, or ``Inconclusive`` when the trial count is out of
    Monte Carlo range.
    """
    lb = log_bound(params, r, variant, K)
    bound = math.exp(lb) if lb < 700 else math.inf
    in_range = in_mc_range(params, r, est.trials, variant)
    if est.ci_low > bound:
        verdict = VIOLATED
    elif in_range:
        verdict = CONSISTENT
    else:
        verdict = INCONCLUSIVE
    return BoundComparison(est, bound, lb, variant, verdict, in_range, float(K))


# --- truncated Gaussian checks ---------------------------------------------

def _jackknife_log_mean(x):
    """log(mean(x)) and its jackknife standard error, in O(n)."""
    n = x.size
    total = x.sum()
    theta = math.log(total / n)
    loo = np.log((total - x) / (n - 1))
    se = math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))
    return theta, se


def verify_cgf_empirical(b, u_grid, trials, seed):
    """Monte Carlo ``log E[exp(u Y)]`` for ``Y = Z - E[Z | Z <= b]``.

    Each row passes when the estimate is at most the analytic CGF plus
    3 standard errors, the analytic CGF is at most the quadratic bound, and
    the estimate is at most the quadratic bound plus 3 standard errors.
    """
    dist = truncgauss.TruncatedGaussian(float(b), truncgauss.UPPER)
    mean = truncgauss.trunc_mean(dist)
    draws = np.concatenate(_run_blocks(
        lambda rng, n: truncgauss.sample(dist, rng, n), trials, seed, "cgf"))
    y = draws - mean
    rows = []
    for u in u_grid:
        u = float(u)
        if u < 0:
            raise DomainError("u_grid must be non-negative")
        if u == 0.0:
            est, se = 0.0, 0.0
        else:
            est, se = _jackknife_log_mean(np.exp(u * y))
        analytic = truncgauss.cgf(dist, u)
        bound = truncgauss.cgf_quadratic_bound(dist, u)
        rows.append({
            "u": u, "estimate": est, "se": se, "cgf": analytic, "bound": bound,
            "z_vs_cgf": (est - analytic) / se if se > 0 else 0.0,
            "passed": bool(est <= analytic + 3 * se and analytic <= bound + 1e-12
                           and est <= bound + 3 * se),
        })
    return {"b": float(b), "trials": int(trials), "seed": int(seed), "rows": rows,
            "passed": all(r["passed"] for r in rows)}


def verify_mean_shift(params: ModelParams, trials, seed, cutoff_shift=0.0):
    """Empirical mean of an N(0, 1/d) coordinate conditioned to lie below
    ``(-c_p + cutoff_shift)/sqrt(d)``, against ``-a/(p sqrt d)``.

    With ``cutoff_shift = 0`` the target is exact; otherwise it carries the
    ``O(cutoff_shift / sqrt d)`` error.
    """
    sd = math.sqrt(params.d)
    dist = truncgauss.TruncatedGaussian(-params.c_p + cutoff_shift, truncgauss.UPPER)
    x = np.concatenate(_run_blocks(
        lambda rng, n: truncgauss.sample(dist, rng, n), trials, seed, "mean_shift")) / sd
    target = -params.a / (params.p * sd)
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(x.size))
    return {"mean": mean, "se": se, "target": target, "z": (mean - target) / se,
            "passed": bool(abs(mean - target) <= 3 * se), "trials": int(trials), "seed": int(seed)}


# --- reference subgaussian bounds ------------------------------------------

def square_mgf_bound(sigma2, lam):
    """``E[exp(lam X^2)] <= 1 + 4 lam s2 / (1 - 2 lam s2)`` for centred X with
    variance proxy ``s2`` and ``0 <= lam < 1/(2 s2)``."""
    if not (sigma2 > 0 and 0 <= lam < 1.0 / (2.0 * sigma2)):
        raise DomainError("need sigma2 > 0 and 0 <= lam < 1/(2 sigma2)")
    return 1.0 + 4.0 * lam * sigma2 / (1.0 - 2.0 * lam * sigma2)


def quadratic_mgf_bound(lam, k, d, mean_S=0.0, sum_sq_means=0.0):
    """Bound on ``E[exp(lam S)]``, ``S = sum_{i<j} X_i X_j`` over ``k``
    independent variables with variance proxy ``1/d``; requires
    ``d >= 4 |lam| k``."""
    if not d >= 4 * abs(lam) * k:
        raise DomainError("need d >= 4 |lam| k")
    return math.exp(lam * mean_S + lam ** 2 * k ** 2 / d * sum_sq_means + 4 * abs(lam) * k / d)


def refined_variance_factor(p):
    """``1 - gamma(p)``: the factor replacing 1 in the variance term once the
    centred truncated coordinate's true variance is used."""
    return 1.0 - truncgauss.gamma_p(p)


# --- representation and concentration checks -------------------------------

def _pattern_counts(params, r, trials, seed, model):
    d, thr = params.d, params.threshold
    iu = np.triu_indices(r, 1)
    n_edges = iu[0].size
    weights = 1 << np.arange(n_edges)
    per_trial = r * (d if model == DIRECT else r)
    chunk = max(1, _CHUNK_ELEMENTS // per_trial)

    def kernel(rng, n):
        counts = np.zeros(1 << n_edges, dtype=np.int64)
        ips = []
        for start in range(0, n, chunk):
            g = gram_batch(d, r, min(chunk, n - start), rng, model)
            edges = g[:, iu[0], iu[1]] >= thr
            counts += np.bincount(edges.astype(np.int64) @ weights, minlength=1 << n_edges)
            ips.append(g[:, 0, 1].copy())
        return counts, np.concatenate(ips)

    out = _run_blocks(kernel, trials, seed, f"bartlett_{model}")
    return sum(c for c, _ in out), np.concatenate([ip for _, ip in out])


def bartlett_equivalence(params: ModelParams, r, trials, seed, z_max=4.0, ks_level=1e-3):
    """Compare direct and Bartlett samplers on all ``2**C(r,2)`` edge
    patterns (two-sample z within ``z_max``) and on the law of
    ``<v_1, v_2>`` (two-sample KS, not rejected at ``ks_level``)."""
    if r < 2 or r > params.d:
        raise DomainError("need 2 <= r <= d")
    c_dir, ip_dir = _pattern_counts(params, r, trials, seed, DIRECT)
    c_bar, ip_bar = _pattern_counts(params, r, trials, seed, BARTLETT)
    p1, p2 = c_dir / trials, c_bar / trials
    se = np.sqrt(p1 * (1 - p1) / trials + p2 * (1 - p2) / trials)
    z = np.where(se > 0, (p1 - p2) / np.where(se > 0, se, 1.0), 0.0)
    ks = stats.ks_2samp(ip_dir, ip_bar)
    return {
        "r": int(r), "d": int(params.d), "p": params.p, "trials": int(trials), "seed": int(seed),
        "patterns": [{"pattern": int(i), "direct": float(a), "bartlett": float(b), "z": float(zz)}
                     for i, (a, b, zz) in enumerate(zip(p1, p2, z))],
        "max_abs_z": float(np.max(np.abs(z))),
        "ks_statistic": float(ks.statistic), "ks_pvalue": float(ks.pvalue),
        "passed": bool(np.max(np.abs(z)) <= z_max and ks.pvalue >= ks_level),
    }


def verify_norm_concentration(d, delta, trials, seed):
    """Fraction of N(0, I/d) vectors with norm in ``(1 - delta, 1 + delta)``
    against ``1 - 2 exp(-delta^2 d / 10)``."""
    chunk = max(1, _CHUNK_ELEMENTS // d)

    def kernel(rng, n):
        inside = 0
        for start in range(0, n, chunk):
            x = rng.standard_normal((min(chunk, n - start), d))
            nrm = np.sqrt(np.einsum("ij,ij->i", x, x) / d)
            inside += int(np.count_nonzero((nrm > 1 - delta) & (nrm < 1 + delta)))
        return inside

    hits = sum(_run_blocks(kernel, trials, seed, "norm"))
    frac = hits / trials
    se = math.sqrt(frac * (1 - frac) / trials)
    bound = 1.0 - 2.0 * math.exp(-delta * delta * d / 10.0)
    return {"fraction": frac, "se": se, "bound": bound, "trials": int(trials), "seed": int(seed),
            "passed": bool(frac >= bound - 3 * se)}


def verify_projection_tail(C, ell, d, s, p, trials, seed):
    """Frequency of ``|pi_W(x)| >= alpha sqrt(ell)/sqrt(d)`` for a fixed
    ``s``-dimensional coordinate subspace ``W``, against ``(p/10)^(10 C ell)``.

    Only the ``s`` coordinates spanning ``W`` are drawn; the rest are
    independent of the projection.
    """
    alpha = 100.0 * C * math.log(10.0 / p)
    limit = alpha * math.sqrt(ell) / math.sqrt(d)

    def kernel(rng, n):
        x = rng.standard_normal((n, s)) / math.sqrt(d)
        return int(np.count_nonzero(np.linalg.norm(x, axis=1) >= limit))

    hits = sum(_run_blocks(kernel, trials, seed, "projection"))
    frac = hits / trials
    se = math.sqrt(frac * (1 - frac) / trials)
    log10_bound = 10 * C * ell * math.log10(p / 10)
    bound = 10.0 ** log10_bound
    return {"fraction": frac, "se": se, "violations": hits, "bound": bound,
            "log10_bound": log10_bound, "limit": limit, "trials": int(trials), "seed": int(seed),
            "passed": bool(frac <= bound + 3 * se)}


# --- records ----------------------------------------------------------------

def make_record(experiment, params, estimate, bound, verdict, seed, wall_time_ms):
    """One structured record; dataclasses are flattened to dicts."""
    def plain(x):
        if hasattr(x, "__dataclass_fields__"):
            return asdict(x)
        return x

    return {"experiment": experiment, "params": plain(params), "estimate": plain(estimate),
            "bound": plain(bound), "verdict": verdict, "seed": int(seed),
            "wall_time_ms": wall_time_ms}


def write_records(records, fh):
    """Line-delimited JSON, one record per line, keys sorted."""
    for rec in records:
        fh.write(json.dumps(rec, sort_keys=True, default=_json_default) + "\n")


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


class Timer:
    """Context manager measuring wall time in milliseconds."""

    def __enter__(self):
        self._t0 = time.perf_counter()
        self.ms = 0.0
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self._t0) * 1000.0
        return False
