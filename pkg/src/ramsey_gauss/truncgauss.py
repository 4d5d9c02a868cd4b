"""One-sided truncated standard normals.

``UPPER`` means ``Z | Z <= b`` and ``LOWER`` means ``Z | Z >= b``.  Every
lower-truncated quantity is obtained by reflection, ``Z | Z >= b`` being
``-(Z' | Z' <= -b)``.
"""

from dataclasses import dataclass

import numpy as np

from . import specfn
from .exceptions import DomainError

__all__ = [
    "UPPER", "LOWER", "TruncatedGaussian", "trunc_mean", "trunc_var",
    "upper_var", "gamma_p", "gamma_prime_p", "cgf", "cgf_quadratic_bound",
    "sample", "truncated_cdf",
]

UPPER = "upper"
LOWER = "lower"

# |cutoff| beyond which the sampler leaves inverse-CDF for rejection
TAIL_SWITCH = 6.0


@dataclass(frozen=True)
class TruncatedGaussian:
    cutoff: float
    side: str = UPPER

    def __post_init__(self):
        if self.side not in (UPPER, LOWER):
            raise ValueError(f"side must be {UPPER!r} or {LOWER!r}, got {self.side!r}")
        if not np.isfinite(self.cutoff):
            raise DomainError("cutoff must be finite")

    @property
    def reflected_cutoff(self):
        """Cutoff of the equivalent upper-truncated variable."""
        return self.cutoff if self.side == UPPER else -self.cutoff


def upper_var(b):
    """``Var(Z | Z <= b) = 1 - b m(b) - m(b)**2``, vectorised over ``b``."""
    m = specfn.mills(b)
    b = np.asarray(b, dtype=float)
    # 1 - m (m + b) keeps the cancellation inside the small factor m + b
    return specfn._scalar_or_array(1.0 - m * (m + b))


def trunc_mean(dist):
    """Mean of the truncated variable: ``-m(b)`` or ``+m(-b)``."""
    m = specfn.mills(dist.reflected_cutoff)
    return -m if dist.side == UPPER else m


def trunc_var(dist):
    return upper_var(dist.reflected_cutoff)


def _check_p(p):
    if not 0.0 < p <= 0.5:
        raise DomainError(f"p must lie in (0, 1/2], got {p!r}")


def gamma_p(p):
    """Variance deficit ``1 - Var(Z | Z <= -c_p)``."""
    _check_p(p)
    c = -specfn.inverse_Phi(p) if p < 0.5 else 0.0
    return 1.0 - trunc_var(TruncatedGaussian(-c, UPPER))


def gamma_prime_p(p):
    """Variance deficit ``1 - Var(Z | Z >= -c_p)`` of the lower-truncated side."""
    _check_p(p)
    c = -specfn.inverse_Phi(p) if p < 0.5 else 0.0
    return 1.0 - trunc_var(TruncatedGaussian(-c, LOWER))


def cgf(dist, u):
    """Cumulant generating function of the centred variable ``Z - E[Z]``.

    For the upper side
    ``K(u) = u**2/2 + u m(b) + log Phi(b - u) - log Phi(b)``; the lower side
    is the same expression for the reflected variable evaluated at ``-u``.
    ``K(0) = K'(0) = 0`` and ``K''(u)`` is the truncated variance at cutoff
    ``b - u``.
    """
    b = dist.reflected_cutoff
    u = np.asarray(u, dtype=float)
    v = u if dist.side == UPPER else -u
    out = 0.5 * v * v + v * specfn.mills(b) + specfn.log_Phi(b - v) - specfn.log_Phi(b)
    return specfn._scalar_or_array(out)


def cgf_quadratic_bound(dist, u):
    """``u**2 V / 2``.

    An upper bound on ``cgf`` for every ``u > 0`` on the upper side.  On the
    lower side it is only the local (small ``|u|``) form; it bounds ``cgf``
    for ``u <= 0``.
    """
    u = np.asarray(u, dtype=float)
    return specfn._scalar_or_array(0.5 * u * u * trunc_var(dist))


def truncated_cdf(dist, x):
    """CDF of the truncated variable, used for goodness-of-fit checks."""
    x = np.asarray(x, dtype=float)
    b = dist.cutoff
    if dist.side == UPPER:
        out = np.where(x >= b, 1.0, np.exp(specfn.log_Phi(np.minimum(x, b)) - specfn.log_Phi(b)))
    else:
        # P[Z <= x | Z >= b] = 1 - Phi(-x) / Phi(-b)
        out = np.where(x <= b, 0.0,
                       -np.expm1(specfn.log_Phi(-np.maximum(x, b)) - specfn.log_Phi(-b)))
    return specfn._scalar_or_array(out)


def _sample_upper(b, rng, n):
    """Draws of ``Z | Z <= b``."""
    if b > TAIL_SWITCH:
        # truncation removes < 1e-9 of the mass: plain rejection from N(0, 1)
        out = rng.standard_normal(n)
        bad = out > b
        while bad.any():
            out[bad] = rng.standard_normal(int(bad.sum()))
            bad = out > b
        return out
    if b >= -TAIL_SWITCH:
        mass = specfn.Phi(b)
        u = rng.random(n)
        # random() can return exactly 0; keep the quantile argument positive
        q = np.maximum(u, np.finfo(float).tiny) * mass
        return np.minimum(specfn.inverse_Phi(q), b)
    # deep lower tail: -(W | W >= a) with a = -b > 6, by exponential-proposal
    # rejection with the optimal rate
    a = -b
    rate = 0.5 * (a + np.sqrt(a * a + 4.0))
    out = np.empty(n)
    todo = np.arange(n)
    while todo.size:
        x = a + rng.exponential(1.0 / rate, todo.size)
        keep = rng.random(todo.size) <= np.exp(-0.5 * (x - rate) ** 2)
        out[todo[keep]] = x[keep]
        todo = todo[~keep]
    return -out


def sample(dist, rng, size=None):
    """Draw from a truncated standard normal.

    Parameters
    ----------
    dist : TruncatedGaussian
    rng : numpy.random.Generator
        Explicit generator; results are a deterministic function of its state.
    size : int, optional
        Number of draws.  ``None`` returns a single float.
    """
    n = 1 if size is None else int(size)
    draws = _sample_upper(dist.reflected_cutoff, rng, n)
    if dist.side == LOWER:
        draws = -draws
    return float(draws[0]) if size is None else draws
