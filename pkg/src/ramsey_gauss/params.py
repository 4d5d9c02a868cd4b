"""Scalar parameters of the Gaussian random graph construction."""

import math
from dataclasses import dataclass
from typing import Optional

from . import specfn, truncgauss
from .exceptions import DomainError

__all__ = [
    "ModelParams", "DerivedConstants", "solve_p_C", "solve_c_p",
    "build_params", "appendix_b_params", "derived_constants",
]


def _ratio(p):
    return math.log(p) / math.log1p(-p)


def solve_p_C(C):
    """Unique ``p`` in ``(0, 1/2]`` with ``log p / log(1 - p) = C``.

    Bisection on the strictly decreasing map ``p -> log p / log(1 - p)``,
    bracketed by ``(1e-15, 1/2)``; runs until the bracket stops shrinking.
    """
    C = float(C)
    if not C >= 1.0:
        raise DomainError(f"C must satisfy C >= 1, got {C!r}")
    if C == 1.0:
        return 0.5
    lo, hi = 1e-15, 0.5
    if _ratio(lo) < C:
        raise DomainError(f"C={C!r} is too large: p_C falls below 1e-15")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _ratio(mid) > C:
            lo = mid
        else:
            hi = mid
    # pick the endpoint with the smaller residual
    return lo if abs(_ratio(lo) - C) <= abs(_ratio(hi) - C) else hi


def solve_c_p(p):
    """Threshold ``c_p >= 0`` with ``Phi(-c_p) = p``."""
    p = float(p)
    if not 0.0 < p <= 0.5:
        raise DomainError(f"p must lie in (0, 1/2], got {p!r}")
    if p == 0.5:
        return 0.0
    return -specfn.inverse_Phi(p)


@dataclass(frozen=True)
class ModelParams:
    """Every scalar of one instance of the construction.

    ``d`` is the rounded integer dimension actually sampled; exponent
    formulas use the real ``D``.
    """

    C: float
    p: float
    c_p: float
    a: float
    ell: int
    D: float
    d: int
    alpha: float
    delta: float

    @property
    def p_C(self):
        return solve_p_C(self.C)

    @property
    def threshold(self):
        """Edge threshold ``-c_p / sqrt(d)`` on inner products."""
        return -self.c_p / math.sqrt(self.d)


@dataclass(frozen=True)
class DerivedConstants:
    kappa: float
    Lambda: float
    beta_quad: float
    beta_quad_prime: float
    lambda_C: float


def build_params(C, ell, D, p_override: Optional[float] = None) -> ModelParams:
    """Populate a :class:`ModelParams` from the clique ratio, size and scale.

    ``p`` is ``p_C`` unless ``p_override`` is given (the exponent optimiser
    works at ``p`` near, not at, ``p_C``).
    """
    C = float(C)
    if not C >= 1.0:
        raise DomainError(f"C must satisfy C >= 1, got {C!r}")
    if int(ell) != ell or ell < 1:
        raise DomainError(f"ell must be a positive integer, got {ell!r}")
    ell = int(ell)
    D = float(D)
    if not D > 0.0 or not math.isfinite(D):
        raise DomainError(f"D must be finite and > 0, got {D!r}")
    if p_override is None:
        p = solve_p_C(C)
    else:
        p = float(p_override)
        if not 0.0 < p < 0.5:
            raise DomainError(f"p_override must lie in (0, 1/2), got {p!r}")
    c_p = solve_c_p(p)
    d = max(1, round(D * D * ell * ell))
    alpha = 100.0 * C * math.log(10.0 / p)
    return ModelParams(
        C=C, p=p, c_p=c_p, a=specfn.phi(c_p), ell=ell, D=D, d=d,
        alpha=alpha, delta=alpha * d ** -0.25,
    )


def appendix_b_params(C):
    """Large-``C`` choice ``p = p_C + 1/C``, ``D = 4 a C / (1 - p)``.

    ``a = phi(c_p)`` is taken at the shifted ``p``.

    Returns
    -------
    (p, D) : tuple of float
    """
    p = solve_p_C(C) + 1.0 / C
    if p >= 0.5:
        raise DomainError(f"p_C + 1/C = {p:.6g} >= 1/2; C={C!r} is too small")
    a = specfn.phi(solve_c_p(p))
    return p, 4.0 * a * C / (1.0 - p)


def _kappa(p, a):
    return a ** 3 / (6.0 * p ** 3)


def _Lambda(p, a):
    return a ** 3 / (6.0 * (1.0 - p) ** 3)


def beta_quad(p):
    """``gamma(p) a**4 / (8 p**4)``, the new negative ``r**4/d`` coefficient."""
    a = specfn.phi(solve_c_p(p))
    return truncgauss.gamma_p(p) * a ** 4 / (8.0 * p ** 4)


def beta_quad_prime(p):
    a = specfn.phi(solve_c_p(p))
    return truncgauss.gamma_prime_p(p) * a ** 4 / (8.0 * (1.0 - p) ** 4)


def lambda_C(C):
    """Sensitivity of the max-min optimum to a vertical shift of the red curve."""
    p = solve_p_C(C)
    return C * p / (C * p + (1.0 - p))


def derived_constants(params: ModelParams) -> DerivedConstants:
    p, a = params.p, params.a
    return DerivedConstants(
        kappa=_kappa(p, a),
        Lambda=_Lambda(p, a),
        beta_quad=beta_quad(p),
        beta_quad_prime=beta_quad_prime(p),
        lambda_C=lambda_C(params.C),
    )
