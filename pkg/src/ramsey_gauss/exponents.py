"""Red/blue exponent curves and the max-min crossing optimiser.

Curves are the ell -> infinity limits with explicit terms only::

    red_hms(p, D)  = -log(p)/2 + kappa(p)/D - K/D**2
    red_new(p, D)  = red_hms(p, D) + beta_quad(p)/D**2
    blue(p, D)     = -(C/2) log(1 - p) - C**2 Lambda(p)/D

``D = inf`` is accepted and gives the leading-order curves.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfn, truncgauss
from .exceptions import DomainError, NoCrossingError
from .params import appendix_b_params, beta_quad, lambda_C, solve_c_p, solve_p_C

__all__ = [
    "HMS", "NEW", "DROPPED_TERMS", "ExponentCurvePoint", "ExponentReport",
    "ChainLink", "rho_red_hms", "rho_red_new", "rho_blue", "curve_sweep",
    "optimize_crossing", "grid_max_min", "eta_report", "asymptotic_eta",
    "asymptotic_exponent_chain",
]

HMS = "hms"
NEW = "new"

DROPPED_TERMS = (
    "o_ell(1) in every curve (ell -> infinity limit)",
    "O(D^-2) in the blue curve",
    "O(D^-3) in the refined red curve",
)

P_MIN = 1e-6
P_MAX = 0.5 - 1e-6


def _a(p):
    """``a = phi(c_p)`` for scalar or array ``p`` in ``(0, 1/2]``."""
    p = np.asarray(p, dtype=float)
    return specfn.phi(specfn.inverse_Phi(p))


def _beta_quad_vec(p):
    p = np.asarray(p, dtype=float)
    c = -specfn.inverse_Phi(p)
    gamma = 1.0 - truncgauss.upper_var(-c)
    return gamma * specfn.phi(c) ** 4 / (8.0 * p ** 4)


def rho_red_hms(p, D, K=0.0):
    p = np.asarray(p, dtype=float)
    kappa = _a(p) ** 3 / (6.0 * p ** 3)
    return specfn._scalar_or_array(-0.5 * np.log(p) + kappa / D - K / D ** 2)


def rho_red_new(p, D, K=0.0):
    return specfn._scalar_or_array(rho_red_hms(p, D, K) + _beta_quad_vec(p) / D ** 2)


def rho_blue(p, D, C):
    p = np.asarray(p, dtype=float)
    Lam = _a(p) ** 3 / (6.0 * (1.0 - p) ** 3)
    return specfn._scalar_or_array(-0.5 * C * np.log1p(-p) - C * C * Lam / D)


def _red(variant):
    if variant == HMS:
        return rho_red_hms
    if variant == NEW:
        return rho_red_new
    raise ValueError(f"variant must be {HMS!r} or {NEW!r}, got {variant!r}")


@dataclass(frozen=True)
class ExponentCurvePoint:
    p: float
    rho_red_hms: float
    rho_red_new: float
    rho_blue: float


def curve_sweep(C, D, K=0.0, p_values=None):
    """Evaluate all three curves on a grid of ``p`` (default: 201 points
    spanning ``p_C +- 0.05``, clipped to ``(0, 1/2)``)."""
    if p_values is None:
        pc = solve_p_C(C)
        p_values = np.linspace(max(pc - 0.05, P_MIN), min(pc + 0.05, P_MAX), 201)
    p_values = np.asarray(p_values, dtype=float)
    red_h = np.atleast_1d(rho_red_hms(p_values, D, K))
    red_n = np.atleast_1d(rho_red_new(p_values, D, K))
    blue = np.atleast_1d(rho_blue(p_values, D, C))
    return [ExponentCurvePoint(float(p), float(h), float(n), float(b))
            for p, h, n, b in zip(p_values, red_h, red_n, blue)]


def optimize_crossing(C, D, K=0.0, variant=HMS):
    """Maximise ``min(red, blue)`` over ``p``.

    Red is decreasing and blue increasing near ``p_C``, so the max-min sits
    at the crossing.  The crossing is bracketed around ``p_C`` with
    half-width ``min(0.1, 50/D)`` (doubled until the sign changes) and then
    bisected down to adjacent doubles.

    Returns
    -------
    (p_star, rho_star) : tuple of float

    Raises
    ------
    NoCrossingError
        If no sign change exists in ``(1e-6, 1/2 - 1e-6)``.
    """
    if not C > 1.0:
        raise DomainError(f"optimize_crossing requires C > 1, got {C!r}")
    if not D > 0.0:
        raise DomainError(f"D must be > 0, got {D!r}")
    red = _red(variant)

    def gap(p):
        return red(p, D, K) - rho_blue(p, D, C)

    pc = solve_p_C(C)
    half = min(0.1, 50.0 / D) if math.isfinite(D) else 1e-3
    half = max(half, 1e-9)
    while True:
        lo, hi = max(pc - half, P_MIN), min(pc + half, P_MAX)
        g_lo, g_hi = gap(lo), gap(hi)
        if g_lo >= 0.0 >= g_hi:
            break
        if lo == P_MIN and hi == P_MAX:
            raise NoCrossingError(
                f"red and blue curves do not cross in ({P_MIN}, {P_MAX}) for C={C}, D={D}, K={K}")
        half *= 2.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = gap(mid)
        if g > 0.0:
            lo = mid
        elif g < 0.0:
            hi = mid
        else:
            lo = hi = mid
            break
    p_star = lo if abs(gap(lo)) <= abs(gap(hi)) else hi
    rho_star = min(red(p_star, D, K), rho_blue(p_star, D, C))
    return p_star, rho_star


def grid_max_min(C, D, K=0.0, variant=HMS, n=1_000_000, lo=P_MIN, hi=P_MAX):
    """Brute-force max-min on a uniform grid, refined once.

    Independent of :func:`optimize_crossing`: scans ``n`` points over
    ``[lo, hi]``, then ``n`` more points across the two cells next to the
    best one.  Chunked so memory stays bounded; the result does not depend
    on the chunking.
    """
    red = _red(variant)

    def scan(a, b):
        grid = np.linspace(a, b, n)
        best_val, best_p = -np.inf, None
        for start in range(0, n, 200_000):
            ps = grid[start:start + 200_000]
            vals = np.minimum(red(ps, D, K), rho_blue(ps, D, C))
            i = int(np.argmax(vals))
            if vals[i] > best_val:
                best_val, best_p = float(vals[i]), float(ps[i])
        return best_p, best_val, (b - a) / (n - 1)

    p1, _, step = scan(lo, hi)
    p2, v2, _ = scan(max(p1 - step, lo), min(p1 + step, hi))
    return p2, v2


@dataclass(frozen=True)
class ExponentReport:
    C: float
    D: float
    mode: str
    K_input: float
    p_C: float
    p_star_hms: float
    rho_star_hms: float
    p_star_new: float
    rho_star_new: float
    eta: float
    eps_hms: float
    lambda_C: float
    beta_quad_p_C: float
    predicted_delta: float
    observed_delta: float
    eta_asymptotic: float
    dropped_terms: tuple = field(default=DROPPED_TERMS)


def eta_report(C, D, K=0.0):
    """Run both optimisations and express them as additive constants over
    ``p_C**-1/2``: ``eps_hms = exp(rho_hms) - p_C**-1/2`` and likewise ``eta``.
    ``eta_asymptotic`` is NaN when ``C <= e``."""
    p_h, rho_h = optimize_crossing(C, D, K, HMS)
    p_n, rho_n = optimize_crossing(C, D, K, NEW)
    pc = solve_p_C(C)
    base = pc ** -0.5
    lam = lambda_C(C)
    bq = beta_quad(pc)
    return ExponentReport(
        C=float(C), D=float(D), mode="LeadingOrder" if K == 0 else "WithK",
        K_input=float(K), p_C=pc,
        p_star_hms=p_h, rho_star_hms=rho_h, p_star_new=p_n, rho_star_new=rho_n,
        eta=math.exp(rho_n) - base, eps_hms=math.exp(rho_h) - base,
        lambda_C=lam, beta_quad_p_C=bq,
        predicted_delta=lam * bq / D ** 2, observed_delta=rho_n - rho_h,
        eta_asymptotic=asymptotic_eta(C) if C > math.e else float("nan"),
    )


_E24 = math.exp(1.0 / 24.0)


def asymptotic_eta(C):
    """``(e^(1/24) - 1) p_C^-1/2 + (e^(1/24)/64) p_C^-1/2 / log C``."""
    if not C > math.e:
        raise DomainError(f"asymptotic_eta requires C > e, got {C!r}")
    base = solve_p_C(C) ** -0.5
    return (_E24 - 1.0) * base + (_E24 / 64.0) * base / math.log(C)


@dataclass(frozen=True)
class ChainLink:
    exact: float
    asymptotic: float

    @property
    def ratio(self):
        return self.exact / self.asymptotic


def asymptotic_exponent_chain(C):
    """Each link of the large-``C`` asymptotic chain at the large-``C``
    parameter choice, as (exact, asymptotic) pairs.

    Keys: ``p_C`` (vs log C / C), ``c_sq`` (c_{p_C}**2 vs 2 log(1/p_C)),
    ``a`` (phi(c_p) at shifted p vs c_{p_C} p_C), ``D`` (vs 4 c_{p_C} C p_C),
    ``D_log`` (vs 4 c_{p_C} log C),
    ``correction`` (gamma(p_C) phi(c_{p_C})**4 / (8 p_C**4 D**2) vs
    1 / (64 log C)).
    """
    if not C >= 100:
        raise DomainError(f"asymptotic chain is only meaningful for C >= 100, got {C!r}")
    pc = solve_p_C(C)
    c = solve_c_p(pc)
    p, D = appendix_b_params(C)
    a = specfn.phi(solve_c_p(p))
    logC = math.log(C)
    correction = truncgauss.gamma_p(pc) * specfn.phi(c) ** 4 / (8.0 * pc ** 4 * D ** 2)
    return {
        "p_C": ChainLink(pc, logC / C),
        "c_sq": ChainLink(c * c, 2.0 * math.log(1.0 / pc)),
        "a": ChainLink(a, c * pc),
        "D": ChainLink(D, 4.0 * c * C * pc),
        "D_log": ChainLink(D, 4.0 * c * logC),
        "correction": ChainLink(correction, 1.0 / (64.0 * logC)),
    }
