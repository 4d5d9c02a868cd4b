"""Standard normal special functions, accurate deep into the lower tail.

Everything tail-sensitive goes through the scaled complementary error
function ``erfcx(x) = exp(x**2) * erfc(x)``, so neither ``log_Phi`` nor
``mills`` ever forms a ratio of two underflowing numbers.

All functions accept scalars or arrays; scalars come back as ``float``.
"""

import math

import numpy as np
from scipy.special import erfc, erfcx

from .exceptions import DomainError

__all__ = ["phi", "log_phi", "Phi", "log_Phi", "mills", "inverse_Phi"]

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def phi(t):
    """Standard normal density."""
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(np.exp(-0.5 * t * t - _LOG_SQRT_2PI))


def log_phi(t):
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(-0.5 * t * t - _LOG_SQRT_2PI)


def Phi(t):
    """Standard normal CDF (accurate in relative terms for t < 0)."""
    t = np.asarray(t, dtype=float)
    return _scalar_or_array(0.5 * erfc(-t / _SQRT2))


def log_Phi(t):
    """log of the standard normal CDF.

    For ``t < -1`` uses ``Phi(t) = erfcx(-t/sqrt2) * exp(-t**2/2) / 2`` so the
    Gaussian factor is added in log space; relative accuracy holds far
    beyond the point where ``Phi`` itself underflows (about ``t = -38``).
    For ``t >= -1`` uses ``log1p(-Phi(-t))``.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    lower = t < -1.0
    tl = t[lower]
    out[lower] = np.log(0.5 * erfcx(-tl / _SQRT2)) - 0.5 * tl * tl
    tu = t[~lower]
    out[~lower] = np.log1p(-0.5 * erfc(tu / _SQRT2))
    return _scalar_or_array(out)


def mills(t):
    """Inverse Mills ratio ``phi(t) / Phi(t)``.

    For ``t < 0`` the Gaussian factors cancel exactly:
    ``m(t) = sqrt(2/pi) / erfcx(-t/sqrt2)``, which stays close to ``|t|`` for
    arbitrarily negative ``t``.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    neg = t < 0.0
    out[neg] = _SQRT_2_OVER_PI / erfcx(-t[neg] / _SQRT2)
    tp = t[~neg]
    out[~neg] = np.exp(log_phi(tp) - log_Phi(tp))
    return _scalar_or_array(out)


# Acklam-type rational approximation; a starting point for Newton polishing.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549671010739435e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _polyval(coeffs, x):
    acc = np.zeros_like(x)
    for c in coeffs:
        acc = acc * x + c
    return acc


def _acklam_lower_half(q):
    """Rational approximation of the quantile for q in (0, 0.5]."""
    t = np.empty_like(q)
    tail = q < _P_LOW
    s = np.sqrt(-2.0 * np.log(q[tail]))
    t[tail] = _polyval(_C, s) / (_polyval(_D, s) * s + 1.0)
    r = q[~tail] - 0.5
    r2 = r * r
    t[~tail] = _polyval(_A, r2) * r / (_polyval(_B, r2) * r2 + 1.0)
    return t


def inverse_Phi(q):
    """Standard normal quantile.

    Rational approximation followed by Newton steps on ``log_Phi``;
    ``|Phi(t) - q| <= 1e-14`` over the whole open interval, including
    ``q`` down to the smallest normal doubles.

    Raises
    ------
    DomainError
        If any ``q`` lies outside ``(0, 1)``.
    """
    q = np.asarray(q, dtype=float)
    if np.any(~((q > 0.0) & (q < 1.0))):
        raise DomainError("inverse_Phi requires 0 < q < 1")
    upper = q > 0.5
    # 1 - q is exact for q >= 0.5, so reflect and work in the lower half
    qq = np.where(upper, 1.0 - q, q)
    t = _acklam_lower_half(qq)
    # the tail branch starts ~1e-5 off, so two quadratic steps are needed
    for _ in range(2):
        t = t - (log_Phi(t) - np.log(qq)) / mills(t)
    t = np.where(upper, -t, t)
    return _scalar_or_array(t)
