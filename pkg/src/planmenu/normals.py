"""Standard-normal helpers used throughout the valuation model.

Everything here accepts floats or numpy arrays and broadcasts; scalar
input gives a Python float back.
"""

import math

import numpy as np
from scipy import special

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Scalars take the plain-math path (C library erfc/exp, ~30x faster
# than the numpy machinery); arrays go through scipy.special.


def _as_float_or_array(x):
    out = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite input")
    return out


def _scalar(x):
    xf = float(x)
    if not math.isfinite(xf):
        raise ValueError("non-finite input")
    return xf


def std_normal_pdf(x):
    """phi(x) = exp(-x^2/2)/sqrt(2*pi)."""
    if np.ndim(x) == 0:
        xf = _scalar(x)
        return INV_SQRT_2PI * math.exp(-0.5 * xf * xf)
    xv = _as_float_or_array(x)
    return INV_SQRT_2PI * np.exp(-0.5 * xv * xv)


def std_normal_cdf(x):
    """Phi(x), computed via erfc for full-tail accuracy."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(-_scalar(x) / SQRT2)
    xv = _as_float_or_array(x)
    return 0.5 * special.erfc(-xv / SQRT2)


def std_normal_sf(x):
    """1 - Phi(x) without cancellation in the upper tail."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(_scalar(x) / SQRT2)
    xv = _as_float_or_array(x)
    return 0.5 * special.erfc(xv / SQRT2)


def std_normal_quantile(p):
    """Inverse of std_normal_cdf on (0, 1)."""
    pv = np.asarray(p, dtype=float)
    if np.any((pv <= 0.0) | (pv >= 1.0)) or not np.all(np.isfinite(pv)):
        raise ValueError("quantile argument must lie strictly inside (0, 1)")
    out = special.ndtri(pv)
    return float(out) if np.ndim(p) == 0 else out


def upper_partial_expectation(a):
    """integral_a^inf x*phi(x) dx, which collapses to phi(a)."""
    return std_normal_pdf(a)


def expected_excess(a):
    """E[(X - a)^+] for standard normal X: phi(a) - a*(1 - Phi(a)).

    Strictly positive and strictly decreasing in a; tends to 0 as
    a -> +inf and to -a as a -> -inf.  The subtraction can round to a
    tiny negative once both terms underflow (a ~ 4e2), so the result is
    clamped at 0.
    """
    if np.ndim(a) == 0:
        af = _scalar(a)
        out = INV_SQRT_2PI * math.exp(-0.5 * af * af) - af * (0.5 * math.erfc(af / SQRT2))
        return out if out > 0.0 else 0.0
    av = _as_float_or_array(a)
    out = INV_SQRT_2PI * np.exp(-0.5 * av * av) - av * (0.5 * special.erfc(av / SQRT2))
    return np.maximum(out, 0.0)
