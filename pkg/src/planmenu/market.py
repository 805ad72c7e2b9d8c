"""Consumer valuation model for period-priced data plans.

A consumer of type sigma facing a plan with service period t consumes
an uncertain demand over the period, normally distributed with mean
mu*t and standard deviation sigma*sqrt(t).  The plan carries a data cap
q per unit time (q*t per period), so demand above the cap goes unmet.
The consumer values met demand at alpha per unit; her per-unit-time
valuation of the plan is therefore

    V(sigma, t) = alpha * (mu - (sigma / sqrt(t)) * E(a)),
    a = sqrt(t) * (q - mu) / sigma,

with E the expected excess of a standard normal above a.  Longer
periods smooth demand (V rises in t), higher volatility hurts (V falls
in sigma), and V never exceeds alpha*mu.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .normals import INV_SQRT_2PI, SQRT2, expected_excess, std_normal_pdf


@dataclass
class DemandProfile:
    """Common demand parameters: unit value alpha, mean rate mu, cap q.

    The cap must sit at or above the mean rate (q >= mu), so the
    normalized shortfall threshold a = sqrt(t)*(q - mu)/sigma is
    nonnegative.
    """

    alpha: float
    mu: float
    q: float

    def __post_init__(self):
        if not (self.alpha > 0):
            raise ValueError("alpha must be positive")
        if not (self.mu > 0):
            raise ValueError("mu must be positive")
        if not (self.q >= self.mu):
            raise ValueError("cap q must be at least the mean rate mu")

    @property
    def excess_cap(self):
        """q - mu >= 0."""
        return self.q - self.mu


@dataclass
class CostModel:
    """Provider cost per unit time: C(t) = W(t) + c0 for a period-t plan.

    c0 is a fixed per-subscriber overhead; W is the variable cost of
    carrying the plan for a period of length t, convex nondecreasing
    with W(0) = 0.  Default is linear, W(t) = c1 * t.  A custom `w`
    callable must broadcast over numpy arrays.
    """

    c0: float
    c1: float = 0.0
    w: Optional[Callable] = None

    def __post_init__(self):
        if not (self.c0 >= 0):
            raise ValueError("c0 must be nonnegative")
        if self.w is None and not (self.c1 >= 0):
            raise ValueError("c1 must be nonnegative for the linear cost")


@dataclass
class ContractItem:
    """One menu entry: a service period and its price (per unit time)."""

    period: float
    price: float

    def __post_init__(self):
        if not (self.period > 0):
            raise ValueError("period must be positive")


def _check_sigma_t(sigma, t):
    sv = np.asarray(sigma, dtype=float)
    tv = np.asarray(t, dtype=float)
    if np.any(sv < 0) or not np.all(np.isfinite(sv)):
        raise ValueError("sigma must be finite and nonnegative")
    if np.any(tv <= 0) or not np.all(np.isfinite(tv)):
        raise ValueError("period t must be finite and positive")
    return sv, tv


def _both_scalar(sigma, t):
    return np.ndim(sigma) == 0 and np.ndim(t) == 0


def _check_scalar_sigma_t(sigma, t):
    s = float(sigma)
    tt = float(t)
    if s < 0 or not math.isfinite(s):
        raise ValueError("sigma must be finite and nonnegative")
    if tt <= 0 or not math.isfinite(tt):
        raise ValueError("period t must be finite and positive")
    return s, tt


def _excess_scalar(a):
    # expected excess E[(X-a)^+], clamped at 0 (see normals.expected_excess)
    out = INV_SQRT_2PI * math.exp(-0.5 * a * a) - a * (0.5 * math.erfc(a / SQRT2))
    return out if out > 0.0 else 0.0


def _shortfall_threshold(profile, sigma, t):
    # a = sqrt(t) * (q - mu) / sigma, with the sigma=0 branch masked to a
    # huge threshold so downstream tail quantities evaluate to 0.
    with np.errstate(divide="ignore"):
        a = np.where(sigma > 0, np.sqrt(t) * profile.excess_cap / np.where(sigma > 0, sigma, 1.0), np.inf)
    return np.minimum(a, 1e6)


def unsatisfied_demand(profile, sigma, t):
    """Expected demand above the cap over one whole period of length t.

    Equals sigma*sqrt(t)*E(a); 0 when sigma = 0 (deterministic demand
    never exceeds the cap since q >= mu).
    """
    if _both_scalar(sigma, t):
        s, tt = _check_scalar_sigma_t(sigma, t)
        if s == 0.0:
            return 0.0
        rt = math.sqrt(tt)
        return s * rt * _excess_scalar(min(rt * profile.excess_cap / s, 1e6))
    sv, tv = _check_sigma_t(sigma, t)
    a = _shortfall_threshold(profile, sv, tv)
    return np.where(sv > 0, sv * np.sqrt(tv) * expected_excess(a), 0.0)


def valuation(profile, sigma, t):
    """Per-unit-time value V(sigma, t) a type-sigma consumer places on a
    period-t plan.  V(0, t) = alpha*mu (the volatility-free limit)."""
    if _both_scalar(sigma, t):
        s, tt = _check_scalar_sigma_t(sigma, t)
        if s == 0.0:
            return profile.alpha * profile.mu
        rt = math.sqrt(tt)
        shortfall_rate = s / rt * _excess_scalar(min(rt * profile.excess_cap / s, 1e6))
        return profile.alpha * (profile.mu - shortfall_rate)
    sv, tv = _check_sigma_t(sigma, t)
    a = _shortfall_threshold(profile, sv, tv)
    shortfall_rate = np.where(sv > 0, sv / np.sqrt(tv) * expected_excess(a), 0.0)
    return profile.alpha * (profile.mu - shortfall_rate)


def valuation_dt(profile, sigma, t):
    """dV/dt = alpha*sigma*phi(a)/(2*t^1.5) > 0; 0 in the sigma = 0 limit."""
    if _both_scalar(sigma, t):
        s, tt = _check_scalar_sigma_t(sigma, t)
        if s == 0.0:
            return 0.0
        a = min(math.sqrt(tt) * profile.excess_cap / s, 1e6)
        return profile.alpha * s * (INV_SQRT_2PI * math.exp(-0.5 * a * a)) / (2.0 * tt ** 1.5)
    sv, tv = _check_sigma_t(sigma, t)
    a = _shortfall_threshold(profile, sv, tv)
    return np.where(sv > 0, profile.alpha * sv * std_normal_pdf(a) / (2.0 * tv ** 1.5), 0.0)


def valuation_dsigma(profile, sigma, t):
    """dV/dsigma = -alpha*phi(a)/sqrt(t) < 0 for sigma > 0.

    At sigma = 0 the one-sided limit is 0; that value is returned and a
    RuntimeWarning flags the degenerate evaluation.
    """
    sv, tv = _check_sigma_t(sigma, t)
    if np.any(sv == 0):
        warnings.warn("valuation_dsigma at sigma=0: returning one-sided limit 0", RuntimeWarning)
    a = _shortfall_threshold(profile, sv, tv)
    out = np.where(sv > 0, -profile.alpha * std_normal_pdf(a) / np.sqrt(tv), 0.0)
    return float(out) if _both_scalar(sigma, t) else out


def valuation_dsigma_dt(profile, sigma, t):
    """Cross partial d2V/(dsigma dt) = alpha*phi(a)/(2*sqrt(t)) * (1/t + (q-mu)^2/sigma^2).

    Strictly positive: longer periods soften the volatility penalty.
    Undefined at sigma = 0.
    """
    sv, tv = _check_sigma_t(sigma, t)
    if np.any(sv == 0):
        raise ValueError("cross partial undefined at sigma=0")
    a = np.minimum(np.sqrt(tv) * profile.excess_cap / sv, 1e6)
    out = profile.alpha * std_normal_pdf(a) / (2.0 * np.sqrt(tv)) * (1.0 / tv + (profile.excess_cap / sv) ** 2)
    return float(out) if _both_scalar(sigma, t) else out


def cost(model, t):
    """Provider cost per unit time C(t) = W(t) + c0 of serving a period-t plan."""
    if np.ndim(t) == 0 and model.w is None:
        tt = float(t)
        if tt < 0 or not math.isfinite(tt):
            raise ValueError("period t must be finite and nonnegative")
        return model.c0 + model.c1 * tt
    tv = np.asarray(t, dtype=float)
    if np.any(tv < 0) or not np.all(np.isfinite(tv)):
        raise ValueError("period t must be finite and nonnegative")
    variable = model.w(tv) if model.w is not None else model.c1 * tv
    out = np.asarray(variable, dtype=float) + model.c0
    return float(out) if np.ndim(t) == 0 else out


def item_profit(model, item):
    """Per-subscriber margin pi - C(t) of one menu item."""
    return item.price - cost(model, item.period)


def consumer_utility(profile, sigma, item):
    """U = V(sigma, t) - pi for one consumer facing one item."""
    return valuation(profile, sigma, item.period) - item.price


def social_surplus(profile, model, sigma, t):
    """V(sigma, t) - C(t): total value created by serving type sigma at period t."""
    return valuation(profile, sigma, t) - cost(model, t)
