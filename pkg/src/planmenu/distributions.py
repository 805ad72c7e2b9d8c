"""Markets: how consumer volatility types sigma are distributed.

Two flavors.  DiscreteMarket lists the types and their head-counts
outright.  ContinuousMarket carries a density g on [sigma_min,
sigma_max] from one of three families (uniform, truncated exponential,
truncated normal), always renormalized so the CDF G spans exactly
[0, 1] over the window.

`theorem3_condition` evaluates the slack of the shape condition

    F(sigma) = (2 g^2 - g' G) / g - (3 - 2*sqrt(2)) * G / sigma  >=  0

under which each group's profit contribution is unimodal in its
boundary, so golden-section search inside the grouped solver is sound.
All three bundled families satisfy it on their windows for sensible
parameters; `verify_theorem3` checks a grid and reports the minimum
slack.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .normals import std_normal_cdf, std_normal_pdf, std_normal_quantile

KINDS = ("uniform", "exponential", "truncated_normal")

# 3 - 2*sqrt(2), the constant in the boundary-unimodality condition.
SHAPE_CONSTANT = 3.0 - 2.0 * np.sqrt(2.0)


@dataclass
class DiscreteMarket:
    """Finitely many types sigma_1 < ... < sigma_I with counts N_i > 0."""

    sigmas: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.sigmas = np.asarray(self.sigmas, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.sigmas.ndim != 1 or self.sigmas.size == 0:
            raise ValueError("sigmas must be a nonempty 1-D array")
        if self.sigmas.shape != self.counts.shape:
            raise ValueError("sigmas and counts must align")
        if np.any(np.diff(self.sigmas) <= 0):
            raise ValueError("types must be strictly ascending")
        if np.any(self.sigmas < 0):
            raise ValueError("types must be nonnegative")
        if np.any(self.counts <= 0):
            raise ValueError("counts must be positive")

    @property
    def n_types(self):
        return self.sigmas.size

    @property
    def total_count(self):
        return float(self.counts.sum())

    def count_below(self, i):
        """Total head-count of types strictly lower than type i (0-based)."""
        return float(self.counts[:i].sum())


@dataclass
class ContinuousMarket:
    """A continuum of types on [sigma_min, sigma_max] with total mass `size`.

    kind selects the density family:
      - "uniform":            g constant on the window
      - "exponential":        g proportional to exp(-rate*sigma), truncated
      - "truncated_normal":   g proportional to phi((sigma-loc)/scale), truncated
    """

    kind: str
    sigma_min: float
    sigma_max: float
    size: float = 1.0
    rate: Optional[float] = None
    loc: Optional[float] = None
    scale: Optional[float] = None
    _norm: float = field(init=False, repr=False, default=1.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if not (0 <= self.sigma_min < self.sigma_max):
            raise ValueError("need 0 <= sigma_min < sigma_max")
        if not (self.size > 0):
            raise ValueError("market size must be positive")
        if self.kind == "exponential":
            if self.rate is None or not (self.rate > 0):
                raise ValueError("exponential market needs rate > 0")
            self._exp_lo = math.exp(-self.rate * self.sigma_min)
            self._norm = self._exp_lo - math.exp(-self.rate * self.sigma_max)
        elif self.kind == "truncated_normal":
            if self.loc is None or self.scale is None or not (self.scale > 0):
                raise ValueError("truncated_normal market needs loc and scale > 0")
            self._cdf_lo = float(std_normal_cdf((self.sigma_min - self.loc) / self.scale))
            self._norm = float(std_normal_cdf((self.sigma_max - self.loc) / self.scale)) - self._cdf_lo
        if self._norm <= 0:
            raise ValueError("window carries no probability mass")
        self._slack = 1e-12 * max(1.0, abs(float(self.sigma_max)))

    # --- density / CDF -------------------------------------------------

    def _check_support(self, sigma):
        sv = np.asarray(sigma, dtype=float)
        if np.any(sv < self.sigma_min - self._slack) or np.any(sv > self.sigma_max + self._slack):
            raise ValueError("sigma outside the market window")
        return np.clip(sv, self.sigma_min, self.sigma_max)

    def _check_support_scalar(self, sigma):
        s = float(sigma)
        if s < self.sigma_min - self._slack or s > self.sigma_max + self._slack:
            raise ValueError("sigma outside the market window")
        return min(max(s, self.sigma_min), self.sigma_max)

    def pdf(self, sigma):
        if np.ndim(sigma) == 0:
            s = self._check_support_scalar(sigma)
            if self.kind == "uniform":
                return 1.0 / (self.sigma_max - self.sigma_min)
            if self.kind == "exponential":
                return self.rate * math.exp(-self.rate * s) / self._norm
            z = (s - self.loc) / self.scale
            return std_normal_pdf(z) / (self.scale * self._norm)
        sv = self._check_support(sigma)
        if self.kind == "uniform":
            return np.full_like(sv, 1.0 / (self.sigma_max - self.sigma_min))
        if self.kind == "exponential":
            return self.rate * np.exp(-self.rate * sv) / self._norm
        z = (sv - self.loc) / self.scale
        return std_normal_pdf(z) / (self.scale * self._norm)

    def cdf(self, sigma):
        if np.ndim(sigma) == 0:
            s = self._check_support_scalar(sigma)
            if self.kind == "uniform":
                return (s - self.sigma_min) / (self.sigma_max - self.sigma_min)
            if self.kind == "exponential":
                return (self._exp_lo - math.exp(-self.rate * s)) / self._norm
            z = (s - self.loc) / self.scale
            return (std_normal_cdf(z) - self._cdf_lo) / self._norm
        sv = self._check_support(sigma)
        if self.kind == "uniform":
            return (sv - self.sigma_min) / (self.sigma_max - self.sigma_min)
        if self.kind == "exponential":
            return (self._exp_lo - np.exp(-self.rate * sv)) / self._norm
        z = (sv - self.loc) / self.scale
        return (std_normal_cdf(z) - self._cdf_lo) / self._norm

    def pdf_dsigma(self, sigma):
        """g'(sigma); zero for uniform, -rate*g for exponential,
        -((sigma-loc)/scale^2)*g for the truncated normal."""
        if np.ndim(sigma) == 0:
            s = self._check_support_scalar(sigma)
            if self.kind == "uniform":
                return 0.0
            if self.kind == "exponential":
                return -self.rate * (self.rate * math.exp(-self.rate * s) / self._norm)
            z = (s - self.loc) / self.scale
            return -(z / self.scale) * std_normal_pdf(z) / (self.scale * self._norm)
        sv = self._check_support(sigma)
        if self.kind == "uniform":
            return np.zeros_like(sv)
        if self.kind == "exponential":
            return -self.rate * (self.rate * np.exp(-self.rate * sv) / self._norm)
        z = (sv - self.loc) / self.scale
        return -(z / self.scale) * std_normal_pdf(z) / (self.scale * self._norm)

    def quantile(self, p):
        """G^{-1}(p) on [0, 1]."""
        pv = np.asarray(p, dtype=float)
        if np.any((pv < 0) | (pv > 1)):
            raise ValueError("quantile argument must lie in [0, 1]")
        if self.kind == "uniform":
            out = self.sigma_min + pv * (self.sigma_max - self.sigma_min)
        elif self.kind == "exponential":
            out = -np.log(np.exp(-self.rate * self.sigma_min) - pv * self._norm) / self.rate
        else:
            zlo = (self.sigma_min - self.loc) / self.scale
            base = std_normal_cdf(zlo) + pv * self._norm
            base = np.clip(base, 1e-300, 1.0 - 1e-16)
            out = self.loc + self.scale * std_normal_quantile(base)
        out = np.clip(out, self.sigma_min, self.sigma_max)
        return out if np.ndim(p) else float(out)

    def count_between(self, lo, hi):
        """Consumer mass with type in (lo, hi]."""
        if np.any(np.asarray(hi) < np.asarray(lo)):
            raise ValueError("need lo <= hi")
        return self.size * (self.cdf(hi) - self.cdf(lo))

    @property
    def total_count(self):
        return float(self.size)

    # --- boundary-unimodality condition --------------------------------

    def theorem3_condition(self, sigma):
        """Slack F(sigma) of the shape condition; >= 0 means the grouped
        boundary objectives are unimodal at this sigma.

        At sigma = 0 the G/sigma term vanishes (G(0) = 0 at least
        linearly) and the slack reduces to 2*g(0).
        """
        if np.ndim(sigma):
            return np.array([self.theorem3_condition(float(s)) for s in np.asarray(sigma, dtype=float)])
        s = float(sigma)
        g = self.pdf(s)
        if s == 0.0:
            return 2.0 * g
        G = self.cdf(s)
        gp = self.pdf_dsigma(s)
        return (2.0 * g * g - gp * G) / g - SHAPE_CONSTANT * G / s

    def verify_theorem3(self, grid_points=1000, tol=-1e-10):
        """Minimum slack of the shape condition over an equispaced grid.

        Reports are cached per (grid_points, tol) on the market object,
        which solver restarts and group sweeps hit repeatedly; market
        parameters never change after construction.
        """
        key = (int(grid_points), float(tol))
        cache = self.__dict__.setdefault("_theorem3_cache", {})
        if key not in cache:
            grid = np.linspace(self.sigma_min, self.sigma_max, int(grid_points))
            slack = self.theorem3_condition(grid)
            i = int(np.argmin(slack))
            cache[key] = Theorem3Report(
                holds=bool(slack[i] >= tol),
                min_slack=float(slack[i]),
                argmin_sigma=float(grid[i]),
                grid_points=int(grid_points),
            )
        return cache[key]


@dataclass
class Theorem3Report:
    holds: bool
    min_slack: float
    argmin_sigma: float
    grid_points: int


def make_market(kind, sigma_min, sigma_max, size=1.0, **params) -> ContinuousMarket:
    """Convenience constructor mapping scenario-file keys to fields."""
    return ContinuousMarket(
        kind=kind,
        sigma_min=sigma_min,
        sigma_max=sigma_max,
        size=size,
        rate=params.get("rate"),
        loc=params.get("loc"),
        scale=params.get("scale"),
    )
