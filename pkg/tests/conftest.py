"""Shared fixtures: the default demand profile, cost model, and markets."""

import math

import numpy as np
import pytest
from scipy import optimize

from planmenu.distributions import ContinuousMarket
from planmenu.market import CostModel, DemandProfile
from planmenu.normals import std_normal_cdf, std_normal_pdf


@pytest.fixture(scope="session")
def profile():
    return DemandProfile(alpha=1.0, mu=13.0, q=15.0)


@pytest.fixture(scope="session")
def cost_model():
    return CostModel(c0=10.0, c1=0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)


class ValleyMarket(ContinuousMarket):
    """Two-bump normal mixture on [0, 6].

    The built-in families all satisfy the boundary-unimodality shape
    condition, so tests of the failure path need a density with a valley:
    mass piles up under the first bump, then the density collapses and
    rises again, which drives the condition negative on the rising flank.
    """

    W1, M1, M2, S = 0.7, 0.5, 5.5, 0.3

    def __post_init__(self):
        super().__post_init__()
        z = lambda m, s: (s - m) / self.S
        self._mix_norm = self.W1 * (std_normal_cdf(z(self.M1, 6.0)) - std_normal_cdf(z(self.M1, 0.0))) + (
            1 - self.W1
        ) * (std_normal_cdf(z(self.M2, 6.0)) - std_normal_cdf(z(self.M2, 0.0)))

    def pdf(self, sigma):
        if np.ndim(sigma):
            return np.array([self.pdf(float(s)) for s in np.asarray(sigma)])
        s = self._check_support_scalar(sigma)
        z1 = (s - self.M1) / self.S
        z2 = (s - self.M2) / self.S
        raw = self.W1 * std_normal_pdf(z1) + (1 - self.W1) * std_normal_pdf(z2)
        return raw / (self.S * self._mix_norm)

    def cdf(self, sigma):
        if np.ndim(sigma):
            return np.array([self.cdf(float(s)) for s in np.asarray(sigma)])
        s = self._check_support_scalar(sigma)
        z = lambda m: (s - m) / self.S
        z0 = lambda m: (0.0 - m) / self.S
        raw = self.W1 * (std_normal_cdf(z(self.M1)) - std_normal_cdf(z0(self.M1))) + (
            1 - self.W1
        ) * (std_normal_cdf(z(self.M2)) - std_normal_cdf(z0(self.M2)))
        return raw / self._mix_norm

    def pdf_dsigma(self, sigma):
        if np.ndim(sigma):
            return np.array([self.pdf_dsigma(float(s)) for s in np.asarray(sigma)])
        s = self._check_support_scalar(sigma)
        z1 = (s - self.M1) / self.S
        z2 = (s - self.M2) / self.S
        raw = -self.W1 * z1 * std_normal_pdf(z1) - (1 - self.W1) * z2 * std_normal_pdf(z2)
        return raw / (self.S ** 2 * self._mix_norm)

    def quantile(self, p):
        if np.ndim(p):
            return np.array([self.quantile(float(x)) for x in np.asarray(p)])
        if not 0.0 <= p <= 1.0:
            raise ValueError("quantile argument must lie in [0, 1]")
        if p == 0.0:
            return self.sigma_min
        if p == 1.0:
            return self.sigma_max
        return float(optimize.brentq(lambda s: self.cdf(s) - p, 0.0, 6.0, xtol=1e-12))


@pytest.fixture(scope="session")
def valley_market():
    return ValleyMarket(kind="uniform", sigma_min=0.0, sigma_max=6.0, size=1.0)
