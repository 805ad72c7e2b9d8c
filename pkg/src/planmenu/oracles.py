"""Independent checks for the solvers: nothing here reuses solver logic.

- brute_force_ic_ir re-derives every consumer's best choice from raw
  utilities and confirms the menu's assignment wins (or that opting
  out is right for unserved types).
- grid_oracle_discrete literally enumerates ascending period tuples on
  a grid, pricing each tuple by the telescoping chain and summing
  margins — no per-type objective, no pooling.
- grid_oracle_grouped maximizes over ascending boundary and period
  tuples on grids by exact dynamic programming over per-boundary
  profit terms; it returns the same maximum literal enumeration would.
- monte_carlo_valuation estimates the valuation integral by simulating
  period demand (inverse-CDF draws from a seeded 64-bit generator).
- fixed_period_baseline prices a single fixed-period plan, either
  covering the whole market (price at the top type's valuation) or
  with a profit-maximizing marginal type.
- social_metrics compares realized social surplus against the
  first-best that ignores incentive constraints.
"""

from dataclasses import dataclass, field
from math import comb
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import fixed_quad
from scipy.special import ndtri

from .discrete import DEFAULT_T_DOMAIN, DiscreteSolution, maximize_concave
from .distributions import ContinuousMarket, DiscreteMarket
from .grouped import GroupedSolution, maximize_unimodal
from .market import cost, valuation

TUPLE_BUDGET = 1e8


# --- incentive compatibility / participation ---------------------------


@dataclass
class FeasibilityCertificate:
    passed: bool
    worst_ic_violation: float
    worst_ir_violation: float
    violating_pair: Optional[Tuple[float, int, int]]  # (type, item chosen, item assigned; -1 = opt out)
    tol: float
    n_consumers_checked: int


def brute_force_ic_ir(
    profile,
    market,
    periods,
    prices,
    boundaries=None,
    tol=1e-9,
    n_samples=500,
) -> FeasibilityCertificate:
    """Check every consumer prefers her assigned item (IC) and gets
    nonnegative utility from it (IR), both within tol.

    Discrete markets are checked type by type against their own menu
    position.  Continuous markets need the group boundaries; n_samples
    types are scanned across the whole window (plus the boundaries
    themselves), and types above the top boundary must prefer opting
    out — no item may tempt them beyond tol.
    """
    t = np.asarray(periods, dtype=float)
    p = np.asarray(prices, dtype=float)
    if isinstance(market, DiscreteMarket):
        sigmas = market.sigmas
        assigned = np.arange(market.n_types)
    else:
        if boundaries is None:
            raise ValueError("continuous markets need boundaries for the assignment")
        b = np.asarray(boundaries, dtype=float)
        sigmas = np.unique(np.concatenate([np.linspace(market.sigma_min, market.sigma_max, n_samples), b]))
        assigned = np.searchsorted(b, sigmas, side="left")  # == len(b) above the top boundary

    utilities = np.empty((sigmas.size, t.size))
    for j in range(t.size):
        utilities[:, j] = valuation(profile, sigmas, t[j]) - p[j]

    worst_ic = 0.0  # violation magnitudes; 0 when every check is comfortable
    worst_ir = 0.0
    pair = None
    for row, (sig, k) in enumerate(zip(sigmas, assigned)):
        u = utilities[row]
        if k >= t.size:  # unserved: opting out must be best
            j = int(np.argmax(u))
            if u[j] > worst_ic:
                worst_ic = float(u[j])
                pair = (float(sig), j, -1)
            continue
        if t.size > 1:
            masked = np.where(np.arange(t.size) == k, -np.inf, u)
            j = int(np.argmax(masked))
            temptation = float(masked[j] - u[k])
            if temptation > worst_ic:
                worst_ic = temptation
                pair = (float(sig), j, int(k))
        worst_ir = max(worst_ir, float(-u[k]))
    passed = worst_ic <= tol and worst_ir <= tol
    return FeasibilityCertificate(
        passed=passed,
        worst_ic_violation=float(worst_ic),
        worst_ir_violation=float(worst_ir),
        violating_pair=pair,
        tol=tol,
        n_consumers_checked=int(sigmas.size),
    )


def realized_profit(profile, cost_model, market: DiscreteMarket, periods, prices):
    """Profit when every type freely picks its utility-maximizing item
    (or walks away).  Used to check that no price perturbation beats
    the telescoping chain."""
    t = np.asarray(periods, dtype=float)
    p = np.asarray(prices, dtype=float)
    total = 0.0
    for sig, n in zip(market.sigmas, market.counts):
        u = valuation(profile, sig, t) - p
        j = int(np.argmax(u))
        if u[j] >= 0.0:
            total += n * (p[j] - cost(cost_model, t[j]))
    return total


# --- grid oracles -------------------------------------------------------


def grid_oracle_discrete(profile, cost_model, market: DiscreteMarket, t_grid, budget=TUPLE_BUDGET):
    """Exhaustive search over ascending period tuples on t_grid.

    Prices each candidate tuple by the telescoping chain and sums
    count-weighted margins directly.  Supports up to four types (the
    two lowest-type coordinates are vectorized; higher coordinates are
    explicit loops).  Refuses grids whose ascending-tuple count
    exceeds the budget.
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly ascending")
    n = t.size
    n_types = market.n_types
    if n_types > 4:
        raise ValueError("grid oracle supports at most four types")
    n_tuples = comb(n + n_types - 1, n_types)
    if n_tuples > budget:
        raise ValueError(f"{n_tuples} ascending tuples exceed the budget {budget:g}")

    V = np.vstack([valuation(profile, sig, t) for sig in market.sigmas])  # (I, n)
    Ct = cost(cost_model, t)
    N = market.counts

    best = -np.inf
    best_idx = None

    if n_types == 1:
        prof = N[0] * (V[0] - Ct)
        j = int(np.argmax(prof))
        return float(prof[j]), t[[j]]

    jj = np.arange(n)
    lower_tri_mask = jj[:, None] <= jj[None, :]  # j0 <= j1

    def scan_pair(j_hi, price_hi, partial):
        """Best over (j0 <= j1 <= j_hi) given item above at j_hi, price_hi."""
        nonlocal best, best_idx
        m = j_hi + 1
        pi1 = price_hi + V[1, :m] - V[1, j_hi]
        col = partial + N[1] * (pi1 - Ct[:m])
        pi0 = pi1[None, :] + V[0, :m, None] - V[0, None, :m]
        mat = col[None, :] + N[0] * (pi0 - Ct[:m, None])
        mat = np.where(lower_tri_mask[:m, :m], mat, -np.inf)
        j0, j1 = np.unravel_index(int(np.argmax(mat)), mat.shape)
        if mat[j0, j1] > best:
            best = float(mat[j0, j1])
            best_idx = (int(j0), int(j1))

    if n_types == 2:
        pi1 = V[1]
        col = N[1] * (pi1 - Ct)
        pi0 = pi1[None, :] + V[0][:, None] - V[0][None, :]
        mat = col[None, :] + N[0] * (pi0 - Ct[:, None])
        mat = np.where(lower_tri_mask, mat, -np.inf)
        j0, j1 = np.unravel_index(int(np.argmax(mat)), mat.shape)
        return float(mat[j0, j1]), t[[j0, j1]]

    if n_types == 3:
        trail = {}
        for j2 in range(n):
            price2 = float(V[2, j2])
            partial = N[2] * (price2 - Ct[j2])
            before = best
            scan_pair(j2, price2, partial)
            if best > before:
                trail["j2"] = j2
        j0, j1 = best_idx
        return float(best), t[[j0, j1, trail["j2"]]]

    # four types
    trail = {}
    for j3 in range(n):
        price3 = float(V[3, j3])
        part3 = N[3] * (price3 - Ct[j3])
        for j2 in range(j3 + 1):
            price2 = price3 + float(V[2, j2] - V[2, j3])
            partial = part3 + N[2] * (price2 - Ct[j2])
            before = best
            scan_pair(j2, price2, partial)
            if best > before:
                trail["j2"], trail["j3"] = j2, j3
    j0, j1 = best_idx
    return float(best), t[[j0, j1, trail["j2"], trail["j3"]]]


def _cummax_with_arg(a, axis):
    running = np.maximum.accumulate(a, axis=axis)
    shape = [1, 1]
    shape[axis] = a.shape[axis]
    idx = np.arange(a.shape[axis]).reshape(shape)
    arg = np.maximum.accumulate(np.where(a >= running, idx, -1), axis=axis)
    return running, arg


def grid_oracle_grouped(
    profile,
    cost_model,
    market: ContinuousMarket,
    n_groups,
    sigma_grid,
    t_grid,
    budget=TUPLE_BUDGET,
):
    """Exact grid optimum over ascending boundary AND period tuples.

    Profit decomposes into per-boundary terms
    psi(s, t_k) - psi(s, t_{k+1}) (with psi = N*G*(V - C) and the last
    group keeping its own psi), so a K-stage dynamic program over the
    (boundary, period) table — two running maxima per stage — yields
    the exact maximum of literal enumeration.  Returns
    (profit, boundaries, periods).
    """
    sg = np.asarray(sigma_grid, dtype=float)
    tg = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(sg) <= 0) or np.any(np.diff(tg) <= 0):
        raise ValueError("grids must be strictly ascending")
    if n_groups * sg.size * tg.size > budget:
        raise ValueError("grid DP exceeds the work budget")

    G = market.cdf(sg) * market.size
    Vt = valuation(profile, sg[:, None], tg[None, :])
    psi = G[:, None] * (Vt - cost(cost_model, tg)[None, :])

    D = psi.copy()
    back = []
    for _ in range(1, n_groups):
        M, argj = _cummax_with_arg(D, axis=1)
        inner, args = _cummax_with_arg(M - psi, axis=0)
        back.append((argj, args))
        D = psi + inner

    s_k, j_k = np.unravel_index(int(np.argmax(D)), D.shape)
    profit = float(D[s_k, j_k])
    s_idx = [int(s_k)]
    j_idx = [int(j_k)]
    for argj, args in reversed(back):
        s_prev = int(args[s_idx[0], j_idx[0]])
        j_prev = int(argj[s_prev, j_idx[0]])
        s_idx.insert(0, s_prev)
        j_idx.insert(0, j_prev)
    return profit, sg[s_idx], tg[j_idx]


# --- Monte Carlo check of the valuation formula -------------------------


def monte_carlo_valuation(profile, sigma, t, n_samples=1_000_000, seed=0):
    """Simulate period demand and average the unmet excess.

    Demand over a period of length t is normal with mean mu*t and sd
    sigma*sqrt(t); draws come from inverse-CDF transforms of a seeded
    64-bit uniform stream.  Returns (estimate, standard_error) of the
    per-unit-time valuation.
    """
    if sigma < 0 or t <= 0:
        raise ValueError("need sigma >= 0 and t > 0")
    rng = np.random.default_rng(seed)
    z = ndtri(rng.random(int(n_samples)))
    demand = profile.mu * t + sigma * np.sqrt(t) * z
    unmet = np.maximum(demand - profile.q * t, 0.0)
    estimate = profile.alpha * (profile.mu - unmet.mean() / t)
    if n_samples > 1:
        se = profile.alpha * unmet.std(ddof=1) / (t * np.sqrt(n_samples))
    else:
        se = float("inf")
    return float(estimate), float(se)


# --- baselines and welfare ----------------------------------------------


@dataclass
class BaselineResult:
    period: float
    coverage: str  # "full" or "optimized"
    price: float
    marginal_sigma: float
    served: float
    profit: float


def fixed_period_baseline(profile, cost_model, market, t_fixed, coverage="full") -> BaselineResult:
    """Best single-item menu at a frozen period.

    coverage="full": price at the top type's valuation so the whole
    market participates (the incumbent's one-size-fits-all plan).
    coverage="optimized": choose the marginal served type to maximize
    profit (a stronger baseline; uplifts against it are conservative).
    """
    c = cost(cost_model, t_fixed)
    if isinstance(market, DiscreteMarket):
        margins = valuation(profile, market.sigmas, t_fixed) - c
        served = np.cumsum(market.counts)
        profits = served * margins
        j = market.n_types - 1 if coverage == "full" else int(np.argmax(profits))
        sig = float(market.sigmas[j])
        return BaselineResult(
            period=float(t_fixed),
            coverage=coverage,
            price=float(valuation(profile, sig, t_fixed)),
            marginal_sigma=sig,
            served=float(served[j]),
            profit=float(profits[j]),
        )
    if coverage == "full":
        sig = market.sigma_max
    else:
        sig, _ = maximize_unimodal(
            lambda s: market.size * market.cdf(s) * (valuation(profile, s, t_fixed) - c),
            market.sigma_min,
            market.sigma_max,
            coarse_grid=2000,
        )
    served = market.size * market.cdf(sig)
    return BaselineResult(
        period=float(t_fixed),
        coverage=coverage,
        price=float(valuation(profile, sig, t_fixed)),
        marginal_sigma=float(sig),
        served=float(served),
        profit=float(served * (valuation(profile, sig, t_fixed) - c)),
    )


@dataclass
class SocialReport:
    surplus_contract: float
    surplus_first_best: float
    ratio: float


def _first_best_surplus_rate(profile, cost_model, sigma, t_domain):
    _, v = maximize_concave(lambda t: valuation(profile, sigma, t) - cost(cost_model, t), *t_domain)
    return max(v, 0.0)


def social_metrics(profile, cost_model, market, solution, t_domain=DEFAULT_T_DOMAIN) -> SocialReport:
    """Realized vs first-best social surplus (value minus cost; prices
    are transfers and cancel)."""
    if isinstance(solution, DiscreteSolution):
        contract = float(
            np.dot(
                market.counts,
                valuation(profile, market.sigmas, solution.periods) - cost(cost_model, solution.periods),
            )
        )
        first_best = float(
            sum(
                n * _first_best_surplus_rate(profile, cost_model, sig, t_domain)
                for sig, n in zip(market.sigmas, market.counts)
            )
        )
    elif isinstance(solution, GroupedSolution):
        contract = 0.0
        lo = market.sigma_min
        for sig_hi, t_k in zip(solution.boundaries, solution.periods):
            if sig_hi > lo:
                val, _ = fixed_quad(
                    lambda s: (valuation(profile, s, t_k) - cost(cost_model, t_k)) * market.pdf(s),
                    lo,
                    sig_hi,
                    n=96,
                )
                contract += market.size * float(val)
            lo = sig_hi
        val, _ = fixed_quad(
            lambda s: np.array(
                [_first_best_surplus_rate(profile, cost_model, float(x), t_domain) for x in np.atleast_1d(s)]
            )
            * market.pdf(s),
            market.sigma_min,
            market.sigma_max,
            n=96,
        )
        first_best = market.size * float(val)
    else:
        raise TypeError("unknown solution type")
    return SocialReport(
        surplus_contract=contract,
        surplus_first_best=first_best,
        ratio=contract / first_best if first_best else float("nan"),
    )


@dataclass
class BaselineRow:
    period: float
    profit_full: float
    profit_optimized: float
    uplift_full_percent: float
    uplift_optimized_percent: float


@dataclass
class ComparisonReport:
    optimal_profit: float
    baselines: List[BaselineRow] = field(default_factory=list)
    social: Optional[SocialReport] = None

    def uplift_percent(self, period, coverage="full"):
        for row in self.baselines:
            if row.period == period:
                return row.uplift_full_percent if coverage == "full" else row.uplift_optimized_percent
        raise KeyError(f"no baseline at period {period}")


def build_comparison(
    profile, cost_model, market, solution, baseline_periods: Sequence[float] = (1.0,)
) -> ComparisonReport:
    report = ComparisonReport(optimal_profit=float(solution.total_profit))
    for t_fixed in baseline_periods:
        full = fixed_period_baseline(profile, cost_model, market, t_fixed, coverage="full")
        opt = fixed_period_baseline(profile, cost_model, market, t_fixed, coverage="optimized")
        report.baselines.append(
            BaselineRow(
                period=float(t_fixed),
                profit_full=full.profit,
                profit_optimized=opt.profit,
                uplift_full_percent=100.0 * (solution.total_profit / full.profit - 1.0),
                uplift_optimized_percent=100.0 * (solution.total_profit / opt.profit - 1.0),
            )
        )
    report.social = social_metrics(profile, cost_model, market, solution)
    return report
