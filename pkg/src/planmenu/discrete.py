"""Optimal menu design for finitely many consumer types.

The provider offers one (period, price) item per type.  With types
ascending in volatility, feasibility (every consumer prefers her own
item and participates) reduces to four checks: periods ascend, the top
price leaves the top type at zero utility or better, and each adjacent
price gap is sandwiched between the two types' valuation drops.  At the
profit maximum the price chain telescopes down from the top type's
valuation, and the provider's profit separates into one concave
objective per type:

    P_i(t) = N_i * (V(sigma_i, t) - C(t))
             + (sum of counts below i) * (V(sigma_i, t) - V(sigma_i-1, t))

The second term is the information rent every lower type extracts when
type i's item grows more attractive.  Maximizing each P_i alone can
break the ascending-period requirement; the repair step pools adjacent
violators onto one shared period (the pooled objective is the block
sum), which is exactly the constrained optimum.
"""

import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .market import cost, valuation

INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
INVPHI2 = (3.0 - np.sqrt(5.0)) / 2.0

#: Search window for service periods (days, say): strictly positive,
#: generous upper end.  Objectives flatten far below the cap; the
#: solver warns if an argmax presses against it.
DEFAULT_T_DOMAIN = (1e-4, 600.0)


def golden_section_max(f, lo, hi, rel_arg_tol=1e-10):
    """Maximize a unimodal f on [lo, hi] by golden-section search.

    Returns (argmax, value).  Argument tolerance is relative to the
    interval width; ~50 iterations for the default.
    """
    if not (hi > lo):
        raise ValueError("need lo < hi")
    a, b = float(lo), float(hi)
    h = b - a
    tol = rel_arg_tol * h
    c = a + INVPHI2 * h
    d = a + INVPHI * h
    fc = f(c)
    fd = f(d)
    while h > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + INVPHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + INVPHI * h
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def maximize_concave(f, lo, hi, rel_arg_tol=1e-10, probe_tol=1e-9):
    """Golden-section maximum of a concave f on [lo, hi].

    A three-point midpoint-concavity probe guards against misuse: for
    equally spaced x1 < x2 < x3, concavity demands
    f(x2) >= (f(x1) + f(x3)) / 2 up to roundoff.
    """
    x1 = lo + 0.25 * (hi - lo)
    x2 = lo + 0.50 * (hi - lo)
    x3 = lo + 0.75 * (hi - lo)
    f1, f2, f3 = f(x1), f(x2), f(x3)
    scale = max(1.0, abs(f1), abs(f2), abs(f3))
    if f2 - 0.5 * (f1 + f3) < -probe_tol * scale:
        raise ValueError("objective failed the three-point concavity probe")
    return golden_section_max(f, lo, hi, rel_arg_tol=rel_arg_tol)


@dataclass
class PooledBlock:
    """A run of menu positions forced onto one shared decision value."""

    start: int  # first index in the run (0-based, inclusive)
    stop: int  # last index (inclusive)
    value: float  # the shared argmax


def repair_monotone(objectives, lo, hi, optimizer=maximize_concave) -> Tuple[np.ndarray, List[PooledBlock]]:
    """Ascending joint maximizer of sum_i f_i(x_i) s.t. x_1 <= ... <= x_n.

    objectives: list of 1-D callables, each maximized on [lo, hi].
    Starts from the unconstrained argmaxes; while any strict descent
    remains, pools the leftmost maximal nonincreasing run containing a
    strict descent onto the single value maximizing the run's summed
    objective, then rescans.  Returns the per-index values plus the
    blocks that ended up pooled.
    """
    n = len(objectives)
    blocks = []  # (index list, argmax, value)
    for i, f in enumerate(objectives):
        x, fx = optimizer(f, lo, hi)
        blocks.append(([i], x, fx))

    def leftmost_violating_run():
        j = 0
        while j + 1 < len(blocks):
            if blocks[j][1] > blocks[j + 1][1]:  # strict descent
                start = j
                while start > 0 and blocks[start - 1][1] >= blocks[start][1]:
                    start -= 1
                stop = j + 1
                while stop + 1 < len(blocks) and blocks[stop][1] >= blocks[stop + 1][1]:
                    stop += 1
                return start, stop
            j += 1
        return None

    while True:
        run = leftmost_violating_run()
        if run is None:
            break
        start, stop = run
        members = [i for b in blocks[start : stop + 1] for i in b[0]]
        pooled = [objectives[i] for i in members]
        x, fx = optimizer(lambda t: sum(f(t) for f in pooled), lo, hi)
        blocks[start : stop + 1] = [(members, x, fx)]

    out = np.empty(n)
    pooled_blocks = []
    for members, x, _ in blocks:
        out[members] = x
        if len(members) > 1:
            pooled_blocks.append(PooledBlock(start=members[0], stop=members[-1], value=x))
    return out, pooled_blocks


# --- the discrete menu problem -----------------------------------------


def type_objective(profile, cost_model, market, i, t):
    """P_i(t): type i's contribution to total profit at the price optimum.

    Vectorizes over t.
    """
    sig = market.sigmas[i]
    own = market.counts[i] * (valuation(profile, sig, t) - cost(cost_model, t))
    if i == 0:
        return own
    rent = valuation(profile, sig, t) - valuation(profile, market.sigmas[i - 1], t)
    return own + market.count_below(i) * rent


def optimal_prices(profile, market, periods):
    """Profit-maximizing prices for ascending periods: the top type pays
    her full valuation; each lower price follows by the binding
    indifference of the type just below the gap."""
    periods = np.asarray(periods, dtype=float)
    n = market.n_types
    if periods.shape != (n,):
        raise ValueError("need one period per type")
    if np.any(np.diff(periods) < 0):
        raise ValueError("periods must be ascending")
    prices = np.empty(n)
    prices[-1] = valuation(profile, market.sigmas[-1], periods[-1])
    for i in range(n - 2, -1, -1):
        sig = market.sigmas[i]
        prices[i] = prices[i + 1] + valuation(profile, sig, periods[i]) - valuation(profile, sig, periods[i + 1])
    return prices


@dataclass
class FeasibilityReport:
    """Outcome of the four-condition menu feasibility check."""

    passed: bool
    condition: Optional[str] = None  # first violated condition, if any
    index: Optional[int] = None  # menu position where it failed
    violation: float = 0.0  # magnitude of the worst violation
    tol: float = 1e-9


def feasibility_check(profile, market, periods, prices, tol=1e-9) -> FeasibilityReport:
    """Check the four menu-feasibility conditions at tolerance tol:

    (a) periods ascend;
    (b) the top type participates: pi_I <= V(sigma_I, t_I);
    (c/d) each adjacent price gap pi_i - pi_{i+1} lies between the
          valuation drop of the higher type and that of the lower type.
    """
    periods = np.asarray(periods, dtype=float)
    prices = np.asarray(prices, dtype=float)
    n = market.n_types
    descent = -np.diff(periods)
    if n > 1 and descent.max() > tol:
        i = int(np.argmax(descent))
        return FeasibilityReport(False, "periods_ascending", i, float(descent[i]), tol)
    gap = prices[-1] - valuation(profile, market.sigmas[-1], periods[-1])
    if gap > tol:
        return FeasibilityReport(False, "top_participation", n - 1, float(gap), tol)
    worst = 0.0
    for i in range(n - 1):
        drop_hi = valuation(profile, market.sigmas[i + 1], periods[i]) - valuation(
            profile, market.sigmas[i + 1], periods[i + 1]
        )
        drop_lo = valuation(profile, market.sigmas[i], periods[i]) - valuation(
            profile, market.sigmas[i], periods[i + 1]
        )
        gap = prices[i] - prices[i + 1]
        if drop_hi - gap > tol:
            return FeasibilityReport(False, "price_floor", i, float(drop_hi - gap), tol)
        if gap - drop_lo > tol:
            return FeasibilityReport(False, "price_ceiling", i, float(gap - drop_lo), tol)
        worst = max(worst, drop_hi - gap, gap - drop_lo)
    return FeasibilityReport(True, None, None, float(max(worst, 0.0)), tol)


@dataclass
class DiscreteSolution:
    periods: np.ndarray
    prices: np.ndarray
    total_profit: float
    objective_values: np.ndarray  # P_i at the chosen periods
    pooled_blocks: List[PooledBlock] = field(default_factory=list)
    feasibility: Optional[FeasibilityReport] = None


def solve_discrete(profile, cost_model, market, t_domain=DEFAULT_T_DOMAIN) -> DiscreteSolution:
    """Profit-maximizing menu for a discrete market.

    Per-type concave search, ascending repair by pooling, then the
    telescoping price chain.  The period cap is asserted non-binding.
    """
    lo, hi = t_domain
    objectives = [
        (lambda i: (lambda t: type_objective(profile, cost_model, market, i, t)))(i)
        for i in range(market.n_types)
    ]
    periods, pooled = repair_monotone(objectives, lo, hi, optimizer=maximize_concave)
    if np.any(periods > hi - 1e-6 * (hi - lo)):
        warnings.warn("a period argmax pressed against the search cap; consider widening t_domain", RuntimeWarning)
    prices = optimal_prices(profile, market, periods)
    report = feasibility_check(profile, market, periods, prices)
    if not report.passed:
        raise RuntimeError(f"constructed menu failed feasibility: {report}")
    margins = prices - cost(cost_model, periods)
    total = float(np.dot(market.counts, margins))
    values = np.array([type_objective(profile, cost_model, market, i, periods[i]) for i in range(market.n_types)])
    return DiscreteSolution(
        periods=periods,
        prices=prices,
        total_profit=total,
        objective_values=values,
        pooled_blocks=pooled,
        feasibility=report,
    )
