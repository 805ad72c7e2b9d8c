"""Command-line front end.

    planmenu solve      --scenario PATH --out DIR [--threads N] [--seed S]
    planmenu sweep      --scenario PATH --groups 1,2,3 --out DIR
    planmenu verify     --solution solution.csv --scenario PATH
    planmenu oracle     --scenario PATH --grid-step H [--t-max T]
    planmenu check-dist --scenario PATH

Exit status is 0 only when every verification passes; artifacts are
still written on failure.
"""

import argparse
import json
import sys

import numpy as np

from . import runner
from .distributions import ContinuousMarket, DiscreteMarket
from .oracles import grid_oracle_discrete, grid_oracle_grouped
from .scenarios import bundled_scenario_names, load_scenario


def _cmd_solve(args):
    scenario = load_scenario(args.scenario)
    artifacts = runner.run(scenario, args.out, threads=args.threads, seed=args.seed)
    print(f"scenario {scenario.name}: profit {artifacts.solution.total_profit:.6f}")
    for row in artifacts.report.baselines:
        print(
            f"  vs fixed t={row.period:g}: +{row.uplift_full_percent:.1f}% "
            f"(full coverage), +{row.uplift_optimized_percent:.1f}% (optimized cutoff)"
        )
    if artifacts.report.social is not None:
        print(f"  social surplus ratio {100 * artifacts.report.social.ratio:.1f}%")
    print(f"  artifacts in {args.out} ({'PASS' if artifacts.ok else 'FAIL'})")
    return 0 if artifacts.ok else 2


def _cmd_sweep(args):
    scenario = load_scenario(args.scenario)
    groups = [int(k) for k in args.groups.split(",") if k.strip()]
    rows = runner.sweep_groups(scenario, groups, args.out, threads=args.threads, seed=args.seed)
    for r in rows:
        print(f"K={r['groups']}: profit {r['profit']:.6f} (+{r['uplift_percent']:.1f}% vs fixed)")
    return 0


def _cmd_verify(args):
    scenario = load_scenario(args.scenario)
    ok, details = runner.verify_solution_csv(scenario, args.solution)
    print(json.dumps(details, indent=2, default=str))
    print("verification PASS" if ok else "verification FAIL")
    return 0 if ok else 2


def _cmd_oracle(args):
    scenario = load_scenario(args.scenario)
    h = args.grid_step
    t_grid = np.arange(h, args.t_max + 0.5 * h, h)
    if isinstance(scenario.market, DiscreteMarket):
        profit, periods = grid_oracle_discrete(scenario.profile, scenario.cost_model, scenario.market, t_grid)
        print(f"grid optimum {profit:.8f} at periods {np.round(periods, 6).tolist()}")
    else:
        m: ContinuousMarket = scenario.market
        n_sigma = int(round((m.sigma_max - m.sigma_min) / h)) + 1
        sigma_grid = np.linspace(m.sigma_min, m.sigma_max, n_sigma)
        profit, bounds, periods = grid_oracle_grouped(
            scenario.profile, scenario.cost_model, m, scenario.solver.n_groups, sigma_grid, t_grid
        )
        print(
            f"grid optimum {profit:.8f} at boundaries {np.round(bounds, 6).tolist()} "
            f"periods {np.round(periods, 6).tolist()}"
        )
    return 0


def _cmd_check_dist(args):
    scenario = load_scenario(args.scenario)
    if not isinstance(scenario.market, ContinuousMarket):
        print("discrete market: no density shape condition to check")
        return 0
    report = scenario.market.verify_theorem3(grid_points=args.grid_points)
    print(
        f"boundary-unimodality condition: min slack {report.min_slack:.6g} "
        f"at sigma={report.argmin_sigma:.4f} over {report.grid_points} points -> "
        f"{'HOLDS' if report.holds else 'FAILS'}"
    )
    return 0 if report.holds else 2


def main(argv=None):
    parser = argparse.ArgumentParser(prog="planmenu", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a scenario and write artifacts")
    p.add_argument("--scenario", required=True, help=f"path or bundled name ({', '.join(bundled_scenario_names())})")
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="profit vs number of menu items")
    p.add_argument("--scenario", required=True)
    p.add_argument("--groups", required=True, help="comma-separated K values, e.g. 1,2,3,4,5,6")
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("verify", help="re-check a written solution.csv")
    p.add_argument("--solution", required=True)
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("oracle", help="grid search the scenario independently")
    p.add_argument("--scenario", required=True)
    p.add_argument("--grid-step", type=float, required=True)
    p.add_argument("--t-max", type=float, default=30.0)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("check-dist", help="check the market's density shape condition")
    p.add_argument("--scenario", required=True)
    p.add_argument("--grid-points", type=int, default=1000)
    p.set_defaults(func=_cmd_check_dist)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
