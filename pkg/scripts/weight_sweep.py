"""Sweep the priority weight of the coverage intent and report the WNBS tilt.

Uses the linear duel by default; pass --scenario to use the built-in radio scenario.
"""
import argparse

import numpy as np

from intent_bargain import BargainingProblem, UtilityCurve, ran, solve_wnbs


def curves(scenario: bool):
    if not scenario:
        return {"A": UtilityCurve((0.0, 15.0), (0.0, 1.0)),
                "B": UtilityCurve((0.0, 15.0), (1.0, 0.0))}
    cfg = ran.default_config()
    cfg["environment"]["shadowing_std"] = 0.0
    sc, env, grid, thr = ran.scenario_from_config(cfg)
    kpi = ran.build_kpi_curves(sc, grid, env, thr)
    return {"A": ran.normalize_to_utility(kpi.mean_cqi, grid),
            "B": ran.normalize_to_utility(kpi.mean_sinr, grid)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", action="store_true")
    ap.add_argument("--steps", type=int, default=19)
    args = ap.parse_args()

    c = curves(args.scenario)
    print(f"{'w_A':>5} {'tilt':>6} {'u_A':>6} {'u_B':>6} {'JFI':>7}")
    for w in np.linspace(0.05, 0.95, args.steps):
        s = solve_wnbs(BargainingProblem.from_curves(c, weights=(w, 1.0 - w)))
        print(f"{w:>5.2f} {s.parameter:>6.2f} {s.utilities[0]:>6.3f} {s.utilities[1]:>6.3f} "
              f"{s.jfi:>7.4f}")


if __name__ == "__main__":
    main()
