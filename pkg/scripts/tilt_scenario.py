"""Run the built-in coverage/capacity tilt scenario and tabulate the four solutions.

    python3 scripts/tilt_scenario.py                 # shadowing off
    python3 scripts/tilt_scenario.py --seeds 1 2 3   # shadowed runs, one table per seed
"""
import argparse
import time

from intent_bargain import BargainingProblem, arbitrate, ran


def run(shadowing_std: float, seed: int | None, weights):
    cfg = ran.default_config()
    cfg["environment"]["shadowing_std"] = shadowing_std
    scenario, env, grid, thr = ran.scenario_from_config(cfg, seed)
    kpi = ran.build_kpi_curves(scenario, grid, env, thr)
    curves = {"CQI": ran.normalize_to_utility(kpi.mean_cqi, grid),
              "SINR": ran.normalize_to_utility(kpi.mean_sinr, grid)}
    report = arbitrate(BargainingProblem.from_curves(curves, weights=weights))
    return kpi, curves, report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="*", default=[])
    ap.add_argument("--weights", type=float, nargs=2, default=(0.8, 0.2))
    args = ap.parse_args()

    runs = [("no shadowing", 0.0, None)] + [(f"seed {s}", 8.0, s) for s in args.seeds]
    for label, std, seed in runs:
        t0 = time.perf_counter()
        kpi, curves, report = run(std, seed, tuple(args.weights))
        dt = time.perf_counter() - t0
        print(f"\n== {label}  ({dt:.2f} s)")
        print(f"{'tilt':>4} {'SINR dB':>8} {'CQI':>6} {'u_CQI':>6} {'u_SINR':>6}")
        for k, t in enumerate(kpi.tilt_grid):
            print(f"{t:>4g} {kpi.mean_sinr[k]:>8.2f} {kpi.mean_cqi[k]:>6.2f} "
                  f"{curves['CQI'].utilities[k]:>6.3f} {curves['SINR'].utilities[k]:>6.3f}")
        print(f"\n{'method':<6} {'tilt':>6} {'JFI':>7}")
        for s in report.solutions:
            print(f"{s.method:<6} {s.parameter:>6.2f} {s.jfi:>7.4f}")
        print(f"chosen {report.chosen_method} at {report.chosen_parameter:.1f} deg")


if __name__ == "__main__":
    main()
