"""Run every registry scenario and write gnuplot-ready CSV plus JSON reports.

    python3 scripts/reproduce_figures.py --out runs/figures
"""

import argparse
import json
from pathlib import Path

from parares.scenarios import SCENARIO_NAMES, run_scenario, write_trajectory_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", type=Path, default=Path("runs/figures"))
    ap.add_argument("--names", nargs="*", default=list(SCENARIO_NAMES))
    ap.add_argument("--t-end", type=float, default=None)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    failed = []
    for name in args.names:
        res = run_scenario(name, t_end=args.t_end)
        model = res.scenario.build_model()
        for i, tr in enumerate(res.trajectories):
            write_trajectory_csv(args.out / f"{name}_traj{i}.csv", tr, model, i)
        (args.out / f"{name}_report.json").write_text(json.dumps(res.report(), indent=2, default=str) + "\n")
        m = res.metrics[0]
        print(f"{name:10s} {'ok' if res.passed else 'FAILED':6s} max|phi|={m['max_latitude']:.3f} "
              f"jumps={m.get('jumps')} drift={m['h_drift']:.1e} class={res.context['resonance_class']}")
        if not res.passed:
            failed.append(name)
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
