"""Sensitivity of the flat-resonance run to the unstated initial angle theta0.

For each theta0 on a grid over one wave period, integrate the fig2_0_1
conditions and report latitude reach and cell transitions.

    python3 scripts/theta0_scan.py --num 8 --t-end 2e4
"""

import argparse
import math

from parares import diagnostics
from parares.integrate import IntegrationOptions, integrate
from parares.scenarios import get_scenario, initial_state


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--num", type=int, default=8)
    ap.add_argument("--t-end", type=float, default=2e4)
    args = ap.parse_args()
    s = get_scenario("fig2_0_1")
    model = s.build_model()
    k = model.k
    print(f"{'theta0':>8s} {'max|phi|':>9s} {'jumps':>6s} {'cells':>6s} {'max_dwell':>10s}")
    for i in range(args.num):
        theta0 = i * (math.pi / k) / args.num
        init = dict(s.initial[0], theta=theta0)
        tr = integrate(model, initial_state(init, model), IntegrationOptions(t_end=args.t_end))
        dw = diagnostics.dwell_times(tr, k)
        print(f"{theta0:8.4f} {diagnostics.max_latitude(tr):9.3f} {dw.jumps:6d} {dw.cells_visited:6d} "
              f"{dw.max_dwell:10.1f}")


if __name__ == "__main__":
    main()
