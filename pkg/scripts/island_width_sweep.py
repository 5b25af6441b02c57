"""Island width on the invariant cylinder against the pendulum prediction.

    python3 scripts/island_width_sweep.py --eps 1e-5 1e-4 1e-3 --c 0 0.24
"""

import argparse
import math

from parares.diagnostics import island_width
from parares.models import AtmosphericModel, AtmosphericParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--eps", type=float, nargs="+", default=[1e-5, 1e-4, 1e-3])
    ap.add_argument("--c", type=float, nargs="+", default=[0.0, 0.24])
    ap.add_argument("--k", type=int, default=3)
    args = ap.parse_args()
    base = AtmosphericModel(AtmosphericParams(k=args.k))
    print(f"{'c':>6s} {'eps':>8s} {'width':>10s} {'8sqrt(eps)':>10s} {'width/sqrt(eps)':>16s} {'centre':>8s}")
    for c in args.c:
        for eps in args.eps:
            m = island_width(base, c=c, eps=eps)
            print(f"{c:6.3f} {eps:8.1e} {m.measured_width:10.6f} {m.predicted_width:10.6f} "
                  f"{m.measured_width / math.sqrt(eps):16.6f} {m.measured_center:8.5f}")


if __name__ == "__main__":
    main()
