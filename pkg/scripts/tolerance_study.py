"""Energy drift of unperturbed runs as the integrator tolerance is halved.

    python3 scripts/tolerance_study.py --tols 1e-8 5e-9 1e-10 5e-11 1e-12 5e-13
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from conftest import atmospheric, conservation_set  # noqa: E402
from parares.integrate import IntegrationOptions, integrate  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--tols", type=float, nargs="+", default=[1e-8, 5e-9, 1e-10, 5e-11, 1e-12, 5e-13])
    ap.add_argument("--t-end", type=float, default=1e3)
    args = ap.parse_args()
    m = atmospheric()
    states = conservation_set()
    for tol in args.tols:
        drifts = [integrate(m, p, IntegrationOptions(rel_tol=tol, t_end=args.t_end)).h_drift for p in states]
        print(f"{tol:8.1e} " + " ".join(f"{d:8.1e}" for d in drifts))


if __name__ == "__main__":
    main()
