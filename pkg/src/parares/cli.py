"""Command-line entry point.

    parares scenario fig2_0_4 --out runs/
    parares simulate --config run.json
    parares sweep --base fig2_0_2a --param c --values 0.1,0.01,0.0001
    parares analyze --kind mechanical --b 0.5
    parares island-width --c 0.24 --eps 2.5e-4

Exit status is 1 when a scenario assertion fails or an integration aborts.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis, diagnostics
from .scenarios import (
    FORMAT_VERSION,
    SCENARIO_NAMES,
    Scenario,
    build_model,
    get_scenario,
    model_spec,
    run,
    write_trajectory_csv,
)

log = logging.getLogger("parares")


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------

def _dump(obj, path: Path | None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default)
    if path is None:
        print(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _load_config(path) -> dict:
    with open(path) as fh:
        data = json.load(fh)
    version = data.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise SystemExit(f"unsupported format_version {version!r} in {path}")
    return data


def _write_run(result, out: Path | None) -> dict:
    report = result.report()
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        model = result.scenario.build_model()
        for i, tr in enumerate(result.trajectories):
            write_trajectory_csv(out / f"{result.scenario.name}_traj{i}.csv", tr, model, i)
        _dump(report, out / f"{result.scenario.name}_report.json")
    return report


def _print_checks(result):
    for c in result.checks:
        mark = "PASS" if c["passed"] else "FAIL"
        print(f"  [{mark}] traj {c['trajectory']}: {c['metric']} {c['op']} {c['value']!r} (actual {c['actual']!r})")


def _run_kw(args) -> dict:
    return {"rel_tol": args.tol, "t_end": args.t_end, "sample_dt": args.sample_dt}


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_scenario(args) -> int:
    if args.list or not args.names:
        for name in SCENARIO_NAMES:
            print(f"{name:10s} {get_scenario(name).notes}")
        return 0
    names = SCENARIO_NAMES if args.names == ["all"] else args.names
    status = 0
    for name in names:
        try:
            scenario = get_scenario(name)
        except KeyError as exc:
            print(exc.args[0], file=sys.stderr)
            return 2
        result = run(scenario, **_run_kw(args))
        _write_run(result, args.out)
        print(f"{name}: {'passed' if result.passed else 'FAILED'} ({result.context['resonance_class']})")
        _print_checks(result)
        status |= 0 if result.passed else 1
    return status


def _simulate_scenario(args) -> Scenario:
    if args.config:
        cfg = _load_config(args.config)
        cfg.setdefault("name", Path(args.config).stem)
        return Scenario.from_dict(cfg)
    model = {"kind": args.kind}
    for key in ("k", "c", "eps", "beta", "a1", "a2", "a3", "b"):
        val = getattr(args, key)
        if val is not None:
            model[key] = val
    if args.kind == "mechanical" or args.D is not None:
        init = {"coords": "reduced", "x": args.phi, "v": args.v, "theta": args.theta,
                "D": 1.0 if args.D is None else args.D}
    else:
        init = {"coords": "physical", "phi": args.phi, "v": args.v, "u": args.u, "theta": args.theta}
    return Scenario(name=args.name, model=model, initial=[init], t_end=args.t_end or 1e3,
                    sample_dt=args.sample_dt or 0.5)


def cmd_simulate(args) -> int:
    scenario = _simulate_scenario(args)
    result = run(scenario, **_run_kw(args))
    report = _write_run(result, args.out)
    if args.out is None:
        _dump(report, None)
    else:
        print(f"{scenario.name}: wrote {len(result.trajectories)} trajectory file(s) to {args.out}")
    _print_checks(result)
    return 0 if result.passed else 1


# -- sweep -------------------------------------------------------------------

def _grid_values(spec) -> list:
    if isinstance(spec, list):
        return [float(v) for v in spec]
    num = int(spec["num"])
    if spec.get("scale", "linear") == "log":
        return [float(v) for v in np.geomspace(spec["start"], spec["stop"], num)]
    return [float(v) for v in np.linspace(spec["start"], spec["stop"], num)]


def _sweep_point(job) -> dict:
    """Evaluate one grid point; failures are recorded in the row."""
    measure, base, point, run_kw = job
    row = dict(point)
    try:
        if measure == "simulate":
            scenario = Scenario.from_dict(base)
            for key, val in point.items():
                if key == "u0":
                    scenario.initial[0]["u"] = val
                else:
                    scenario.model[key] = val
            result = run(scenario, **run_kw)
            m = result.metrics[0]
            row.update(
                status=m["status"], max_latitude=m["max_latitude"], jumps=m.get("jumps"),
                cells_visited=m.get("cells_visited"), max_dwell=m.get("max_dwell"),
                h_drift=m["h_drift"], d_drift=m["d_drift"],
            )
        elif measure == "island-width":
            spec = {**base, **{k: v for k, v in point.items()}}
            model = build_model(spec)
            meas = diagnostics.island_width(model)
            row.update(
                measured_width=meas.measured_width, predicted_width=meas.predicted_width,
                measured_center=meas.measured_center, predicted_center=meas.predicted_center,
                relative_error=meas.relative_error,
            )
        elif measure == "loci":
            model = build_model({**base, **point})
            loci = analysis.resonance_loci(model)
            row.update(D_p=loci.d_p, c_p=loci.c_p, lower_wave_speed=loci.lower_wave_speed)
        else:
            raise ValueError(f"unknown measure {measure!r}")
    except Exception as exc:  # noqa: BLE001 -- per-point failures are data
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep(measure: str, base: dict, grid: dict, run_kw: dict | None = None, jobs: int = 1) -> list:
    """Rows of diagnostics over the cartesian product of ``grid``, in grid order."""
    keys = list(grid)
    points = [dict(zip(keys, combo)) for combo in itertools.product(*(_grid_values(grid[k]) for k in keys))]
    tasks = [(measure, base, p, run_kw or {}) for p in points]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_point, tasks))
    return [_sweep_point(t) for t in tasks]


def _sweep_base(measure: str, base) -> dict:
    if measure == "simulate":
        if isinstance(base, str):
            return get_scenario(base).to_dict()
        return Scenario.from_dict(base).to_dict()
    if isinstance(base, str):
        return dict(get_scenario(base).model)
    return dict(base)


def _write_rows_csv(rows: list, path: Path):
    cols = []
    for r in rows:
        cols.extend(k for k in r if k not in cols)
    lines = ["# format_version=%d" % FORMAT_VERSION, ",".join(cols)]
    for r in rows:
        lines.append(",".join("" if r.get(c) is None else (repr(r[c]) if isinstance(r[c], float) else str(r[c]))
                              for c in cols))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def cmd_sweep(args) -> int:
    if args.config:
        cfg = _load_config(args.config)
        measure = cfg.get("measure", "simulate")
        base = cfg["base"]
        grid = cfg["grid"]
    else:
        if not args.param:
            raise SystemExit("sweep needs --config or --param with --values/--range")
        measure = args.measure
        base = args.base or ("fig2_0_1" if measure == "simulate" else {"kind": "atmospheric", "k": 3})
        if args.values:
            grid = {args.param: [float(v) for v in args.values.split(",")]}
        elif args.range:
            start, stop, num = args.range
            grid = {args.param: {"start": float(start), "stop": float(stop), "num": int(num),
                                 "scale": "log" if args.log else "linear"}}
        else:
            raise SystemExit("sweep needs --values or --range")
    base = _sweep_base(measure, base)
    rows = sweep(measure, base, grid, _run_kw(args), jobs=args.jobs)
    out = {"format_version": FORMAT_VERSION, "measure": measure, "grid": grid, "rows": rows}
    if args.out is not None:
        _dump(out, args.out / "sweep.json")
        _write_rows_csv(rows, args.out / "sweep.csv")
    else:
        _dump(out, None)
    failed = any("error" in r or r.get("status", "completed") != "completed" for r in rows)
    return 1 if failed else 0


# -- analyze -----------------------------------------------------------------

def analyze(model, D_values=None) -> dict:
    """Aggregate fixed points, resonance loci, parabolic resonance and structure for one model."""
    loci = analysis.resonance_loci(model)
    q = analysis.locate_parabolic_resonance(model)
    if D_values is None:
        D_values = [loci.d_p - 0.25, loci.d_p, loci.d_p + 0.25]
    flat = analysis.flatness_index(model, loci.c_p)
    kind = "flat-parabolic" if flat <= analysis.FLAT_TOL else "parabolic"
    struct = analysis.structure_classify(model, q_pr=q)
    at_pr = model.with_c(loci.c_p)
    fixed = {}
    for D in D_values:
        recs = analysis.find_fixed_points(at_pr, D)
        fixed[repr(float(D))] = [r.as_dict() for r in recs] or "no convergent seed"
    slope = loci.d_r_slope
    # which side of c_p puts the origin circle in the hyperbolic regime
    probe = loci.c_p + 0.05
    above, _ = analysis.classify_fixed_point(model.with_c(probe), 0.0, 0.0, loci.d_r(probe))
    return {
        "format_version": FORMAT_VERSION,
        "model": model_spec(model),
        "loci": loci.as_dict(),
        "parabolic_resonance": {
            **q.as_dict(),
            "type": kind,
            "flatness_index": flat,
            "closed_form_error": {"D": abs(q.D - loci.d_p), "c": abs(q.c - loci.c_p)},
        },
        "hyperbolic_resonance_curve": {
            "D_r": f"{loci.d_r_intercept!r} + {slope!r} * c",
            "hyperbolic_for": "c > c_p" if above == analysis.HYPERBOLIC else "c < c_p",
        },
        "structure": struct.as_dict(),
        "fixed_points_at_c_p": fixed,
    }


def render_analysis(rep: dict) -> str:
    pr = rep["parabolic_resonance"]
    loci = rep["loci"]
    lines = [
        f"model            {rep['model']}",
        f"D_p, c_p         {loci['d_p']:.10g}, {loci['c_p']:.10g}",
        f"D_r(c)           {rep['hyperbolic_resonance_curve']['D_r']}",
        f"root-found q_PR  x={pr['x']:.3g} v={pr['v']:.3g} D={pr['D']:.10g} c={pr['c']:.10g}"
        f"{'' if pr['converged'] else '  (NOT CONVERGED)'}",
        f"resonance type   {pr['type']} (flatness index {pr['flatness_index']:.3e})",
        f"structure        {', '.join(rep['structure']['classes'])}",
        f"coupling grad.   {rep['structure']['coupling_gradient_near_qpr']}",
    ]
    if loci.get("lower_wave_speed") is not None:
        lines.append(f"c_k              {loci['lower_wave_speed']:.6g}")
    lines.append("fixed points at c = c_p:")
    lines.append(f"  {'D':>10s} {'x':>12s} {'v':>8s} {'stability':>10s} {'lambda^2':>12s} {'dtheta/dt':>12s}")
    for D, recs in rep["fixed_points_at_c_p"].items():
        if isinstance(recs, str):
            lines.append(f"  {float(D):10.5g}  {recs}")
            continue
        for r in recs:
            lines.append(f"  {r['D']:10.5g} {r['x']:12.6g} {r['v']:8.3g} {r['stability']:>10s} "
                         f"{r['lambda_sq']:12.5g} {r['theta_rate']:12.5g}")
    return "\n".join(lines)


def _model_from_args(args):
    if args.config:
        cfg = _load_config(args.config)
        return build_model(cfg.get("model", cfg))
    spec = {"kind": args.kind}
    for key in ("k", "c", "eps", "beta", "a1", "a2", "a3", "b"):
        val = getattr(args, key)
        if val is not None:
            spec[key] = val
    return build_model(spec)


def cmd_analyze(args) -> int:
    model = _model_from_args(args)
    D_values = [float(v) for v in args.D.split(",")] if args.D else None
    rep = analyze(model, D_values)
    print(render_analysis(rep))
    if args.out is not None:
        _dump(rep, args.out / "analysis.json")
    return 0 if rep["parabolic_resonance"]["converged"] else 1


def cmd_island_width(args) -> int:
    model = _model_from_args(args)
    if model.eps <= 0:
        model = model.with_eps(2.5e-4)
    meas = diagnostics.island_width(model)
    rep = {"format_version": FORMAT_VERSION, "model": model_spec(model), **meas.as_dict()}
    print(f"width {meas.measured_width:.6g} (pendulum prediction {meas.predicted_width:.6g}, "
          f"rel. error {meas.relative_error:.2e}); centre {meas.measured_center:.6g} "
          f"(D_r = {meas.predicted_center:.6g})")
    if args.out is not None:
        _dump(rep, args.out / "island_width.json")
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--tol", type=float, default=1e-12, help="relative integration tolerance")
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--sample-dt", type=float, default=None)
    p.add_argument("--out", type=Path, default=None, help="output directory")
    p.add_argument("--config", default=None, help="JSON configuration file")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_model(p, kind="atmospheric"):
    p.add_argument("--kind", choices=("atmospheric", "mechanical"), default=kind)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    for name in ("a1", "a2", "a3", "b"):
        p.add_argument(f"--{name}", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="parares", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenario", help="run registry scenarios")
    p.add_argument("names", nargs="*", help=f"scenario names or 'all' ({', '.join(SCENARIO_NAMES)})")
    p.add_argument("--list", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("simulate", help="integrate one initial condition")
    _add_common(p)
    _add_model(p)
    p.add_argument("--name", default="simulate")
    p.add_argument("--phi", type=float, default=1e-5, help="initial latitude (or x)")
    p.add_argument("--v", type=float, default=1e-5)
    p.add_argument("--u", type=float, default=0.0, help="initial eastward velocity")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--D", type=float, default=None, help="initial action (reduced coordinates)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="diagnostics over a parameter grid")
    _add_common(p)
    p.add_argument("--measure", choices=("simulate", "island-width", "loci"), default="simulate")
    p.add_argument("--base", default=None, help="scenario name used as the base point")
    p.add_argument("--param", choices=("c", "eps", "beta", "u0"), default=None)
    p.add_argument("--values", default=None, help="comma separated values")
    p.add_argument("--range", nargs=3, metavar=("START", "STOP", "NUM"), default=None)
    p.add_argument("--log", action="store_true", help="geometric spacing for --range")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="fixed points, loci and structure of a model")
    _add_common(p)
    _add_model(p)
    p.add_argument("--D", default=None, help="comma separated actions for the fixed point table")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("island-width", help="measure a resonance island on the invariant cylinder")
    _add_common(p)
    _add_model(p)
    p.set_defaults(func=cmd_island_width)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
