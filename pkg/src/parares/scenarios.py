"""Scenario registry, model/config serialization and scenario evaluation."""

from __future__ import annotations

import copy
import math
import operator
from dataclasses import asdict, dataclass, field

from . import analysis, diagnostics
from .core import PhaseState, SphericalState, to_reduced, to_spherical
from .integrate import IntegrationOptions, Trajectory, integrate
from .models import AtmosphericModel, AtmosphericParams, MechanicalModel, MechanicalParams

FORMAT_VERSION = 1

EPS_FIG = 2.5e-4


# --------------------------------------------------------------------------
# model specs
# --------------------------------------------------------------------------

def build_model(spec: dict):
    """Construct a model from ``{"kind": "atmospheric" | "mechanical", **params}``."""
    spec = dict(spec)
    kind = spec.pop("kind", "atmospheric")
    if kind == "atmospheric":
        return AtmosphericModel(AtmosphericParams(**spec))
    if kind == "mechanical":
        return MechanicalModel(MechanicalParams(**spec))
    raise ValueError(f"unknown model kind {kind!r}")


def model_spec(model) -> dict:
    if isinstance(model, AtmosphericModel):
        return {"kind": "atmospheric", **asdict(model.params)}
    if isinstance(model, MechanicalModel):
        return {"kind": "mechanical", **asdict(model.params)}
    raise TypeError(f"cannot serialise {type(model).__name__}")


def initial_state(init: dict, model) -> PhaseState:
    """Reduced initial state from ``{"coords": "physical" | "reduced", ...}``.

    Physical conditions give ``phi, v, u`` and the reduced angle ``theta``
    (longitude ``lambda = 2 theta`` at ``t = 0``).
    """
    coords = init.get("coords", "physical")
    if coords == "reduced":
        return PhaseState(float(init["x"]), float(init["v"]), float(init.get("theta", 0.0)), float(init["D"]))
    if coords == "physical":
        theta = float(init.get("theta", 0.0))
        s = SphericalState(lam=2.0 * theta, phi=float(init["phi"]), u=float(init["u"]), v=float(init["v"]))
        p = to_reduced(s, t=0.0, c=model.c, k=model.k)
        # theta is taken as given; lambda = 2 theta is only a convenience here
        return PhaseState(p.x, p.v, theta, p.D)
    raise ValueError(f"unknown coordinate kind {coords!r}")


# --------------------------------------------------------------------------
# scenarios
# --------------------------------------------------------------------------

@dataclass
class Scenario:
    name: str
    model: dict
    initial: list
    t_end: float
    sample_dt: float = 0.5
    #: assertions: {"metric", "op", "value", "trajectory"}
    expect: list = field(default_factory=list)
    notes: str = ""

    def to_dict(self) -> dict:
        return {"format_version": FORMAT_VERSION, **copy.deepcopy(asdict(self))}

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        data = dict(data)
        version = data.pop("format_version", FORMAT_VERSION)
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported format_version {version!r}")
        return cls(**copy.deepcopy(data))

    def build_model(self):
        return build_model(self.model)


def _atm(c, beta=0.0, eps=EPS_FIG):
    return {"kind": "atmospheric", "k": 3, "c": c, "eps": eps, "beta": beta}


def _phys(phi, v, u, theta=0.0):
    return {"coords": "physical", "phi": phi, "v": v, "u": u, "theta": theta}


def _assert(metric, op, value, trajectory=0):
    return {"metric": metric, "op": op, "value": value, "trajectory": trajectory}


def _drift_ok(n=1):
    return [_assert("status", "==", "completed", i) for i in range(n)]


DEG3 = math.radians(3.0)


def _registry() -> dict:
    regs = {}

    def add(s: Scenario):
        regs[s.name] = s

    add(Scenario(
        "fig2_0_1", _atm(0.0), [_phys(1e-5, 1e-5, -1e-4, theta=math.pi / 12.0)], 2e4,
        expect=_drift_ok() + [
            _assert("max_latitude", ">=", 0.8),
            _assert("cells_visited", ">=", 2),
            _assert("max_dwell", ">=", 100.0),
        ],
        notes=("flat parabolic resonance; westward u0 and theta0 = pi/(4k), the resonance cell "
               "boundary, chosen (both unstated); theta0 = 0 stays in one cell past t = 1e5"),
    ))
    for tag, c, extra in (("a", 0.1, [_assert("max_latitude", "<", 0.1)]),
                          ("b", 0.01, []),
                          ("c", 1e-4, [_assert("max_latitude", ">", 0.3)])):
        add(Scenario(
            f"fig2_0_2{tag}", _atm(c), [_phys(1e-5, 1e-5, 0.5e-11, theta=2.2)], 2e4,
            expect=_drift_ok() + extra,
            notes="near a flat resonance; wave speed from the panel label, eps = 2.5e-4 as in the other runs",
        ))
    add(Scenario(
        "fig2_0_3", _atm(0.029, beta=0.03), [_phys(1e-5, 1e-5, 4.2e-4)], 2e4,
        expect=_drift_ok(),
        notes="nearly flat parabolic resonance",
    ))
    add(Scenario(
        "fig2_0_4", _atm(0.24, beta=0.3), [_phys(1e-12, 1e-12, 0.24)], 2e4,
        expect=_drift_ok() + [
            _assert("resonance_class", "==", "parabolic"),
            _assert("abs_D0_minus_Dp", "<=", 1e-2),
        ],
        notes="generic parabolic resonance",
    ))
    # on-cylinder companions: one at the island centre, one rotating above it
    d_r = 1.0 + 2.0 * 0.2
    theta_c = 3.0 * math.pi / 12.0
    add(Scenario(
        "fig2_0_5", _atm(0.2, beta=0.3),
        [
            _phys(1e-5, 1e-5, 0.2),
            {"coords": "reduced", "x": 0.0, "v": 0.0, "theta": theta_c, "D": d_r},
            {"coords": "reduced", "x": 0.0, "v": 0.0, "theta": theta_c, "D": d_r + 0.2},
        ],
        2e4,
        expect=_drift_ok(3) + [
            _assert("max_normal_excursion", "<=", 1e-10, 1),
            _assert("max_normal_excursion", "<=", 1e-10, 2),
            _assert("jumps", "==", 0, 1),
            _assert("jumps", ">=", 1, 2),
        ],
        notes="near a parabolic resonance; companions chosen as librating and rotating cylinder orbits",
    ))
    for tag, theta0 in (("6", 0.0), ("7", 1.8)):
        add(Scenario(
            f"fig2_0_{tag}", _atm(-0.25), [_phys(1e-5, 1e-5, -0.25, theta=theta0)], 1e4,
            expect=_drift_ok() + [_assert("abs_max_latitude_minus_60deg", "<=", DEG3)],
            notes="hyperbolic resonance; latitude bound arccos(1 - 2|u0|) = 60 deg",
        ))
    return regs


REGISTRY = _registry()
SCENARIO_NAMES = tuple(REGISTRY)


def get_scenario(name: str) -> Scenario:
    try:
        return copy.deepcopy(REGISTRY[name])
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIO_NAMES)}") from None


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

_OPS = {
    "<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge,
    "==": operator.eq, "!=": operator.ne,
}


def trajectory_metrics(tr: Trajectory, model) -> dict:
    out = {
        "status": tr.status,
        "message": tr.message,
        "samples": len(tr),
        "t_final": float(tr.t[-1]),
        "h_drift": tr.h_drift,
        "d_drift": tr.d_drift,
        "max_latitude": diagnostics.max_latitude(tr),
        "max_normal_excursion": diagnostics.max_normal_excursion(tr),
        "D_min": float(tr.D.min()),
        "D_max": float(tr.D.max()),
    }
    out["abs_max_latitude_minus_60deg"] = abs(out["max_latitude"] - math.pi / 3)
    if isinstance(model, AtmosphericModel):
        dw = diagnostics.dwell_times(tr, model.k)
        out.update(jumps=dw.jumps, cells_visited=dw.cells_visited, max_dwell=dw.max_dwell)
    return out


@dataclass
class ScenarioResult:
    scenario: Scenario
    trajectories: list
    metrics: list
    context: dict
    checks: list

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def report(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "scenario": self.scenario.to_dict(),
            "context": self.context,
            "trajectories": self.metrics,
            "checks": self.checks,
            "passed": self.passed,
        }


def scenario_context(model, p0: PhaseState) -> dict:
    loci = analysis.resonance_loci(model)
    return {
        "resonance_class": analysis.resonance_class(model),
        "D0": p0.D,
        "D_p": loci.d_p,
        "c_p": loci.c_p,
        "D_r": loci.d_r(model.c),
        "abs_D0_minus_Dp": abs(p0.D - loci.d_p),
        "abs_D0_minus_Dr": abs(p0.D - loci.d_r(model.c)),
    }


def evaluate(scenario: Scenario, metrics: list, context: dict) -> list:
    checks = []
    for a in scenario.expect:
        i = a.get("trajectory", 0)
        name = a["metric"]
        actual = context.get(name) if name in context else metrics[i].get(name)
        try:
            ok = actual is not None and bool(_OPS[a["op"]](actual, a["value"]))
        except TypeError:
            ok = False
        checks.append({**a, "actual": actual, "passed": ok})
    # an aborted run always fails its scenario
    for i, m in enumerate(metrics):
        if m["status"] != "completed" and not any(c["metric"] == "status" and c["trajectory"] == i for c in checks):
            checks.append({"metric": "status", "op": "==", "value": "completed", "trajectory": i,
                           "actual": m["status"], "passed": False})
    return checks


def run(scenario: Scenario, rel_tol: float = 1e-12, t_end: float | None = None,
        sample_dt: float | None = None, drift_abort: float = 1e-5) -> ScenarioResult:
    model = scenario.build_model()
    opts = IntegrationOptions(
        rel_tol=rel_tol,
        t_end=scenario.t_end if t_end is None else t_end,
        sample_dt=scenario.sample_dt if sample_dt is None else sample_dt,
        drift_abort=drift_abort,
    )
    states = [initial_state(init, model) for init in scenario.initial]
    trajectories = [integrate(model, p0, opts) for p0 in states]
    metrics = [trajectory_metrics(tr, model) for tr in trajectories]
    context = scenario_context(model, states[0])
    return ScenarioResult(scenario, trajectories, metrics, context, evaluate(scenario, metrics, context))


def run_scenario(name: str, **kw) -> ScenarioResult:
    return run(get_scenario(name), **kw)


# --------------------------------------------------------------------------
# trajectory CSV
# --------------------------------------------------------------------------

CSV_HEADER = ("t", "phi", "v", "theta_wrapped", "theta_unwrapped", "D", "u", "H", "H_drift")


def trajectory_rows(tr: Trajectory, model):
    atm = isinstance(model, AtmosphericModel)
    for t, row, H in zip(tr.t, tr.y, tr.H):
        p = PhaseState.from_array(row)
        u = to_spherical(p, t, model.c).u if atm else float("nan")
        yield (float(t), p.x, p.v, p.theta_wrapped, p.theta, p.D, u, float(H),
               abs(float(H) - float(tr.H[0])) / tr.h_scale)


def write_trajectory_csv(path, tr: Trajectory, model, trajectory_index: int = 0) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# format_version={FORMAT_VERSION} trajectory={trajectory_index} status={tr.status}\n")
        fh.write(",".join(CSV_HEADER) + "\n")
        for row in trajectory_rows(tr, model):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
