"""Acceptance criteria, each at its stated tolerance; one PASS/FAIL line per criterion."""

import math
import time

import numpy as np
import pytest

from conftest import atmospheric, conservation_set, mechanical, report_criterion
from parares import analysis, diagnostics
from parares.core import PhaseState, canonical_vector_field, symplectic_gradient_fd
from parares.integrate import IntegrationOptions, integrate
from parares.scenarios import SCENARIO_NAMES, run_scenario

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def registry_runs():
    start = time.perf_counter()
    runs = {name: run_scenario(name) for name in SCENARIO_NAMES}
    return runs, time.perf_counter() - start


def test_01_conservation():
    start = time.perf_counter()
    m = atmospheric()
    worst_h = worst_d = 0.0
    for p0 in conservation_set():
        tr = integrate(m, p0, IntegrationOptions(rel_tol=1e-12, t_end=1e3))
        assert tr.completed
        worst_h, worst_d = max(worst_h, tr.h_drift), max(worst_d, tr.d_drift)
    elapsed = time.perf_counter() - start
    ok = worst_h <= 1e-9 and worst_d <= 1e-9 and elapsed <= 60
    report_criterion("1 conservation (eps=0, 10 ICs, t=1e3)", ok,
                     f"max H drift {worst_h:.2e}, max D drift {worst_d:.2e}, {elapsed:.1f}s")
    assert ok


def test_02_registry_drift_contract(registry_runs):
    runs, elapsed = registry_runs
    worst = max(m["h_drift"] for r in runs.values() for m in r.metrics)
    completed = all(m["status"] == "completed" for r in runs.values() for m in r.metrics)
    ok = completed and worst <= 1e-5 and elapsed <= 600
    report_criterion("2 registry drift contract", ok,
                     f"{len(runs)} scenarios, max H drift {worst:.2e}, {elapsed:.1f}s")
    assert ok


def test_03_resonance_loci():
    start = time.perf_counter()
    quoted = {0.0: (1.0, 0.0), 0.03: (1.058, 0.0291), 0.3: (1.4832, 0.2416)}
    err_quoted = 0.0
    for beta, (d_p, c_p) in quoted.items():
        loci = analysis.resonance_loci(atmospheric(beta=beta))
        err_quoted = max(err_quoted, abs(loci.d_p - d_p), abs(loci.c_p - c_p))
    err_root = 0.0
    for m in (atmospheric(), atmospheric(beta=0.03), atmospheric(beta=0.3), mechanical(), mechanical(b=0.5)):
        q = analysis.locate_parabolic_resonance(m)
        loci = analysis.resonance_loci(m)
        assert q.converged
        err_root = max(err_root, abs(q.D - loci.d_p), abs(q.c - loci.c_p), abs(q.x), abs(q.v))
    elapsed = time.perf_counter() - start
    ok = err_quoted <= 1e-3 and err_root <= 1e-8 and elapsed <= 60
    report_criterion("3 resonance loci", ok,
                     f"quoted-value error {err_quoted:.1e}, root-finder error {err_root:.1e}, {elapsed:.1f}s")
    assert ok


def test_04_island_width():
    start = time.perf_counter()
    worst_width = worst_centre = 0.0
    scaled = {}
    for c in (0.0, 0.24):
        for eps in (1e-5, 1e-4, 1e-3):
            meas = diagnostics.island_width(atmospheric(), c=c, eps=eps)
            worst_width = max(worst_width, meas.relative_error)
            worst_centre = max(worst_centre, abs(meas.measured_center - (1 + 2 * c)))
            scaled.setdefault(c, []).append(meas.measured_width / math.sqrt(eps))
    spread = max(max(v) / min(v) - 1 for v in scaled.values())
    elapsed = time.perf_counter() - start
    ok = worst_width <= 0.03 and worst_centre <= 1e-3 and spread <= 0.03 and elapsed <= 300
    report_criterion("4 island width vs 8 sqrt(eps A0)", ok,
                     f"max rel. error {worst_width:.1e}, centre error {worst_centre:.1e}, "
                     f"width/sqrt(eps) spread {spread:.1e}, {elapsed:.1f}s")
    assert ok


def test_05_hyperbolic_latitude_bound(registry_runs):
    runs, _ = registry_runs
    errs = [runs[n].metrics[0]["abs_max_latitude_minus_60deg"] for n in ("fig2_0_6", "fig2_0_7")]
    ok = max(errs) <= math.radians(3.0)
    report_criterion("5 hyperbolic resonance reaches 60 deg", ok,
                     "errors " + ", ".join(f"{math.degrees(e):.2f} deg" for e in errs))
    assert ok


def test_06_flat_parabolic_instability(registry_runs):
    runs, _ = registry_runs
    m = runs["fig2_0_1"].metrics[0]
    ok = m["max_latitude"] >= 0.8 and m["cells_visited"] >= 2 and m["max_dwell"] >= 100
    report_criterion("6 flat parabolic instability", ok,
                     f"max latitude {m['max_latitude']:.3f} rad, {m['cells_visited']} cells, "
                     f"{m['jumps']} jumps, max dwell {m['max_dwell']:.0f}")
    assert ok


def test_07_wave_speed_dichotomy(registry_runs):
    runs, _ = registry_runs
    far = runs["fig2_0_2a"].metrics[0]["max_latitude"]
    near = runs["fig2_0_2c"].metrics[0]["max_latitude"]
    ok = far < 0.1 and near > 0.3
    report_criterion("7 wave-speed dichotomy", ok, f"c=0.1: {far:.3f} rad, c=1e-4: {near:.3f} rad")
    assert ok


def test_08_invariant_cylinder():
    rng = np.random.default_rng(8)
    worst = 0.0
    for make in (lambda e: atmospheric(beta=0.3, c=0.1, eps=e), lambda e: mechanical(b=0.5, c=0.1, eps=e)):
        for eps in (1e-5, 1e-4, 1e-3):
            for _ in range(3):
                p0 = PhaseState(0.0, 0.0, rng.uniform(0, 2 * math.pi), rng.uniform(0.5, 1.8))
                tr = integrate(make(eps), p0, IntegrationOptions(t_end=1e3))
                assert tr.completed
                worst = max(worst, diagnostics.max_normal_excursion(tr))
    ok = worst <= 1e-10
    report_criterion("8 invariant cylinder preserved", ok, f"max |x|,|v| {worst:.1e}")
    assert ok


def test_09_flatness_dichotomy():
    flat = [analysis.flatness_index(atmospheric(), 0.0), analysis.flatness_index(mechanical(b=0.0), 0.0)]
    sharp = [analysis.flatness_index(atmospheric(beta=b), analysis.resonance_loci(atmospheric(beta=b)).c_p)
             for b in (0.03, 0.3)]
    sharp.append(analysis.flatness_index(mechanical(b=0.5), 0.0))
    ok = max(flat) <= 1e-10 and min(sharp) >= 1e-3
    report_criterion("9 flatness dichotomy", ok, f"flat max {max(flat):.1e}, non-flat min {min(sharp):.1e}")
    assert ok


def test_10_structural_classification():
    atm = analysis.structure_classify(atmospheric(beta=0.3))
    mech = analysis.structure_classify(mechanical(b=0.5))
    classes_ok = (analysis.TRAVELLING_WAVE in atm.classes
                  and {analysis.TRAVELLING_WAVE, analysis.NATURAL_MECHANICAL} <= mech.classes)
    near_ok = atm.coupling_gradient_near_qpr > 0 and mech.coupling_gradient_near_qpr > 0
    ok = classes_ok and near_ok
    report_criterion("10 structural classes, coupling gradient nonzero near q_PR", ok,
                     f"atm {sorted(atm.classes)}, mech {sorted(mech.classes)}; "
                     f"near q_PR {atm.coupling_gradient_near_qpr:.2e}, {mech.coupling_gradient_near_qpr:.2e}")
    assert ok


@pytest.mark.xfail(strict=True, reason="the gradients vanish on the symmetry axis x = v = 0 where q_PR lies; "
                                       "the quantity is nonzero only away from q_PR")
def test_10_coupling_gradient_pointwise_at_qpr():
    vals = [analysis.structure_classify(m).coupling_gradient_at_qpr for m in (atmospheric(beta=0.3), mechanical(b=0.5))]
    ok = min(vals) > 0
    report_criterion("10 coupling gradient > 0 exactly at q_PR", ok,
                     "values " + ", ".join(f"{v:.1e}" for v in vals) + "; zero by symmetry, see README")
    assert ok


def test_11_canonical_gradient_suite():
    worst = {}
    for name, m in (("atmospheric", atmospheric(beta=0.3, c=0.1, eps=1e-3)),
                    ("mechanical", mechanical(b=0.5, c=0.1, eps=1e-3))):
        rng = np.random.default_rng(11)
        worst[name] = max(
            float(np.max(np.abs(canonical_vector_field(m, p) - symplectic_gradient_fd(m, p))))
            for p in (m.sample_state(rng) for _ in range(1000))
        )
    ok = max(worst.values()) <= 1e-6
    report_criterion("11 canonical gradient suite (1000 states per model)", ok,
                     ", ".join(f"{k} {v:.1e}" for k, v in worst.items()))
    assert ok
