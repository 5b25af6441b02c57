import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings


from parares.core import PhaseState
from parares.integrate import IntegrationOptions
from parares.models import (
    AtmosphericModel,
    AtmosphericParams,
    MechanicalModel,
    MechanicalParams,
)

settings.register_profile("default", deadline=None, max_examples=50,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def atmospheric(**kw) -> AtmosphericModel:
    return AtmosphericModel(AtmosphericParams(**kw))


def mechanical(**kw) -> MechanicalModel:
    return MechanicalModel(MechanicalParams(**kw))


def conservation_set(n=10, seed=7):
    """Unperturbed atmospheric initial conditions with |D| in [0.2, 1.8], off the separatrices."""
    rng = np.random.default_rng(seed)
    sysm = atmospheric()
    out = []
    while len(out) < n:
        D = rng.uniform(0.2, 1.8)
        x = rng.uniform(-0.8, 0.8)
        v = rng.uniform(-0.3, 0.3)
        theta = rng.uniform(0.0, 2 * math.pi)
        if D < 1.0:
            # the separatrix through the hyperbolic origin
            if abs(sysm.h0(x, v, D) - sysm.h0(0.0, 0.0, D)) < 1e-2:
                continue
        out.append(PhaseState(x, v, theta, D))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def long_opts():
    return IntegrationOptions(rel_tol=1e-12, t_end=1e3, sample_dt=0.5)




# -- acceptance summary ----------------------------------------------------------

ACCEPTANCE_LINES: list = []


def report_criterion(label: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
