"""Trajectory measurements: latitude excursions, zonal cell residence and island widths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import PhaseState
from .integrate import IntegrationOptions, Trajectory, iter_samples
from .models import AtmosphericModel


def max_latitude(tr: Trajectory) -> float:
    """Largest ``|phi|`` over the samples, in radians."""
    if len(tr) == 0:
        raise ValueError("empty trajectory")
    return float(np.max(np.abs(tr.x)))


def max_normal_excursion(tr: Trajectory) -> float:
    """``max(|x|, |v|)`` over the samples; zero for a trajectory on the invariant cylinder."""
    return float(max(np.max(np.abs(tr.x)), np.max(np.abs(tr.v))))


# --------------------------------------------------------------------------
# resonance cells
# --------------------------------------------------------------------------

def cell_of(theta, k: int):
    """Cell index in ``[0, 2k)`` of (unwrapped) ``theta``.

    Cells are separated by the maxima of ``sin(2 k theta)`` at
    ``theta = (4j + 1) pi / (4k)``; cell ``j`` is centred on the minimum
    at ``(4j + 3) pi / (4k)``.
    """
    k = abs(int(k))
    width = math.pi / k
    idx = np.floor((np.asarray(theta, dtype=float) - math.pi / (4 * k)) / width).astype(np.int64)
    return np.mod(idx, 2 * k)


def _unwrapped_cell(theta, k):
    k = abs(int(k))
    return np.floor((np.asarray(theta, dtype=float) - math.pi / (4 * k)) / (math.pi / k)).astype(np.int64)


@dataclass
class DwellReport:
    cell_count: int
    #: (cell index, entry time, exit time)
    visits: list = field(default_factory=list)

    @property
    def jumps(self) -> int:
        return max(len(self.visits) - 1, 0)

    @property
    def max_dwell(self) -> float:
        return max((b - a for _, a, b in self.visits), default=0.0)

    @property
    def cells_visited(self) -> int:
        return len({c for c, _, _ in self.visits})

    def as_dict(self) -> dict:
        return {
            "cell_count": self.cell_count,
            "jumps": self.jumps,
            "cells_visited": self.cells_visited,
            "max_dwell": self.max_dwell,
            "visits": [list(v) for v in self.visits],
        }


def dwell_times(tr: Trajectory, k: int) -> DwellReport:
    """Split a trajectory into residences in the ``2k`` resonance cells.

    A visit lasts from its first sample to the first sample of the next
    visit, so visits tile ``[t_0, t_end]``.
    """
    if len(tr) == 0:
        raise ValueError("empty trajectory")
    k = abs(int(k))
    # compare unwrapped cells so a full turn back into the same cell is a jump
    raw = _unwrapped_cell(tr.theta, k)
    change = np.flatnonzero(np.diff(raw)) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change, [len(tr) - 1]])
    t = tr.t
    visits = [
        (int(raw[s] % (2 * k)), float(t[s]), float(t[e]))
        for s, e in zip(starts, ends)
    ]
    return DwellReport(cell_count=2 * k, visits=visits)


# --------------------------------------------------------------------------
# island width on the invariant cylinder
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class IslandMeasurement:
    eps: float
    c: float
    k: int
    center: float
    lower: float
    upper: float
    predicted_width: float
    predicted_center: float

    @property
    def measured_width(self) -> float:
        return self.upper - self.lower

    @property
    def measured_center(self) -> float:
        return 0.5 * (self.upper + self.lower)

    @property
    def half_widths(self) -> tuple[float, float]:
        """Extent below and above the predicted centre."""
        return self.predicted_center - self.lower, self.upper - self.predicted_center

    @property
    def relative_error(self) -> float:
        return abs(self.measured_width - self.predicted_width) / self.predicted_width

    def as_dict(self) -> dict:
        return {
            "eps": self.eps, "c": self.c, "k": self.k,
            "lower": self.lower, "upper": self.upper,
            "measured_width": self.measured_width,
            "predicted_width": self.predicted_width,
            "measured_center": self.measured_center,
            "predicted_center": self.predicted_center,
            "relative_error": self.relative_error,
        }


def pendulum_island_width(eps: float, wave_at_equator: float = 1.0) -> float:
    """Full separatrix width in ``D`` of ``(D - D_r)^2 / 8 + eps A0 sin(2k theta)``.

    The separatrix passes through the maxima (energy ``+eps A0``); at the
    island centre ``sin = -1`` so ``(D - D_r)^2 / 8 = 2 eps A0``.
    """
    return 8.0 * math.sqrt(eps * wave_at_equator)


def _librates(system: AtmosphericModel, D0: float, theta_c: float, horizon: float,
              sample_dt: float, tol: float) -> bool:
    k = abs(system.k)
    home = int(_unwrapped_cell(theta_c, k))
    opts = IntegrationOptions(rel_tol=tol, abs_tol=1e-14, t_end=horizon, sample_dt=sample_dt,
                              drift_abort=1.0)
    p0 = PhaseState(0.0, 0.0, theta_c, D0)
    for _, y in iter_samples(system, p0, opts):
        if int(_unwrapped_cell(y[2], k)) != home:
            return False
    return True


def island_width(system: AtmosphericModel, c: float | None = None, eps: float | None = None,
                 periods: float = 50.0, rel_precision: float = 1e-4,
                 tol: float = 1e-11) -> IslandMeasurement:
    """Measure the resonance island on the invariant cylinder ``phi = v = 0`` by bisection.

    Starting at the island centre ``theta_c = 3 pi / (4k)``, an initial
    ``D`` librates if the unwrapped ``theta`` never leaves its cell within
    ``periods`` small-oscillation periods.  The libration boundary is
    bisected above and below the resonant action.
    """
    if c is not None:
        system = system.with_c(c)
    if eps is not None:
        system = system.with_eps(eps)
    eps = system.eps
    if not eps > 0:
        raise ValueError("island width requires eps > 0")
    k = abs(system.k)
    a0 = system.wave.value(0.0)
    predicted = pendulum_island_width(eps, a0)
    d_r = 1.0 + 2.0 * system.c
    theta_c = 3.0 * math.pi / (4 * k)
    omega = k * math.sqrt(eps * a0)
    period = 2.0 * math.pi / omega
    horizon = periods * period
    sample_dt = period / 40.0

    def boundary(sign: float) -> float:
        inside, outside = 0.0, predicted
        while _librates(system, d_r + sign * outside, theta_c, horizon, sample_dt, tol):
            inside, outside = outside, 2 * outside
        while outside - inside > rel_precision * predicted:
            mid = 0.5 * (inside + outside)
            if _librates(system, d_r + sign * mid, theta_c, horizon, sample_dt, tol):
                inside = mid
            else:
                outside = mid
        return 0.5 * (inside + outside)

    upper = d_r + boundary(+1.0)
    lower = d_r - boundary(-1.0)
    return IslandMeasurement(
        eps=eps, c=system.c, k=k, center=theta_c, lower=lower, upper=upper,
        predicted_width=predicted, predicted_center=d_r,
    )
