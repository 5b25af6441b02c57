"""Adaptive Bulirsch-Stoer integration with conservation monitoring.

Steps are aligned to the sample grid, so every sample is a step endpoint
and no interpolant is involved.  The Hamiltonian is evaluated at each
sample; the run aborts when its relative drift passes ``drift_abort``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .core import DomainError, HamiltonianSystem, PhaseState

log = logging.getLogger(__name__)

COMPLETED = "completed"
ABORTED_DRIFT = "aborted-drift"
ABORTED_DOMAIN = "aborted-domain"


@dataclass(frozen=True)
class IntegrationOptions:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    t_end: float = 100.0
    sample_dt: float = 0.5
    drift_abort: float = 1e-5
    #: drift is measured relative to max(|H(0)|, h_floor); keeps near-zero energies meaningful
    h_floor: float = 1e-3

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not self.sample_dt > 0:
            raise ValueError("sample_dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.drift_abort > 0:
            raise ValueError("drift_abort must be positive")


@dataclass
class Trajectory:
    """Sampled trajectory; ``y`` rows are ``(x, v, theta_unwrapped, D)``."""

    t: np.ndarray
    y: np.ndarray
    H: np.ndarray
    h_drift: float
    d_drift: float
    status: str = COMPLETED
    message: str = ""
    h_scale: float = 1.0
    d_scale: float = 1.0

    def __len__(self):
        return len(self.t)

    def __iter__(self):
        for t, row in zip(self.t, self.y):
            yield float(t), PhaseState.from_array(row)

    @property
    def x(self) -> np.ndarray:
        return self.y[:, 0]

    @property
    def v(self) -> np.ndarray:
        return self.y[:, 1]

    @property
    def theta(self) -> np.ndarray:
        return self.y[:, 2]

    @property
    def D(self) -> np.ndarray:
        return self.y[:, 3]

    @property
    def completed(self) -> bool:
        return self.status == COMPLETED

    @property
    def final(self) -> PhaseState:
        return PhaseState.from_array(self.y[-1])

    def relative_h_drift(self) -> np.ndarray:
        return np.abs(self.H - self.H[0]) / self.h_scale

    def relative_d_drift(self) -> np.ndarray:
        return np.abs(self.D - self.D[0]) / self.d_scale


# --------------------------------------------------------------------------
# Bulirsch-Stoer stepper
# --------------------------------------------------------------------------

class BulirschStoer:
    """Gragg-Bulirsch-Stoer extrapolation with order and step-size control.

    Step sequence ``n_j = 2(j+1)``, polynomial extrapolation in ``h^2``,
    work-per-unit-step order selection after Deuflhard.
    """

    KMAX = 8
    SAFE1, SAFE2 = 0.65, 0.94
    STEPFAC3, STEPFAC4 = 0.02, 4.0
    KFAC1, KFAC2 = 0.8, 0.9

    def __init__(self, f, rel_tol: float, abs_tol: float):
        self.f = f
        self.rtol = rel_tol
        self.atol = abs_tol
        self.nseq = [2 * (j + 1) for j in range(self.KMAX + 1)]
        cost = [self.nseq[0] + 1]
        for j in range(1, self.KMAX + 1):
            cost.append(cost[-1] + self.nseq[j])
        self.cost = cost
        # coeff[k][l] = 1 / ((n_k / n_l)^2 - 1)
        self.coeff = [[0.0] * (self.KMAX + 1) for _ in range(self.KMAX + 1)]
        for k in range(self.KMAX + 1):
            for l in range(k):
                ratio = self.nseq[k] / self.nseq[l]
                self.coeff[k][l] = 1.0 / (ratio * ratio - 1.0)
        logfact = -math.log10(max(1e-12, rel_tol)) * 0.6 + 0.5
        self.k_targ = max(1, min(self.KMAX - 1, int(logfact)))
        self.hopt = [0.0] * (self.KMAX + 1)
        self.work = [0.0] * (self.KMAX + 1)
        self.first = True
        self.prev_reject = False
        self.nfev = 0

    def _midpoint(self, y, dydx, H, n):
        h = H / n
        f = self.f
        ym = y
        yn = y + h * dydx
        for _ in range(1, n):
            ym, yn = yn, ym + (2.0 * h) * f(yn)
        self.nfev += n
        return 0.5 * (ym + yn + h * f(yn))

    def _error(self, y0, y1, y_prev):
        scale = self.atol + self.rtol * np.maximum(np.abs(y0), np.abs(y1))
        d = (y1 - y_prev) / scale
        return math.sqrt(float(np.dot(d, d)) / d.size)

    def step(self, y, dydx, htry, last):
        """Attempt steps from ``y`` starting with ``htry`` until one is accepted.

        Returns ``(y_new, h_did, h_next)``.
        """
        h = htry
        reject = False
        while True:
            try:
                k, reject, h_new, y1 = self._attempt(y, dydx, h, last)
            except (DomainError, FloatingPointError, OverflowError, ValueError):
                # a trial stage left the chart or overflowed; shrink hard
                k, reject, h_new, y1 = 0, True, 0.25 * h, None
            if not reject:
                break
            if abs(h_new) < 1e-14 * max(1.0, abs(h)) or abs(h_new) < 1e-13:
                raise DomainError("step size underflow")
            h = h_new
            self.prev_reject = True
            last = False
        h_next = self._next_step(k, h)
        self.first = False
        self.prev_reject = False
        return y1, h, h_next

    def _attempt(self, y, dydx, h, last):
        nseq, kt = self.nseq, self.k_targ
        rows = []
        h_new = h
        reject = False
        k = 0
        for k in range(kt + 2):
            yk = self._midpoint(y, dydx, h, nseq[k])
            # Neville extrapolation of the new row against previous diagonal
            row = [yk]
            for j in range(k):
                prev = row[j]
                row.append(prev + (prev - rows[k - 1][j]) * self.coeff[k][k - j - 1])
            rows.append(row)
            if k == 0:
                continue
            y1 = row[k]
            err = self._error(y, y1, row[k - 1])
            if not math.isfinite(err):
                raise FloatingPointError("non-finite extrapolation error")
            expo = 1.0 / (2 * k + 1)
            facmin = self.STEPFAC3 ** expo
            if err == 0.0:
                fac = 1.0 / facmin
            else:
                fac = self.SAFE2 / (err / self.SAFE1) ** expo
                fac = max(facmin / self.STEPFAC4, min(1.0 / facmin, fac))
            self.hopt[k] = abs(h * fac)
            self.work[k] = self.cost[k] / self.hopt[k]
            if (self.first or last) and err <= 1.0:
                reject = False
                break
            if k == kt - 1 and not self.prev_reject and not self.first and not last:
                if err <= 1.0:
                    reject = False
                    break
                if err > (nseq[kt] * nseq[kt + 1] / (nseq[0] * nseq[0])) ** 2:
                    reject = True
                    self.k_targ = k
                    if self.k_targ > 1 and self.work[k - 1] < self.KFAC1 * self.work[k]:
                        self.k_targ -= 1
                    h_new = self.hopt[self.k_targ]
                    break
            if k == kt:
                if err <= 1.0:
                    reject = False
                    break
                if err > (nseq[k + 1] / nseq[0]) ** 2:
                    reject = True
                    if self.k_targ > 1 and self.work[k - 1] < self.KFAC1 * self.work[k]:
                        self.k_targ -= 1
                    h_new = self.hopt[self.k_targ]
                    break
            if k == kt + 1:
                if err > 1.0:
                    reject = True
                    if self.k_targ > 1 and self.work[self.k_targ - 1] < self.KFAC1 * self.work[self.k_targ]:
                        self.k_targ -= 1
                    h_new = self.hopt[self.k_targ]
                break
        else:
            reject = True
            h_new = self.hopt[self.k_targ] or 0.5 * h
        if reject:
            h_new = math.copysign(min(abs(h_new), 0.9 * abs(h)), h)
        return k, reject, h_new, rows[k][k]

    def _next_step(self, k, h):
        work, kt = self.work, self.k_targ
        if k == 1:
            kopt = 2
        elif k <= kt:
            kopt = k
            if work[k - 1] < self.KFAC1 * work[k]:
                kopt = k - 1
            elif work[k] < self.KFAC2 * work[k - 1]:
                kopt = min(k + 1, self.KMAX - 1)
        else:
            kopt = k - 1
            if k > 2 and work[k - 2] < self.KFAC1 * work[k - 1]:
                kopt = k - 2
            if work[k] < self.KFAC2 * work[kopt]:
                kopt = min(k, self.KMAX - 1)
        if self.prev_reject:
            self.k_targ = min(kopt, k)
            h_next = min(abs(h), self.hopt[self.k_targ])
        else:
            if kopt <= k:
                h_next = self.hopt[kopt]
            elif k < kt and work[k] < self.KFAC2 * work[k - 1]:
                h_next = self.hopt[k] * self.cost[kopt + 1] / self.cost[k]
            else:
                h_next = self.hopt[k] * self.cost[kopt] / self.cost[k]
            self.k_targ = kopt
        return math.copysign(h_next, h)


# --------------------------------------------------------------------------
# driver
# --------------------------------------------------------------------------

def _drift_scales(system: HamiltonianSystem, y0: np.ndarray, opts: IntegrationOptions):
    H0 = system.energy(y0)
    return H0, max(abs(H0), opts.h_floor), max(abs(float(y0[3])), opts.h_floor)


def iter_samples(system: HamiltonianSystem, p0: PhaseState, opts: IntegrationOptions,
                 direction: float = 1.0) -> Iterator[tuple[float, np.ndarray]]:
    """Yield ``(t, y)`` at ``t = 0, dt, 2 dt, ...`` up to ``t_end``.

    Raises :class:`DomainError` when the trajectory leaves the chart.  Drift
    is not checked here; see :func:`integrate`.
    """
    f = system.vector_field
    y = p0.as_array()
    system.check_domain(y[0])
    stepper = BulirschStoer(f, opts.rel_tol, opts.abs_tol)
    n_samples = int(math.floor(opts.t_end / opts.sample_dt + 1e-9))
    yield 0.0, y.copy()
    t = 0.0
    h = direction * min(opts.sample_dt, 0.1)
    for i in range(1, n_samples + 1):
        target = direction * i * opts.sample_dt
        while True:
            remaining = target - t
            if abs(remaining) <= 1e-13 * max(1.0, abs(target)):
                break
            last = abs(h) >= abs(remaining)
            h_try = remaining if last else h
            dydx = f(y)
            y, h_did, h_next = stepper.step(y, dydx, h_try, last)
            system.check_domain(y[0])
            t = target if (last and h_did == h_try) else t + h_did
            # a step clipped to the sample keeps the unclipped suggestion
            h = h_next if not last or abs(h_next) > abs(h) else h
        t = target
        yield t, y.copy()


def integrate(system: HamiltonianSystem, p0: PhaseState, opts: IntegrationOptions,
              direction: float = 1.0) -> Trajectory:
    """Integrate ``system`` from ``p0`` and sample every ``opts.sample_dt``.

    Never raises on trajectory failure: the returned :class:`Trajectory`
    carries ``status`` and keeps every sample produced before the abort.
    """
    y0 = p0.as_array()
    H_init, h_scale, d_scale = _drift_scales(system, y0, opts)
    D_init = float(y0[3])
    ts, ys, Hs = [], [], []
    status, message = COMPLETED, ""
    h_drift = d_drift = 0.0
    try:
        for t, y in iter_samples(system, p0, opts, direction):
            H = system.energy(y)
            ts.append(t)
            ys.append(y)
            Hs.append(H)
            dh = abs(H - H_init) / h_scale
            h_drift = max(h_drift, dh)
            d_drift = max(d_drift, abs(float(y[3]) - D_init) / d_scale)
            if dh > opts.drift_abort:
                status = ABORTED_DRIFT
                message = f"relative energy drift {dh:.3e} exceeded {opts.drift_abort:.1e} at t={t}"
                log.warning(message)
                break
    except DomainError as exc:
        status = ABORTED_DOMAIN
        message = str(exc)
        log.warning("integration left the chart: %s", exc)
    return Trajectory(
        t=np.asarray(ts, dtype=float),
        y=np.asarray(ys, dtype=float).reshape(-1, 4),
        H=np.asarray(Hs, dtype=float),
        h_drift=h_drift,
        d_drift=d_drift,
        status=status,
        message=message,
        h_scale=h_scale,
        d_scale=d_scale,
    )


@dataclass
class ConservationReport:
    h_drift: float
    d_drift: float
    #: rows of (t_lo, t_hi, max relative H drift, max relative D drift)
    decades: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "h_drift": self.h_drift,
            "d_drift": self.d_drift,
            "decades": [list(row) for row in self.decades],
        }


def conservation_report(tr: Trajectory, system: HamiltonianSystem | None = None) -> ConservationReport:
    """Drift summary, with a per-decade growth table over ``[10^j, 10^(j+1))``.

    When ``system`` is given the energies are recomputed from the states;
    otherwise the energies stored on the trajectory are used.
    """
    if len(tr) == 0:
        raise ValueError("empty trajectory")
    if system is not None:
        H = np.array([system.energy(row) for row in tr.y])
    else:
        H = tr.H
    dh = np.abs(H - H[0]) / tr.h_scale
    dd = tr.relative_d_drift()
    decades = []
    t_max = float(tr.t[-1])
    if t_max > 0:
        lo_exp = int(math.floor(math.log10(max(float(tr.t[1]) if len(tr) > 1 else t_max, 1e-300))))
        for j in range(lo_exp, int(math.floor(math.log10(t_max))) + 1):
            lo, hi = 10.0 ** j, 10.0 ** (j + 1)
            mask = (tr.t >= lo) & (tr.t < hi)
            if mask.any():
                decades.append((lo, hi, float(dh[mask].max()), float(dd[mask].max())))
    return ConservationReport(h_drift=float(dh.max()), d_drift=float(dd.max()), decades=decades)
