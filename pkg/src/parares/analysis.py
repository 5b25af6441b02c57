"""Fixed points, resonance loci, parabolic resonance location and flatness.

Everything here concerns the unperturbed part ``H0`` of a system; the
perturbation amplitude is ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import HALF_PI, DomainError, HamiltonianSystem, derivative_5pt
from .models import AtmosphericModel, MechanicalModel

ELLIPTIC = "elliptic"
HYPERBOLIC = "hyperbolic"
PARABOLIC = "parabolic"

#: absolute tolerance on the (x, v) Hessian determinant for parabolicity
DET_TOL = 1e-8
#: gradient residual a fixed point must reach to be recorded
RESIDUAL_TOL = 1e-10
#: |dtheta/dt| below which an invariant circle is a circle of fixed points
RATE_TOL = 1e-10
MERGE_TOL = 1e-8
#: a parabolic root is only located to about machine precision ** (1/3)
DEGENERATE_MERGE_TOL = 1e-5
FLAT_TOL = 1e-10
IDENTITY_TOL = 1e-8
BRANCH_GRID = (0.01, HALF_PI - 0.01, 200)


class PreconditionError(ValueError):
    """An analysis routine was called on a point that does not satisfy its preconditions."""


def _at_c(system: HamiltonianSystem, c: float | None) -> HamiltonianSystem:
    if c is None or c == system.c:
        return system
    return system.with_c(c)


# --------------------------------------------------------------------------
# fixed points
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedPointRecord:
    x: float
    v: float
    D: float
    c: float
    stability: str
    lambda_sq: float
    theta_rate: float
    residual: float

    @property
    def is_fixed_circle(self) -> bool:
        return abs(self.theta_rate) <= RATE_TOL

    def as_dict(self) -> dict:
        return {
            "x": self.x, "v": self.v, "D": self.D, "c": self.c,
            "stability": self.stability, "lambda_sq": self.lambda_sq,
            "theta_rate": self.theta_rate, "is_fixed_circle": self.is_fixed_circle,
            "residual": self.residual,
        }


def classify_fixed_point(system: HamiltonianSystem, x: float, v: float, D: float,
                         c: float | None = None) -> tuple[str, float]:
    """Stability of the planar fixed point ``(x, v)`` of ``H0(., ., D; c)``.

    The linearisation has eigenvalues ``+-sqrt(-det Hess)``, so
    ``lambda_sq = -det``: positive is hyperbolic, negative elliptic.
    """
    sys_c = _at_c(system, c)
    residual = math.hypot(*sys_c.grad_h0(x, v, D))
    if residual > 1e-8:
        raise PreconditionError(f"({x}, {v}) is not a fixed point at D={D}: |grad H0| = {residual:.3e}")
    det = float(np.linalg.det(sys_c.hessian_h0(x, v, D)))
    lambda_sq = -det
    if det > DET_TOL:
        return ELLIPTIC, lambda_sq
    if det < -DET_TOL:
        return HYPERBOLIC, lambda_sq
    return PARABOLIC, lambda_sq


def _newton_planar(system, x, v, D, maxit=200):
    # iterate on step length, not residual: at a parabolic point the root is
    # degenerate and the residual vanishes long before x converges
    lo, hi = system.x_bounds
    span = hi - lo
    try:
        for _ in range(maxit):
            g = np.array(system.grad_h0(x, v, D))
            if not g.any():
                break
            step = np.linalg.lstsq(system.hessian_h0(x, v, D), -g, rcond=None)[0]
            n = float(np.hypot(*step))
            if n > 0.25 * span:
                step *= 0.25 * span / n
            x += float(step[0])
            v += float(step[1])
            if not (lo - 0.5 * span <= x <= hi + 0.5 * span) or abs(v) > 10:
                return None
            if n <= 1e-12:
                break
        res = float(np.hypot(*system.grad_h0(x, v, D)))
    except DomainError:
        return None
    return x, v, res


def find_fixed_points(system: HamiltonianSystem, D: float, c: float | None = None,
                      nx: int = 21, nv: int = 5) -> list[FixedPointRecord]:
    """All planar fixed points of ``H0(., ., D; c)`` reached by Newton from a seed grid.

    Returns an empty list when no seed converges.
    """
    sys_c = _at_c(system, c)
    lo, hi = sys_c.x_bounds
    found: list[tuple[float, float, float]] = []
    for x0 in np.linspace(lo, hi, nx):
        for v0 in np.linspace(-0.5, 0.5, nv):
            out = _newton_planar(sys_c, float(x0), float(v0), D)
            if out is None or out[2] > RESIDUAL_TOL:
                continue
            x, v, res = out
            det = abs(float(np.linalg.det(sys_c.hessian_h0(x, v, D))))
            tol = DEGENERATE_MERGE_TOL if det <= DET_TOL else MERGE_TOL
            for i, (xo, vo, ro) in enumerate(found):
                if math.hypot(x - xo, v - vo) <= tol:
                    if (res, abs(x)) < (ro, abs(xo)):
                        found[i] = (x, v, res)
                    break
            else:
                found.append((x, v, res))
    records = []
    for x, v, res in sorted(found):
        x = 0.0 if x == 0 else x
        v = 0.0 if v == 0 else v
        stability, lam = classify_fixed_point(sys_c, x, v, D)
        records.append(FixedPointRecord(
            x=x, v=v, D=D, c=sys_c.c, stability=stability, lambda_sq=lam,
            theta_rate=sys_c.h0_d(x, v, D), residual=res,
        ))
    return records


# --------------------------------------------------------------------------
# closed-form loci
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ResonanceLoci:
    """Closed-form resonance data; the resonant action is ``D_r(c) = intercept + slope * c``."""

    d_p: float
    c_p: float
    d_r_intercept: float
    d_r_slope: float
    elliptic_branch: tuple[tuple[float, float], ...] = ()
    lower_wave_speed: float | None = None

    def d_r(self, c: float) -> float:
        return self.d_r_intercept + self.d_r_slope * c

    def as_dict(self) -> dict:
        return {
            "d_p": self.d_p, "c_p": self.c_p,
            "d_r": {"intercept": self.d_r_intercept, "slope": self.d_r_slope},
            "lower_wave_speed": self.lower_wave_speed,
            "elliptic_branch": [list(p) for p in self.elliptic_branch],
        }


def _branch_grid() -> np.ndarray:
    lo, hi, n = BRANCH_GRID
    return np.linspace(lo, hi, n)


def _sample_branch(system) -> tuple[tuple[float, float], ...]:
    pts = []
    for x in _branch_grid():
        try:
            pts.append((float(x), elliptic_branch(system, float(x))))
        except DomainError:
            continue
    return tuple(pts)


def resonance_loci(system: HamiltonianSystem) -> ResonanceLoci:
    if isinstance(system, AtmosphericModel):
        d_p = math.sqrt(1.0 - 4.0 * system.jet.d2(0.0))
        k = abs(system.k)
        return ResonanceLoci(
            d_p=d_p,
            c_p=0.5 * (d_p - 1.0),
            d_r_intercept=1.0,
            d_r_slope=2.0,
            elliptic_branch=_sample_branch(system),
            lower_wave_speed=-math.sin(math.pi / (4 * k)) ** 2,
        )
    if isinstance(system, MechanicalModel):
        return ResonanceLoci(
            d_p=1.0,
            c_p=0.0,
            d_r_intercept=1.0,
            d_r_slope=1.0 / system.params.twist,
            elliptic_branch=_sample_branch(system),
        )
    raise TypeError(f"no closed-form loci for {type(system).__name__}")


def resonant_action(system: HamiltonianSystem, c: float | None = None,
                    bracket: tuple[float, float] = (-5.0, 5.0)) -> float:
    """Root-found ``D`` at which the origin circle has zero theta-rate."""
    from scipy.optimize import brentq

    sys_c = _at_c(system, c)
    return brentq(lambda D: sys_c.h0_d(0.0, 0.0, D), *bracket, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def elliptic_branch(system: HamiltonianSystem, phi_ell: float) -> float:
    """Action ``D_g`` at which ``(+-phi_ell, 0)`` are elliptic fixed points.

    Raises :class:`DomainError` where the branch does not exist.
    """
    if not 0 < abs(phi_ell) < HALF_PI:
        raise DomainError(f"branch parameter {phi_ell!r} outside (0, pi/2)")
    return system.branch_action(phi_ell)


def theta_rate_on_branch(system: HamiltonianSystem, phi_ell: float, c: float | None = None) -> float:
    """dtheta/dt on the elliptic circle at ``phi_ell``."""
    sys_c = _at_c(system, c)
    if isinstance(sys_c, AtmosphericModel):
        if not 0 < abs(phi_ell) < HALF_PI:
            raise DomainError(f"branch parameter {phi_ell!r} outside (0, pi/2)")
        rad = 1.0 - 8.0 * sys_c.jet.d1(phi_ell) / math.sin(2 * phi_ell)
        if rad < 0:
            raise DomainError(f"negative radicand {rad!r} at phi={phi_ell!r}")
        return 0.25 * math.sqrt(rad) - 0.5 * (sys_c.c + 0.5)
    D = elliptic_branch(sys_c, phi_ell)
    return sys_c.h0_d(phi_ell, 0.0, D)


def flatness_index(system: HamiltonianSystem, c: float | None = None) -> float:
    """Largest |theta-rate| along the elliptic branch; zero for a flat family of fixed circles."""
    rates = []
    for x in _branch_grid():
        try:
            rates.append(abs(theta_rate_on_branch(system, float(x), c)))
        except DomainError:
            continue
    if not rates:
        raise ValueError("elliptic branch is empty on the sampling grid")
    return max(rates)


def is_flat(system: HamiltonianSystem, c: float | None = None) -> bool:
    return flatness_index(system, c) <= FLAT_TOL


# --------------------------------------------------------------------------
# parabolic resonance by root finding
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ParabolicResonance:
    x: float
    v: float
    D: float
    c: float
    #: (dH0/dx, dH0/dv, det Hess, dH0/dD) at the solution
    residuals: tuple[float, float, float, float]
    converged: bool
    iterations: int

    @property
    def max_residual(self) -> float:
        return max(abs(r) for r in self.residuals)

    def as_dict(self) -> dict:
        return {
            "x": self.x, "v": self.v, "D": self.D, "c": self.c,
            "residuals": list(self.residuals), "converged": self.converged,
            "iterations": self.iterations,
        }


def _pr_residual(system, q):
    x, v, D, c = (float(a) for a in q)
    s = system.with_c(c)
    gx, gv = s.grad_h0(x, v, D)
    det = float(np.linalg.det(s.hessian_h0(x, v, D)))
    return np.array([gx, gv, det, s.h0_d(x, v, D)])


def _pr_newton(system, q, maxit, tol):
    h = 1e-7
    best = None
    for it in range(maxit + 1):
        F = _pr_residual(system, q)
        r = float(np.max(np.abs(F)))
        if best is None or r < best[1]:
            best = (q.copy(), r, it)
        if r <= 1e-15:
            break
        J = np.empty((4, 4))
        for j in range(4):
            e = np.zeros(4)
            e[j] = h
            J[:, j] = (_pr_residual(system, q + e) - _pr_residual(system, q - e)) / (2 * h)
        step = np.linalg.lstsq(J, -F, rcond=1e-12)[0]
        n = float(np.linalg.norm(step))
        if n > 0.5:
            step *= 0.5 / n
        q = q + step
        if n <= 1e-16:
            break
    q, r, it = best
    return q, r, it


def locate_parabolic_resonance(system: HamiltonianSystem, seeds=None, maxit: int = 200,
                               tol: float = RESIDUAL_TOL) -> ParabolicResonance:
    """Solve ``grad H0 = 0``, ``det Hess H0 = 0``, ``dH0/dD = 0`` for ``(x, v, D, c)``.

    Newton with a finite-difference Jacobian and least-squares steps (the
    Jacobian is rank deficient on symmetry axes).  On failure the best
    iterate is returned with ``converged=False``.
    """
    if seeds is None:
        seeds = [(x0, 0.0, D0, c0) for x0 in (0.0, 0.2) for D0 in (1.0, 1.5) for c0 in (0.0, 0.25)]
    candidates = []
    for seed in seeds:
        try:
            q, r, it = _pr_newton(system, np.array(seed, dtype=float), maxit, tol)
        except DomainError:
            continue
        candidates.append((r > tol, abs(q[0]), len(candidates), q, r, it))
    if not candidates:
        nan = float("nan")
        return ParabolicResonance(nan, nan, nan, nan, (nan,) * 4, False, 0)
    candidates.sort(key=lambda item: item[:3])
    _, _, _, q, r, it = candidates[0]
    F = _pr_residual(system, q)
    x, v, D, c = (float(a) for a in q)
    return ParabolicResonance(
        x=x + 0.0, v=v + 0.0, D=D, c=c,
        residuals=tuple(float(a) for a in F),
        converged=r <= tol,
        iterations=it,
    )


# --------------------------------------------------------------------------
# structural classification
# --------------------------------------------------------------------------

SEPARABLE_C_IN_D = "separable-c-in-D-part"
SEPARABLE_C_IN_XV = "separable-c-in-xv-part"
TRAVELLING_WAVE = "travelling-wave"
NATURAL_MECHANICAL = "natural-mechanical"
GENERAL = "general"


def _xv_gradient(fn: Callable[[float, float, float], float], x, v, D):
    return (
        derivative_5pt(lambda a: fn(a, v, D), x),
        derivative_5pt(lambda b: fn(x, b, D), v),
    )


def _coupling_gradient(system, x, v, D):
    gc = _xv_gradient(system.h0_c, x, v, D)
    gd = _xv_gradient(system.h0_d, x, v, D)
    return math.hypot(*gc) + math.hypot(*gd)


@dataclass(frozen=True)
class StructureReport:
    classes: frozenset
    #: max magnitude over the sample of each tested quantity
    identities: dict
    #: |grad dH0/dc| + |grad dH0/dD| evaluated exactly at q_PR
    coupling_gradient_at_qpr: float | None
    #: the same quantity maximised over a small ball around q_PR
    coupling_gradient_near_qpr: float | None
    q_pr: ParabolicResonance | None = field(default=None, compare=False)

    @property
    def coupling_gradient(self) -> float | None:
        return self.coupling_gradient_near_qpr

    def as_dict(self) -> dict:
        return {
            "classes": sorted(self.classes),
            "identities": dict(self.identities),
            "coupling_gradient_at_qpr": self.coupling_gradient_at_qpr,
            "coupling_gradient_near_qpr": self.coupling_gradient_near_qpr,
        }


def structure_classify(system: HamiltonianSystem, n_samples: int = 200, seed: int = 20240601,
                       q_pr: ParabolicResonance | None = None,
                       neighbourhood: float = 0.05) -> StructureReport:
    """Detect the special forms of ``H0`` by sampling mixed partials.

    Each identity holds when its maximum magnitude over ``n_samples``
    random states is at most ``IDENTITY_TOL``:

    * ``grad_xv dH0/dD == 0``    -- separable coupling through D only
    * ``grad_xv dH0/dc == 0``    -- c absent from the (x, v) part
    * ``d2H0/dD dc == 0``        -- c absent from the D part
    * ``dH0/dv == v``            -- kinetic-plus-potential form
    """
    rng = np.random.default_rng(seed)
    g_d = g_c = m_dc = kin = 0.0
    for _ in range(n_samples):
        p = system.sample_state(rng)
        x, v, D = p.x, p.v, p.D
        g_d = max(g_d, math.hypot(*_xv_gradient(system.h0_d, x, v, D)))
        g_c = max(g_c, math.hypot(*_xv_gradient(system.h0_c, x, v, D)))
        m_dc = max(m_dc, abs(derivative_5pt(lambda d: system.h0_c(x, v, d), D)))
        kin = max(kin, abs(system.grad_h0(x, v, D)[1] - v))
    identities = {
        "xv_gradient_dH0_dD": g_d,
        "xv_gradient_dH0_dc": g_c,
        "mixed_D_c": m_dc,
        "kinetic_form": kin,
    }
    holds = {name: val <= IDENTITY_TOL for name, val in identities.items()}
    classes = set()
    if holds["xv_gradient_dH0_dD"] and holds["mixed_D_c"]:
        classes.add(SEPARABLE_C_IN_XV)
    if holds["xv_gradient_dH0_dD"] and holds["xv_gradient_dH0_dc"]:
        classes.add(SEPARABLE_C_IN_D)
    if holds["xv_gradient_dH0_dc"] and not holds["xv_gradient_dH0_dD"]:
        classes.add(TRAVELLING_WAVE)
    if holds["kinetic_form"]:
        classes.add(NATURAL_MECHANICAL)
    if not classes:
        classes.add(GENERAL)

    if q_pr is None:
        q_pr = locate_parabolic_resonance(system)
    at = near = None
    if q_pr.converged:
        s = system.with_c(q_pr.c)
        at = _coupling_gradient(s, q_pr.x, q_pr.v, q_pr.D)
        near = at
        ball = np.random.default_rng(seed + 1)
        for _ in range(n_samples):
            dx, dv, dD = ball.uniform(-neighbourhood, neighbourhood, 3)
            try:
                near = max(near, _coupling_gradient(s, q_pr.x + dx, q_pr.v + dv, q_pr.D + dD))
            except DomainError:
                continue
    return StructureReport(frozenset(classes), identities, at, near, q_pr)


# --------------------------------------------------------------------------
# resonance regime of a parameter point
# --------------------------------------------------------------------------

def resonance_class(system: HamiltonianSystem, tol: float = 1e-2) -> str:
    """Type of the resonance on the origin circle at the system's wave speed.

    ``parabolic`` when ``|D_r(c) - D_p| <= tol`` (``flat-parabolic`` if the
    elliptic branch is also flat at ``c_p``), otherwise ``hyperbolic`` or
    ``elliptic`` according to the side of ``D_p`` on which ``D_r(c)`` lies.
    """
    loci = resonance_loci(system)
    d_r = loci.d_r(system.c)
    if abs(d_r - loci.d_p) <= tol:
        try:
            flat = flatness_index(system, loci.c_p) <= FLAT_TOL
        except ValueError:
            flat = False
        return "flat-parabolic" if flat else PARABOLIC
    return HYPERBOLIC if abs(d_r) < loci.d_p else ELLIPTIC
