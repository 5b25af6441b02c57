"""Phase-space types, the Hamiltonian system contract and coordinate maps.

States are evolved in reduced canonical coordinates ``(x, v, theta, D)``.
For the atmospheric model ``x`` is the latitude, ``D`` is twice the angular
momentum and ``theta`` is half the longitude in the frame moving with the
wave.  ``theta`` is kept unwrapped; wrap only for reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi
#: Closest approach to a pole before the chart is declared singular.
POLE_MARGIN = 1e-6


class DomainError(ValueError):
    """A state lies outside the coordinate chart of a model."""


def check_latitude(phi: float) -> None:
    # written so that nan also fails
    if not abs(phi) <= HALF_PI - POLE_MARGIN:
        raise DomainError(f"latitude {phi!r} outside the chart |phi| < pi/2")


@dataclass(frozen=True)
class PhaseState:
    """Reduced canonical state ``(x, v, theta, D)``."""

    x: float
    v: float
    theta: float
    D: float

    @property
    def theta_wrapped(self) -> float:
        return self.theta % TWO_PI

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.v, self.theta, self.D], dtype=float)

    @classmethod
    def from_array(cls, y) -> "PhaseState":
        return cls(float(y[0]), float(y[1]), float(y[2]), float(y[3]))


@dataclass(frozen=True)
class SphericalState:
    """Physical state on the sphere: longitude, latitude, eastward and northward velocity."""

    lam: float
    phi: float
    u: float
    v: float

    def __post_init__(self):
        if not abs(self.phi) < HALF_PI:
            raise DomainError(f"latitude {self.phi!r} outside (-pi/2, pi/2)")


def to_reduced(s: SphericalState, t: float = 0.0, c: float = 0.0, k: int = 1) -> PhaseState:
    """Map a physical state at time ``t`` to reduced coordinates.

    ``D = cos(phi) (cos(phi) + 2u)`` and ``theta = (lambda - c t) / 2``.
    """
    if k == 0:
        raise ValueError("wavenumber k must be nonzero")
    if not abs(s.phi) < HALF_PI:
        raise DomainError(f"latitude {s.phi!r} outside (-pi/2, pi/2)")
    cphi = math.cos(s.phi)
    return PhaseState(
        x=s.phi,
        v=s.v,
        theta=0.5 * (s.lam - c * t),
        D=cphi * (cphi + 2.0 * s.u),
    )


def to_spherical(p: PhaseState, t: float = 0.0, c: float = 0.0) -> SphericalState:
    """Inverse of :func:`to_reduced`; longitude is wrapped to ``[0, 2 pi)``."""
    if not abs(p.x) < HALF_PI:
        raise DomainError(f"latitude {p.x!r} outside (-pi/2, pi/2)")
    cphi = math.cos(p.x)
    u = 0.5 * (p.D / cphi - cphi)
    lam = (2.0 * p.theta + c * t) % TWO_PI
    return SphericalState(lam=lam, phi=p.x, u=u, v=p.v)


def derivative_5pt(f: Callable[[float], float], a: float, h: float = 1e-3) -> float:
    """Fourth-order central difference; rounding error ~ 1e-13, so it can be differenced again."""
    return (8.0 * (f(a + h) - f(a - h)) - (f(a + 2 * h) - f(a - 2 * h))) / (12.0 * h)


class HamiltonianSystem:
    """Contract for a near-integrable two degree of freedom system.

    ``H(x, v, theta, D) = H0(x, v, D; c) + eps * H1(x, v, theta, D)``.

    Subclasses must implement :meth:`h0`, :meth:`perturbation` and
    :meth:`with_c`.  Every derivative has a central finite-difference default
    so that a bare subclass is usable; the concrete models override them with
    hand-coded expressions.
    """

    #: whether the flow commutes with (x, v) -> (-x, -v)
    symmetric: bool = False
    #: seed range for fixed point searches and random sampling in x
    x_bounds: tuple[float, float] = (-2.0, 2.0)
    #: sampling range for the elliptic branch parameter
    branch_bounds: tuple[float, float] = (0.01, 1.5)
    fd_step: float = 1e-6
    c: float = 0.0
    eps: float = 0.0

    # -- required -----------------------------------------------------------
    def h0(self, x: float, v: float, D: float) -> float:
        raise NotImplementedError

    def perturbation(self, x: float, v: float, theta: float, D: float) -> float:
        """The full perturbation term ``eps * H1`` (zero for integrable systems)."""
        return 0.0

    def with_c(self, c: float) -> "HamiltonianSystem":
        raise NotImplementedError

    # -- defaults -----------------------------------------------------------
    def check_domain(self, x: float) -> None:
        if not math.isfinite(x):
            raise DomainError(f"non-finite coordinate {x!r}")

    def hamiltonian(self, p: PhaseState) -> float:
        self.check_domain(p.x)
        return self.h0(p.x, p.v, p.D) + self.perturbation(p.x, p.v, p.theta, p.D)

    def energy(self, y) -> float:
        """Full Hamiltonian of a raw state vector ``(x, v, theta, D)``."""
        x, v, theta, D = (float(q) for q in y)
        self.check_domain(x)
        return self.h0(x, v, D) + self.perturbation(x, v, theta, D)

    def grad_h0(self, x: float, v: float, D: float) -> tuple[float, float]:
        """``(dH0/dx, dH0/dv)``."""
        h = self.fd_step
        gx = (self.h0(x + h, v, D) - self.h0(x - h, v, D)) / (2 * h)
        gv = (self.h0(x, v + h, D) - self.h0(x, v - h, D)) / (2 * h)
        return gx, gv

    def hessian_h0(self, x: float, v: float, D: float) -> np.ndarray:
        """Second derivatives of H0 in ``(x, v)``, from the gradient."""
        h = 1e-5
        gxp, gvp = self.grad_h0(x + h, v, D)
        gxm, gvm = self.grad_h0(x - h, v, D)
        gxq, gvq = self.grad_h0(x, v + h, D)
        gxr, gvr = self.grad_h0(x, v - h, D)
        hxx = (gxp - gxm) / (2 * h)
        hvv = (gvq - gvr) / (2 * h)
        hxv = 0.5 * ((gvp - gvm) + (gxq - gxr)) / (2 * h)
        return np.array([[hxx, hxv], [hxv, hvv]])

    def h0_d(self, x: float, v: float, D: float) -> float:
        """``dH0/dD``, the theta-rate of the unperturbed flow."""
        return derivative_5pt(lambda d: self.h0(x, v, d), D)

    def h0_c(self, x: float, v: float, D: float) -> float:
        """``dH0/dc`` at fixed state."""
        return derivative_5pt(lambda c: self.with_c(c).h0(x, v, D), self.c)

    def vector_field(self, y) -> np.ndarray:
        """``(dx, dv, dtheta, dD) = (H_v, -H_x, H_D, -H_theta)`` of the full Hamiltonian."""
        x, v, theta, D = (float(q) for q in y)
        self.check_domain(x)
        h = self.fd_step

        def H(a, b, c, d):
            return self.h0(a, b, d) + self.perturbation(a, b, c, d)

        return np.array([
            (H(x, v + h, theta, D) - H(x, v - h, theta, D)) / (2 * h),
            -(H(x + h, v, theta, D) - H(x - h, v, theta, D)) / (2 * h),
            (H(x, v, theta, D + h) - H(x, v, theta, D - h)) / (2 * h),
            -(H(x, v, theta + h, D) - H(x, v, theta - h, D)) / (2 * h),
        ])

    def branch_action(self, x: float) -> float:
        """Action ``D`` at which ``(x, 0)`` is a nontrivial fixed point, if closed form exists."""
        raise NotImplementedError

    def sample_state(self, rng: np.random.Generator) -> PhaseState:
        lo, hi = self.x_bounds
        return PhaseState(
            x=float(rng.uniform(lo, hi)),
            v=float(rng.uniform(-1.0, 1.0)),
            theta=float(rng.uniform(0.0, TWO_PI)),
            D=float(rng.uniform(-2.0, 2.0)),
        )


def canonical_vector_field(system: HamiltonianSystem, p: PhaseState) -> np.ndarray:
    """Canonical vector field of ``system`` at ``p`` as ``(dx, dv, dtheta, dD)``."""
    return system.vector_field(p.as_array())


def symplectic_gradient_fd(system: HamiltonianSystem, p: PhaseState, h: float = 1e-6) -> np.ndarray:
    """Symplectic gradient of the full Hamiltonian by central differences.

    Independent of the analytic vector field; used to check it.
    """
    def H(dx=0.0, dv=0.0, dth=0.0, dD=0.0):
        return system.hamiltonian(PhaseState(p.x + dx, p.v + dv, p.theta + dth, p.D + dD))

    return np.array([
        (H(dv=h) - H(dv=-h)) / (2 * h),
        -(H(dx=h) - H(dx=-h)) / (2 * h),
        (H(dD=h) - H(dD=-h)) / (2 * h),
        -(H(dth=h) - H(dth=-h)) / (2 * h),
    ])
