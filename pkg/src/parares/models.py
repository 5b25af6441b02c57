"""The two concrete systems: quasi-inertial atmospheric motion and a mechanical normal form."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import HALF_PI, POLE_MARGIN, TWO_PI, DomainError, HamiltonianSystem, PhaseState, check_latitude


# --------------------------------------------------------------------------
# latitude profiles
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CosCubedProfile:
    """``P(phi) = amplitude * cos^3(phi)``."""

    amplitude: float = 1.0

    def value(self, phi: float) -> float:
        return self.amplitude * math.cos(phi) ** 3

    def d1(self, phi: float) -> float:
        c = math.cos(phi)
        return -3.0 * self.amplitude * c * c * math.sin(phi)

    def d2(self, phi: float) -> float:
        c, s = math.cos(phi), math.sin(phi)
        return self.amplitude * (6.0 * c * s * s - 3.0 * c ** 3)


@dataclass(frozen=True)
class SinTwoGradientProfile:
    """Profile with ``P'(phi) = alpha * sin(2 phi)``.

    For this family ``P'(phi) / sin(2 phi)`` is constant, which keeps the
    elliptic branch rate independent of latitude.
    """

    alpha: float

    def value(self, phi: float) -> float:
        return -0.5 * self.alpha * math.cos(2.0 * phi)

    def d1(self, phi: float) -> float:
        return self.alpha * math.sin(2.0 * phi)

    def d2(self, phi: float) -> float:
        return 2.0 * self.alpha * math.cos(2.0 * phi)


@dataclass(frozen=True)
class ZeroProfile:
    def value(self, phi: float) -> float:
        return 0.0

    def d1(self, phi: float) -> float:
        return 0.0

    def d2(self, phi: float) -> float:
        return 0.0


# --------------------------------------------------------------------------
# atmospheric model
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AtmosphericParams:
    """Parameters of the travelling-wave atmospheric model.

    ``beta = -B''(0)`` sets the default pressure-gradient profile
    ``B(phi) = beta/3 cos^3(phi)``.
    """

    k: int = 3
    c: float = 0.0
    eps: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k == 0:
            raise ValueError(f"k must be a nonzero integer, got {self.k!r}")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if self.c < -0.5:
            raise ValueError("wave speed c must satisfy c >= -1/2")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")


@dataclass(frozen=True)
class AtmosphericModel(HamiltonianSystem):
    """Reduced autonomous Hamiltonian for a particle on a rotating sphere.

    ``H = v^2/2 + (D/cos(phi) - cos(phi))^2 / 8 - c D / 2 + B(phi)
    + eps A(phi) sin(2 k theta)``

    The wave profile ``A`` and the jet profile ``B`` default to
    ``cos^3`` and ``beta/3 cos^3``; both must be even in ``phi``.
    """

    params: AtmosphericParams = field(default_factory=AtmosphericParams)
    wave: object = None
    jet: object = None

    symmetric = True
    x_bounds = (-HALF_PI + 0.07, HALF_PI - 0.07)
    branch_bounds = (0.01, HALF_PI - 0.01)

    def __post_init__(self):
        if self.wave is None:
            object.__setattr__(self, "wave", CosCubedProfile(1.0))
        if self.jet is None:
            jet = CosCubedProfile(self.params.beta / 3.0) if self.params.beta else ZeroProfile()
            object.__setattr__(self, "jet", jet)

    @property
    def c(self) -> float:
        return self.params.c

    @property
    def eps(self) -> float:
        return self.params.eps

    @property
    def k(self) -> int:
        return self.params.k

    def with_c(self, c: float) -> "AtmosphericModel":
        return replace(self, params=replace(self.params, c=c))

    def with_eps(self, eps: float) -> "AtmosphericModel":
        return replace(self, params=replace(self.params, eps=eps))

    def check_domain(self, x: float) -> None:
        check_latitude(x)

    def h0(self, x, v, D):
        check_latitude(x)
        cp = math.cos(x)
        r = D / cp - cp
        return 0.5 * v * v + 0.125 * r * r - 0.5 * self.params.c * D + self.jet.value(x)

    def perturbation(self, x, v, theta, D):
        return self.params.eps * self.wave.value(x) * math.sin(2 * self.params.k * theta)

    def grad_h0(self, x, v, D):
        check_latitude(x)
        cp = math.cos(x)
        c4 = cp ** 4
        hx = 0.125 * math.sin(2 * x) * (D * D / c4 - 1.0) + self.jet.d1(x)
        return hx, v

    def hessian_h0(self, x, v, D):
        check_latitude(x)
        cp, sp = math.cos(x), math.sin(x)
        c4 = cp ** 4
        hxx = 0.25 * math.cos(2 * x) * (D * D / c4 - 1.0) + D * D * sp * sp / c4 + self.jet.d2(x)
        return np.array([[hxx, 0.0], [0.0, 1.0]])

    def h0_d(self, x, v, D):
        check_latitude(x)
        return 0.25 * D / math.cos(x) ** 2 - 0.25 - 0.5 * self.params.c

    def h0_c(self, x, v, D):
        return -0.5 * D

    def vector_field(self, y):
        phi, v, theta, D = y
        if not abs(phi) <= HALF_PI - POLE_MARGIN:
            raise DomainError(f"latitude {phi!r} outside the chart |phi| < pi/2")
        p = self.params
        cp = math.cos(phi)
        c2 = cp * cp
        arg = 2 * p.k * theta
        if p.eps:
            wave_v = p.eps * self.wave.value(phi)
            wave_d1 = p.eps * self.wave.d1(phi)
            dD = -2 * p.k * wave_v * math.cos(arg)
            dv_pert = wave_d1 * math.sin(arg)
        else:
            dD = 0.0
            dv_pert = 0.0
        return np.array([
            v,
            0.125 * math.sin(2 * phi) * (1.0 - D * D / (c2 * c2)) - self.jet.d1(phi) - dv_pert,
            0.25 * D / c2 - 0.5 * (p.c + 0.5),
            dD,
        ])

    def branch_action(self, x: float) -> float:
        """Action ``D_g`` of the elliptic fixed points at latitude ``+-x``."""
        check_latitude(x)
        s2 = math.sin(2 * x)
        if s2 == 0.0:
            raise DomainError("branch undefined on the equator")
        rad = 1.0 - 8.0 * self.jet.d1(x) / s2
        if rad < 0:
            raise DomainError(f"negative radicand {rad!r} on the elliptic branch at phi={x!r}")
        return math.cos(x) ** 2 * math.sqrt(rad)

    def sample_state(self, rng):
        return PhaseState(
            x=float(rng.uniform(-1.3, 1.3)),
            v=float(rng.uniform(-1.0, 1.0)),
            theta=float(rng.uniform(0.0, TWO_PI)),
            D=float(rng.uniform(-2.0, 2.0)),
        )


# --------------------------------------------------------------------------
# mechanical normal form
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MechanicalParams:
    """Coefficients of the natural mechanical normal form with a parabolic resonance at ``(0, 0, 1, 0)``."""

    a1: float = 1.0
    a2: float = 0.0
    a3: float = 1.0
    b: float = 0.0
    c: float = 0.0
    eps: float = 0.0
    k: int = 3

    def __post_init__(self):
        if self.a3 <= 0:
            raise ValueError("a3 must be positive")
        if self.b <= -1.0 / (2 * self.a3):
            raise ValueError("b must exceed -1/(2 a3) for compact energy surfaces")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")
        if int(self.k) != self.k:
            raise ValueError("k must be an integer")

    @property
    def twist(self) -> float:
        """Coefficient ``1/(2 a3) + b`` of the ``(D - 1)^2 / 2`` term."""
        return 0.5 / self.a3 + self.b


@dataclass(frozen=True)
class MechanicalModel(HamiltonianSystem):
    """``H0 = (1/(2a3) + b)(D-1)^2/2 - cD + v^2/2 + a1 x^2 (1-D)/2 + a2 x^3/3 + a3 x^4/4``
    perturbed by ``eps (1 - x^2/2) cos(k theta)``."""

    params: MechanicalParams = field(default_factory=MechanicalParams)

    x_bounds = (-2.0, 2.0)
    branch_bounds = (0.01, 1.5)

    @property
    def symmetric(self) -> bool:
        return self.params.a2 == 0.0

    @property
    def c(self) -> float:
        return self.params.c

    @property
    def eps(self) -> float:
        return self.params.eps

    @property
    def k(self) -> int:
        return self.params.k

    def with_c(self, c: float) -> "MechanicalModel":
        return replace(self, params=replace(self.params, c=c))

    def with_eps(self, eps: float) -> "MechanicalModel":
        return replace(self, params=replace(self.params, eps=eps))

    def h0(self, x, v, D):
        p = self.params
        return (0.5 * p.twist * (D - 1.0) ** 2 - p.c * D + 0.5 * v * v
                + 0.5 * p.a1 * x * x * (1.0 - D) + p.a2 * x ** 3 / 3.0 + 0.25 * p.a3 * x ** 4)

    def perturbation(self, x, v, theta, D):
        return self.params.eps * (1.0 - 0.5 * x * x) * math.cos(self.params.k * theta)

    def grad_h0(self, x, v, D):
        p = self.params
        return p.a1 * x * (1.0 - D) + p.a2 * x * x + p.a3 * x ** 3, v

    def hessian_h0(self, x, v, D):
        p = self.params
        hxx = p.a1 * (1.0 - D) + 2 * p.a2 * x + 3 * p.a3 * x * x
        return np.array([[hxx, 0.0], [0.0, 1.0]])

    def h0_d(self, x, v, D):
        p = self.params
        return p.twist * (D - 1.0) - p.c - 0.5 * p.a1 * x * x

    def h0_c(self, x, v, D):
        return -D

    def vector_field(self, y):
        x, v, theta, D = y
        p = self.params
        arg = p.k * theta
        return np.array([
            v,
            p.a1 * (D - 1.0) * x - p.a2 * x * x - p.a3 * x ** 3 + p.eps * x * math.cos(arg),
            p.twist * (D - 1.0) - p.c - 0.5 * p.a1 * x * x,
            p.k * p.eps * (1.0 - 0.5 * x * x) * math.sin(arg),
        ])

    def branch_action(self, x: float) -> float:
        """Action at which ``(x, 0)`` is a nontrivial fixed point: ``D = 1 + (a2 x + a3 x^2) / a1``."""
        p = self.params
        if p.a1 == 0:
            raise DomainError("branch not parameterised by x when a1 = 0")
        return 1.0 + (p.a2 * x + p.a3 * x * x) / p.a1
