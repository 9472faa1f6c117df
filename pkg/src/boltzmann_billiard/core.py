"""Parameters, states, and closed-form orbit geometry for the Boltzmann billiard.

The model is a point particle in the plane moving under the attracting
potential ``V(z) = -1/|z| - beta/|z|**2`` at fixed positive energy ``h``,
reflecting elastically off the straight wall ``y = -L``.  Between
reflections the motion is an integrable central-force problem: angular
momentum ``C = x*vy - y*vx`` is conserved and, whenever ``C**2 > 2*beta``,
the path is a precessing conic.  Writing ``C' = sqrt(C**2 - 2*beta)`` and
``gamma = C'/C``, the radius in the rescaled angle ``psi = gamma*(theta -
theta_peri)`` is

    r(psi) = C'**2 / (1 + e*cos(psi)),      e = sqrt(1 + 2*h*C'**2),

with radial velocity ``dr/dt = (e/C') * sin(psi)``.  Everything in this
module is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import CollisionalOrbitError, DomainError, SingularityError

#: Relative tolerance used when checking that a state's energy matches Params.h.
ENERGY_RTOL = 1e-9


def _vec2(z) -> np.ndarray:
    v = np.asarray(z, dtype=float)
    if v.shape != (2,):
        raise DomainError(f"expected a 2-vector, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class Params:
    """Normalized physical parameters: energy h, wall distance L, strong-force beta.

    The Keplerian coefficient is fixed to 1 by normalize(); h and L are kept
    explicit.  Requires h > 0, L > 0, beta >= 0.
    """

    h: float
    L: float
    beta: float = 0.0

    def __post_init__(self):
        if not (self.h > 0.0):
            raise DomainError(f"energy h must be positive, got {self.h}")
        if not (self.L > 0.0):
            raise DomainError(f"wall distance L must be positive, got {self.L}")
        if not (self.beta >= 0.0):
            raise DomainError(f"beta must be nonnegative, got {self.beta}")


@dataclass(frozen=True, eq=False)
class State:
    """Position/velocity pair; the billiard phase point when pos is on the wall."""

    pos: np.ndarray
    vel: np.ndarray

    def __post_init__(self):
        pos = _vec2(self.pos)
        vel = _vec2(self.vel)
        if pos[0] == 0.0 and pos[1] == 0.0:
            raise SingularityError("state position at the attracting centre")
        pos.setflags(write=False)
        vel.setflags(write=False)
        object.__setattr__(self, "pos", pos)
        object.__setattr__(self, "vel", vel)


@dataclass(frozen=True)
class NormalizedSystem:
    """Result of normalize(): parameters plus the space/time rescale factors."""

    params: Params
    length_scale: float
    time_scale: float

    def original(self) -> tuple[float, float, float, float]:
        """Undo the rescaling: return (alpha, beta, L, h) in original units."""
        lam = self.length_scale
        tau = self.time_scale
        alpha = lam**3 / tau**2
        h = self.params.h * lam**2 / tau**2
        L = self.params.L * lam
        beta = self.params.beta * lam**4 / tau**2
        return alpha, beta, L, h


class Interval(NamedTuple):
    lo: float
    hi: float

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class OrbitElements:
    """Conserved quantities and conic geometry of one ballistic arc.

    Valid only when C**2 > 2*beta (otherwise the motion is collisional).
    ``gamma = Cprime/C`` carries the sign of C; ``theta_peri`` is a lifted
    pericentre angle consistent with the state the elements were built from.
    """

    C: float
    Cprime: float
    e: float
    r_min: float
    gamma: float
    theta_peri: float
    direction: int

    @property
    def psi_max(self) -> float:
        """Rescaled angle from pericentre to the escape asymptote: arccos(-1/e)."""
        return math.acos(-1.0 / self.e)

    def radius(self, theta: float | np.ndarray) -> float | np.ndarray:
        """Radius at lifted polar angle theta (on this arc's branch)."""
        psi = self.gamma * (np.asarray(theta, dtype=float) - self.theta_peri)
        return self.radius_at_psi(psi)

    def radius_at_psi(self, psi):
        return self.Cprime**2 / (1.0 + self.e * np.cos(psi))

    def radial_velocity_at_psi(self, psi):
        """dr/dt as a function of the rescaled angle psi."""
        return (self.e / self.Cprime) * np.sin(psi)

    def theta_of_psi(self, psi):
        return self.theta_peri + np.asarray(psi, dtype=float) / self.gamma


def normalize(alpha: float, beta_raw: float, L_raw: float, h_raw: float) -> NormalizedSystem:
    """Rescale (alpha, beta, L, h) so the Keplerian coefficient and energy are 1.

    Space is scaled by lam = alpha/h and time by tau = alpha/h**1.5, which
    sends alpha -> 1 and h -> 1; the wall distance becomes L*h/alpha (equal
    to 1 exactly when alpha = L*h) and beta becomes beta*h/alpha**2, which
    reduces to beta/(L**2 h) in that case.  The returned rescale factors
    invert the map (see NormalizedSystem.original).
    """
    if not (alpha > 0.0):
        raise DomainError(f"alpha must be positive, got {alpha}")
    if not (L_raw > 0.0):
        raise DomainError(f"L must be positive, got {L_raw}")
    if not (h_raw > 0.0):
        raise DomainError(f"h must be positive, got {h_raw}")
    if not (beta_raw >= 0.0):
        raise DomainError(f"beta must be nonnegative, got {beta_raw}")
    lam = alpha / h_raw
    tau = alpha / h_raw**1.5
    params = Params(h=1.0, L=L_raw * h_raw / alpha, beta=beta_raw * h_raw / alpha**2)
    return NormalizedSystem(params=params, length_scale=lam, time_scale=tau)


def potential(z, p: Params) -> float:
    """V(z) = -1/|z| - beta/|z|**2."""
    z = np.asarray(z, dtype=float)
    r = np.linalg.norm(z, axis=-1)
    if np.any(r == 0.0):
        raise SingularityError("potential evaluated at the centre")
    return -1.0 / r - p.beta / r**2


def grad_potential(z, p: Params) -> np.ndarray:
    """Gradient of the potential: z*(1/|z|**3 + 2*beta/|z|**4), pointing away
    from the centre with magnitude 1/|z|**2 + 2*beta/|z|**3.

    The equation of motion is z'' = -grad_potential(z), i.e. attraction.
    """
    z = np.asarray(z, dtype=float)
    r = np.linalg.norm(z, axis=-1, keepdims=True)
    if np.any(r == 0.0):
        raise SingularityError("gradient evaluated at the centre")
    return z * (1.0 / r**3 + 2.0 * p.beta / r**4)


def energy(s: State, p: Params) -> float:
    """Total energy |v|**2/2 + V(pos)."""
    return 0.5 * float(s.vel @ s.vel) + float(potential(s.pos, p))


def angular_momentum(s: State) -> float:
    """Signed angular momentum C = x*vy - y*vx."""
    return float(s.pos[0] * s.vel[1] - s.pos[1] * s.vel[0])


def elements_from_momentum(C: float, p: Params, theta_peri: float = 0.0) -> OrbitElements:
    """Conic elements determined by (h, beta, C) with a prescribed pericentre angle."""
    c2 = C * C - 2.0 * p.beta
    if c2 <= 0.0:
        raise CollisionalOrbitError(
            f"C^2 = {C*C:.6g} <= 2*beta = {2*p.beta:.6g}: collisional motion"
        )
    cp = math.sqrt(c2)
    e = math.sqrt(1.0 + 2.0 * p.h * c2)
    # positive root of h*r^2 + r - c2/2 = 0
    r_min = (-1.0 + math.sqrt(1.0 + 2.0 * c2 * p.h)) / (2.0 * p.h)
    return OrbitElements(
        C=float(C),
        Cprime=cp,
        e=e,
        r_min=r_min,
        gamma=cp / C,
        theta_peri=float(theta_peri),
        direction=1 if C > 0 else -1,
    )


def orbit_elements(s: State, p: Params, rtol: float = ENERGY_RTOL) -> OrbitElements:
    """Conic elements of the ballistic arc through state s.

    The state's energy must match p.h to relative tolerance ``rtol`` and its
    angular momentum must satisfy C**2 > 2*beta.  theta_peri is placed so the
    radius function reproduces |pos| at the state's polar angle.
    """
    E = energy(s, p)
    if abs(E - p.h) > rtol * max(1.0, abs(p.h)):
        raise DomainError(f"state energy {E!r} does not match h = {p.h!r}")
    C = angular_momentum(s)
    el = elements_from_momentum(C, p)
    r = float(np.linalg.norm(s.pos))
    rdot = float(s.pos @ s.vel) / r
    # psi from sin(psi) = C'*rdot/e, cos(psi) = (C'^2/r - 1)/e (exact identity)
    psi = math.atan2(el.Cprime * rdot, el.Cprime**2 / r - 1.0)
    theta = math.atan2(s.pos[1], s.pos[0])
    return OrbitElements(
        C=el.C,
        Cprime=el.Cprime,
        e=el.e,
        r_min=el.r_min,
        gamma=el.gamma,
        theta_peri=theta - psi / el.gamma,
        direction=el.direction,
    )


def kepler_sweep_angle(h: float, Cprime: float) -> float:
    """Total polar angle from pericentre to infinity of a Keplerian hyperbola.

    Equals pi/2 + arcsin(1/e) with e = sqrt(1 + 2*h*C'**2); always in
    (pi/2, pi) for h, C' > 0.
    """
    if not (h > 0.0):
        raise DomainError(f"h must be positive, got {h}")
    if not (Cprime > 0.0):
        raise DomainError(f"Cprime must be positive, got {Cprime}")
    e = math.sqrt(1.0 + 2.0 * h * Cprime * Cprime)
    return 0.5 * math.pi + math.asin(1.0 / e)


def max_sweep_angle(h: float, beta: float, C: float) -> float:
    """Total polar angle swept from pericentre to infinity.

    Scaling form (|C|/C') * kepler_sweep_angle(h, C') with C' = sqrt(C**2 -
    2*beta); agrees with direct quadrature of the defining radial integral.
    """
    if not (h > 0.0):
        raise DomainError(f"h must be positive, got {h}")
    c2 = C * C - 2.0 * beta
    if c2 <= 0.0:
        raise CollisionalOrbitError(
            f"C^2 = {C*C:.6g} <= 2*beta = {2*beta:.6g}: collisional motion"
        )
    cp = math.sqrt(c2)
    return (abs(C) / cp) * kepler_sweep_angle(h, cp)


def travel_time(r1: float, elems: OrbitElements, p: Params) -> float:
    """Time of radial travel from pericentre to radius r1 >= r_min.

    Closed form of (1/sqrt(2)) * integral of r dr / sqrt(h r^2 + r - A) with
    A = (C^2 - 2 beta)/2 = C'^2/2:

        T = sqrt(h r1^2 + r1 - A)/(sqrt(2) h)
            - arccosh((2 h r1 + 1)/sqrt(2 h C'^2 + 1)) / (2 sqrt(2) h^1.5)
    """
    h = p.h
    A = 0.5 * elems.Cprime**2
    if r1 < elems.r_min:
        if r1 >= elems.r_min * (1.0 - 1e-12):
            r1 = elems.r_min
        else:
            raise DomainError(f"r1 = {r1!r} below pericentre radius {elems.r_min!r}")
    q = h * r1 * r1 + r1 - A
    if q < 0.0:  # roundoff at the pericentre itself
        q = 0.0
    arg = (2.0 * h * r1 + 1.0) / math.sqrt(2.0 * h * elems.Cprime**2 + 1.0)
    if arg < 1.0:
        arg = 1.0
    return math.sqrt(q) / (math.sqrt(2.0) * h) - math.acosh(arg) / (
        2.0 * math.sqrt(2.0) * h * math.sqrt(h)
    )


def tangency_momentum(phi: float, p: Params) -> float:
    """Squared angular momentum of an orbit launched tangent to the wall.

    phi is the angle between the launch position vector and the positive
    wall direction; C^2 = 2 h L^2 + 2 L sin(phi) + 2 beta sin(phi)^2.
    """
    if not (0.0 < phi < math.pi):
        raise DomainError(f"phi must lie in (0, pi), got {phi}")
    s = math.sin(phi)
    return 2.0 * p.h * p.L**2 + 2.0 * p.L * s + 2.0 * p.beta * s * s


def momentum_range_K(p: Params) -> Interval:
    """Positive-branch compact interval containing |C| of all wall-tangent
    orbits with beta <= L^2 h: [sqrt(2 L^2 h), sqrt(4 L^2 h + 2 L)]."""
    return Interval(
        math.sqrt(2.0 * p.L**2 * p.h),
        math.sqrt(4.0 * p.L**2 * p.h + 2.0 * p.L),
    )
