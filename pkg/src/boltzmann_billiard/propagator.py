"""Ballistic arc propagation between wall contacts and the billiard map.

Arcs are propagated semi-analytically from the conic closed form (module
``core``); wall crossings are located by bracketing the sign of y + L on a
uniform grid in the true polar angle (step pi/720) and refining with a
bracketed root solve.  An adaptive Runge-Kutta integrator over the raw
equations of motion is provided as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import core
from .core import OrbitElements, Params, State
from .errors import DomainError, EscapeError, NearCollisionError

#: absolute tolerance (times max(1, L)) for "the state lies on the wall"
WALL_ATOL = 1e-8

#: grid step in polar angle used to bracket wall crossings
_THETA_STEP = math.pi / 720.0

#: wall-crossing refinement target: |y + L| <= _CROSSING_TOL * L
_CROSSING_TOL = 1e-12

_MAX_GRID_POINTS = 2_000_000


@dataclass(frozen=True, eq=False)
class ArcSample:
    """One trajectory sample: time, position, velocity, lifted polar angle."""

    t: float
    pos: np.ndarray
    vel: np.ndarray
    theta_lifted: float


@dataclass(frozen=True, eq=False)
class BallisticArc:
    """A wall-to-wall ballistic arc with its conic elements and winding number."""

    start: State
    end: State
    flight_time: float
    winding: int
    samples: list[ArcSample] = field(repr=False)
    elements: OrbitElements


def _check_on_wall(s: State, p: Params, what: str = "state"):
    if abs(s.pos[1] + p.L) > WALL_ATOL * max(1.0, p.L):
        raise DomainError(f"{what} not on the wall y = {-p.L}: y = {s.pos[1]!r}")


def _closing_angle(z_from, z_to) -> float:
    """Lifted-angle change of the position vector along the straight segment
    z_from -> z_to; in (-pi, pi) whenever the segment avoids the origin."""
    cross = z_from[0] * z_to[1] - z_from[1] * z_to[0]
    dot = z_from[0] * z_to[0] + z_from[1] * z_to[1]
    return math.atan2(cross, dot)


def _time_from_pericentre(psi: float, elems: OrbitElements, p: Params) -> float:
    """Signed time relative to the pericentre passage (psi = 0)."""
    r = float(elems.radius_at_psi(psi))
    return math.copysign(core.travel_time(r, elems, p), psi)


def _state_at_psi(psi: float, elems: OrbitElements, theta: float) -> tuple[np.ndarray, np.ndarray]:
    r = float(elems.radius_at_psi(psi))
    rdot = float(elems.radial_velocity_at_psi(psi))
    ct, st = math.cos(theta), math.sin(theta)
    pos = np.array([r * ct, r * st])
    vt = elems.C / r
    vel = np.array([rdot * ct - vt * st, rdot * st + vt * ct])
    return pos, vel


def propagate_to_wall(s: State, p: Params, n_samples: int = 256) -> BallisticArc:
    """Propagate from a wall state with upward (or tangent) velocity to the
    next downward crossing of y = -L.

    Raises CollisionalOrbitError when C**2 <= 2*beta and EscapeError when the
    orbit reaches its asymptote without returning to the wall.
    """
    _check_on_wall(s, p)
    if s.vel[1] < 0.0:
        raise DomainError("launch velocity must not point below the wall")
    elems = core.orbit_elements(s, p)
    gamma = elems.gamma
    r0 = float(np.linalg.norm(s.pos))
    rdot0 = float(s.pos @ s.vel) / r0
    psi0 = math.atan2(elems.Cprime * rdot0, elems.Cprime**2 / r0 - 1.0)
    theta0 = math.atan2(s.pos[1], s.pos[0])

    def theta_of(psi):
        return theta0 + (psi - psi0) / gamma

    def height(psi):
        # y + L, stable arbitrarily close to the asymptote
        return elems.radius_at_psi(psi) * np.sin(theta_of(psi)) + p.L

    # keep the last grid point at finite radius (~1e12 L)
    psi_inf = elems.psi_max
    eps_asym = max(elems.Cprime / (math.sqrt(2.0 * p.h) * 1e12 * p.L), 1e-15)
    psi_hi = psi_inf - eps_asym
    dpsi = abs(gamma) * _THETA_STEP

    # While r < L the wall is unreachable (|y| <= r), so the sub-L dip
    # [-psi_L, psi_L] needs no scanning.
    segments = []
    if elems.r_min < p.L:
        cos_psi_L = (elems.Cprime**2 / p.L - 1.0) / elems.e
        psi_L = math.acos(min(1.0, max(-1.0, cos_psi_L)))
        if psi0 < -psi_L:
            segments.append((psi0, -psi_L))
        lo2 = max(psi0, psi_L)
        if lo2 < psi_hi:
            segments.append((lo2, psi_hi))
    else:
        segments.append((psi0, psi_hi))

    psi_end = None
    for seg_lo, seg_hi in segments:
        extent = seg_hi - seg_lo
        if extent <= 0.0:
            continue
        n_pts = int(math.ceil(extent / dpsi)) + 1
        if n_pts > _MAX_GRID_POINTS:
            raise RuntimeError("wall-crossing scan exceeded the grid budget")
        grid = np.linspace(seg_lo, seg_hi, n_pts)
        g = height(grid)
        if seg_lo == psi0 and n_pts > 1 and g[1] <= 0.0:
            # the launch point sits on the wall and the arc re-descends within
            # one grid cell: bracket from a strictly-above point near psi0
            lo = grid[1]
            for _ in range(60):
                lo = psi0 + 0.5 * (lo - psi0)
                if height(lo) > 0.0:
                    break
            else:
                raise EscapeError("degenerate launch: no point above the wall")
            psi_end = brentq(height, lo, grid[1], xtol=1e-15, rtol=1e-15)
            break
        sign_change = np.nonzero((g[:-1] > 0.0) & (g[1:] <= 0.0))[0]
        if sign_change.size:
            i = int(sign_change[0])
            psi_end = brentq(height, grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)
            break
    if psi_end is None:
        raise EscapeError("orbit escapes to infinity without returning to the wall")

    theta_end = theta_of(psi_end)
    pos_end, vel_end = _state_at_psi(psi_end, elems, theta_end)
    if vel_end[1] >= -1e-12 * math.sqrt(float(vel_end @ vel_end)):
        raise EscapeError("tangential wall contact (excluded from the billiard map)")
    pos_end[1] = -p.L
    end = State(pos_end, vel_end)

    t_offset = _time_from_pericentre(psi0, elems, p)
    flight_time = _time_from_pericentre(psi_end, elems, p) - t_offset

    psis = np.linspace(psi0, psi_end, max(2, n_samples))
    samples = []
    for i, psi in enumerate(psis):
        th = theta_of(psi)
        if i == 0:
            pos, vel = np.array(s.pos), np.array(s.vel)
        elif i == len(psis) - 1:
            pos, vel = pos_end, vel_end
        else:
            pos, vel = _state_at_psi(psi, elems, th)
        t = _time_from_pericentre(psi, elems, p) - t_offset
        samples.append(ArcSample(t=float(t), pos=pos, vel=vel, theta_lifted=float(th)))

    dtheta_arc = (psi_end - psi0) / gamma
    closing = _closing_angle(pos_end, s.pos)
    winding = round((dtheta_arc + closing) / (2.0 * math.pi))

    return BallisticArc(
        start=s,
        end=end,
        flight_time=float(flight_time),
        winding=int(winding),
        samples=samples,
        elements=elems,
    )


def reflect(s: State) -> State:
    """Elastic reflection at the wall: (vx, vy) -> (vx, -vy).

    Requires incoming velocity (vy < 0); the wall-position check is done by
    the caller against its Params (see billiard_map).
    """
    if s.vel[1] >= 0.0:
        raise DomainError("reflect requires an incoming state (vy < 0)")
    return State(np.array(s.pos), np.array([s.vel[0], -s.vel[1]]))


def billiard_map(s: State, p: Params, n_samples: int = 256) -> tuple[State, BallisticArc]:
    """One step of the first-return map: propagate to the wall and reflect."""
    arc = propagate_to_wall(s, p, n_samples=n_samples)
    _check_on_wall(arc.end, p, "arc end")
    return reflect(arc.end), arc


def _lift_angles(positions: np.ndarray) -> np.ndarray:
    raw = np.arctan2(positions[:, 1], positions[:, 0])
    steps = np.diff(raw)
    steps = (steps + math.pi) % (2.0 * math.pi) - math.pi
    return np.concatenate([[raw[0]], raw[0] + np.cumsum(steps)])


def integrate_ode(
    s: State,
    p: Params,
    t_end: float,
    tol: float = 1e-10,
    *,
    stop_at_wall: bool = False,
    r_floor: float | None = None,
) -> list[ArcSample]:
    """Adaptive Runge-Kutta integration of z'' = -grad V(z).

    Independent of the conic closed form; used as a cross-validation oracle.
    Supports terminal event detection for downward y = -L crossings
    (``stop_at_wall``) and raises NearCollisionError if the radius falls
    below ``r_floor`` (default 1e-6 * L).
    """
    if not (tol > 0.0):
        raise DomainError(f"tolerance must be positive, got {tol}")
    if t_end < 0.0:
        raise DomainError("t_end must be nonnegative")
    th0 = math.atan2(s.pos[1], s.pos[0])
    if t_end == 0.0:
        return [ArcSample(0.0, np.array(s.pos), np.array(s.vel), th0)]
    if r_floor is None:
        r_floor = 1e-6 * p.L

    beta = p.beta

    def rhs(t, y):
        r2 = y[0] * y[0] + y[1] * y[1]
        r = math.sqrt(r2)
        f = 1.0 / (r2 * r) + 2.0 * beta / (r2 * r2)
        return [y[2], y[3], -y[0] * f, -y[1] * f]

    def wall(t, y):
        return y[1] + p.L

    wall.direction = -1.0
    wall.terminal = stop_at_wall

    def collision(t, y):
        return math.hypot(y[0], y[1]) - r_floor

    collision.direction = -1.0
    collision.terminal = True

    y0 = [s.pos[0], s.pos[1], s.vel[0], s.vel[1]]
    sol = solve_ivp(
        rhs,
        (0.0, t_end),
        y0,
        method="DOP853",
        rtol=tol,
        atol=tol * 1e-3,
        events=[wall, collision],
        dense_output=True,
    )
    t_stop = sol.t[-1]
    collided = sol.t_events[1].size > 0
    if stop_at_wall and sol.t_events[0].size > 0:
        t_stop = float(sol.t_events[0][0])
        collided = collided and sol.t_events[1][0] < t_stop

    ts = np.array([t for t in sol.t if t <= t_stop])
    if ts[-1] != t_stop:
        ts = np.append(ts, t_stop)

    # refine sampling until consecutive polar-angle steps stay small enough
    # to lift the angle unambiguously
    for _ in range(24):
        ys = sol.sol(ts)
        ang = np.arctan2(ys[1], ys[0])
        jumps = np.abs((np.diff(ang) + math.pi) % (2.0 * math.pi) - math.pi)
        bad = np.nonzero(jumps > math.pi / 4.0)[0]
        if bad.size == 0:
            break
        ts = np.sort(np.concatenate([ts, 0.5 * (ts[bad] + ts[bad + 1])]))

    ys = sol.sol(ts)
    positions = ys[:2].T
    velocities = ys[2:].T
    lifted = _lift_angles(positions)
    samples = [
        ArcSample(float(t), positions[i].copy(), velocities[i].copy(), float(lifted[i]))
        for i, t in enumerate(ts)
    ]
    if collided:
        raise NearCollisionError(
            f"integration stalled within r = {r_floor!r} of the centre",
            last_sample=samples[-1],
        )
    return samples
