"""Fixed-end arcs with prescribed winding number via a product action functional.

Paths live in log-polar coordinates (rho = log r, theta = lifted polar
angle).  The chart excludes the attracting centre by construction, and the
winding constraint becomes linear: for endpoints z0, z1 and winding target
k != 0, the closed curve obtained by appending the straight wall segment
from z1 back to z0 turns k times around the origin exactly when

    theta_N - theta_0 = 2*pi*k - closing(z1 -> z0),

where closing is the (principal) angle swept along that segment.  Both
endpoints are pinned in the chart, so the winding number of every iterate
is structural rather than checked a posteriori.

The discretized functional uses a uniform s-grid on [0, 1] with trapezoid
weights for the node factors and chord differences for the derivative:

    K = N * sum_i (drho_i^2 + dtheta_i^2) * E_i,   E_i = avg of exp(2*rho)
    P = (1/N) * sum_i w_i,                         w_i = avg of h - V
    M = K * P / 2,   L = sum_i sqrt((drho_i^2 + dtheta_i^2) * E_i * w_i)

which satisfies the discrete Cauchy-Schwarz inequality L^2 <= 2*M exactly,
with equality iff the per-segment speed is proportional to sqrt(h - V).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import minimize as _scipy_minimize

from .core import Params, potential
from .errors import DomainError, SolverError

#: one-sided five-point derivative stencil at a boundary node, O(step^4)
_EDGE_STENCIL = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def closing_angle(z_from, z_to) -> float:
    """Lifted-angle change of the position vector along the straight segment
    z_from -> z_to.  Lies in (-pi, pi) whenever the segment avoids the origin."""
    z_from = np.asarray(z_from, dtype=float)
    z_to = np.asarray(z_to, dtype=float)
    cross = z_from[0] * z_to[1] - z_from[1] * z_to[0]
    dot = z_from[0] * z_to[0] + z_from[1] * z_to[1]
    if cross == 0.0 and dot <= 0.0:
        raise DomainError("segment passes through the origin")
    return math.atan2(cross, dot)


def chart_angles(z0, z1, k: int) -> tuple[float, float]:
    """Endpoint lifted angles (theta_0, theta_N) realizing winding k."""
    z0 = np.asarray(z0, dtype=float)
    z1 = np.asarray(z1, dtype=float)
    theta0 = math.atan2(z0[1], z0[0])
    closing = closing_angle(z1, z0)
    return theta0, theta0 + 2.0 * math.pi * k - closing


@dataclass(frozen=True, eq=False)
class PolarPath:
    """Discretized curve in log-polar coordinates with pinned endpoints.

    ``rho`` and ``theta`` have length N+1; ``theta`` is lifted (continuous).
    The endpoints must match ``z0``/``z1`` and the total theta increment must
    equal the winding target for ``k``.
    """

    rho: np.ndarray
    theta: np.ndarray
    z0: np.ndarray
    z1: np.ndarray
    k: int

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        theta = np.asarray(self.theta, dtype=float)
        z0 = np.asarray(self.z0, dtype=float)
        z1 = np.asarray(self.z1, dtype=float)
        if self.k == 0:
            raise DomainError("winding target k must be nonzero")
        if rho.shape != theta.shape or rho.ndim != 1 or rho.size < 2:
            raise DomainError("rho/theta must be 1-d arrays of equal length >= 2")
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(theta))):
            raise DomainError("path nodes must be finite")
        scale = max(1.0, float(np.linalg.norm(z0)), float(np.linalg.norm(z1)))
        for name, node, z in (("z0", 0, z0), ("z1", -1, z1)):
            cart = math.exp(rho[node]) * np.array(
                [math.cos(theta[node]), math.sin(theta[node])]
            )
            if np.max(np.abs(cart - z)) > 1e-12 * scale:
                raise DomainError(f"path endpoint does not match {name}")
        _, theta_n = chart_angles(z0, z1, self.k)
        if abs((theta[-1] - theta[0]) - (theta_n - math.atan2(z0[1], z0[0]))) > 1e-9:
            raise DomainError("total theta increment does not match the winding target")
        for arr in (rho, theta, z0, z1):
            arr.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "z0", z0)
        object.__setattr__(self, "z1", z1)

    @property
    def n_segments(self) -> int:
        return self.rho.size - 1

    def cartesian(self) -> np.ndarray:
        r = np.exp(self.rho)
        return np.column_stack([r * np.cos(self.theta), r * np.sin(self.theta)])

    def with_nodes(self, rho, theta) -> "PolarPath":
        return PolarPath(rho=np.asarray(rho, float), theta=np.asarray(theta, float),
                         z0=self.z0, z1=self.z1, k=self.k)

    def resample(self, n_segments: int) -> "PolarPath":
        """Linear reinterpolation of (rho, theta) onto a new uniform s-grid."""
        s_old = np.linspace(0.0, 1.0, self.rho.size)
        s_new = np.linspace(0.0, 1.0, n_segments + 1)
        return self.with_nodes(
            np.interp(s_new, s_old, self.rho), np.interp(s_new, s_old, self.theta)
        )

    @classmethod
    def spiral(cls, z0, z1, k: int, n_segments: int) -> "PolarPath":
        """Logarithmic-spiral seed interpolating the endpoints with winding k."""
        z0 = np.asarray(z0, dtype=float)
        z1 = np.asarray(z1, dtype=float)
        theta0, theta_n = chart_angles(z0, z1, k)
        rho0 = math.log(float(np.linalg.norm(z0)))
        rho1 = math.log(float(np.linalg.norm(z1)))
        s = np.linspace(0.0, 1.0, n_segments + 1)
        return cls(rho=rho0 + s * (rho1 - rho0), theta=theta0 + s * (theta_n - theta0),
                   z0=z0, z1=z1, k=k)


def _terms(rho: np.ndarray, theta: np.ndarray, p: Params):
    """Per-segment quantities of the discretization."""
    ex2 = np.exp(2.0 * rho)
    pnode = p.h + np.exp(-rho) + p.beta * np.exp(-2.0 * rho)
    drho = np.diff(rho)
    dtheta = np.diff(theta)
    d = drho * drho + dtheta * dtheta
    E = 0.5 * (ex2[:-1] + ex2[1:])
    w = 0.5 * (pnode[:-1] + pnode[1:])
    return ex2, pnode, drho, dtheta, d, E, w


def maupertuis(path: PolarPath, p: Params) -> float:
    """Discretized product functional M = (1/2) * K * P (see module docstring)."""
    n = path.n_segments
    _, _, _, _, d, E, w = _terms(path.rho, path.theta, p)
    K = n * float(d @ E)
    P = float(np.sum(w)) / n
    return 0.5 * K * P


def jacobi_length(path: PolarPath, p: Params) -> float:
    """Discretized length in the metric (h - V) * Euclidean; positive and
    reparametrization-invariant up to discretization error."""
    _, _, _, _, d, E, w = _terms(path.rho, path.theta, p)
    return float(np.sum(np.sqrt(d * E * w)))


def _kinetic_potential_grads(rho, theta, p: Params):
    """K, P and their gradients with respect to every node coordinate."""
    n = rho.size - 1
    ex2, pnode, drho, dtheta, d, E, w = _terms(rho, theta, p)
    K = n * float(d @ E)
    P = float(np.sum(w)) / n

    def seg_left(a):  # a[j-1] with zero at j = 0
        return np.concatenate([[0.0], a])

    def seg_right(a):  # a[j] with zero at j = n
        return np.concatenate([a, [0.0]])

    gK_rho = n * (
        2.0 * (seg_left(drho * E) - seg_right(drho * E))
        + ex2 * (seg_left(d) + seg_right(d))
    )
    gK_theta = 2.0 * n * (seg_left(dtheta * E) - seg_right(dtheta * E))
    pprime = -np.exp(-rho) - 2.0 * p.beta * np.exp(-2.0 * rho)
    weights = np.full(rho.size, 1.0)
    weights[0] = weights[-1] = 0.5
    gP_rho = weights * pprime / n
    return K, P, gK_rho, gK_theta, gP_rho


def maupertuis_grad(path: PolarPath, p: Params) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of the discretized M with respect to all node
    coordinates; returns (d/d rho, d/d theta) arrays of length N+1."""
    K, P, gK_rho, gK_theta, gP_rho = _kinetic_potential_grads(path.rho, path.theta, p)
    g_rho = 0.5 * (gK_rho * P + K * gP_rho)
    g_theta = 0.5 * gK_theta * P
    return g_rho, g_theta


def winding_number(curve) -> int:
    """Winding number about the origin of a curve closed along the straight
    segment from its last point back to its first.

    The per-segment turn of the position vector must stay below pi, i.e. no
    vertex at the origin and no segment crossing it.
    """
    pts = np.asarray(curve, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise DomainError("curve must be an ordered list of at least two 2-vectors")
    if np.any(np.all(pts == 0.0, axis=1)):
        raise DomainError("curve has a vertex at the origin")
    a, b = pts[:-1], pts[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = a[:, 0] * b[:, 0] + a[:, 1] * b[:, 1]
    turns = np.arctan2(cross, dot)
    if np.any(np.abs(turns) >= math.pi - 1e-9):
        raise DomainError("a curve segment crosses the origin")
    total = float(np.sum(turns)) + closing_angle(pts[-1], pts[0])
    return round(total / (2.0 * math.pi))


def pericentre_lower_bound(jacobi_len: float, p: Params) -> float:
    """Strong-force collision barrier: min |u| > L * exp(-L(u)/sqrt(beta))."""
    if p.beta <= 0.0:
        raise DomainError("the pericentre bound is void for beta = 0")
    return p.L * math.exp(-jacobi_len / math.sqrt(p.beta))


def equal_speed_reparam(path: PolarPath, p: Params, *, tol: float = 1e-13,
                        max_iter: int = 100) -> PolarPath:
    """Reparametrize a path so that |u'|^2 is proportional to h - V(u).

    Nodes are redistributed along the fixed chart polyline (zero-length
    segments removed first) by iterated equidistribution of the density
    |du| / sqrt(h - V); the geometric image is unchanged and the Jacobi
    length is preserved up to discretization error, while M drops to L^2/2.
    """
    rho = np.asarray(path.rho, float)
    theta = np.asarray(path.theta, float)
    keep = np.concatenate(
        [[True], (np.abs(np.diff(rho)) > 1e-15) | (np.abs(np.diff(theta)) > 1e-15)]
    )
    rho, theta = rho[keep], theta[keep]
    if rho.size < 2:
        raise DomainError("degenerate path: all nodes coincide")

    # arclength parametrization of the cleaned chart polyline
    chord = np.hypot(np.diff(rho), np.diff(theta))
    sigma_knots = np.concatenate([[0.0], np.cumsum(chord)])
    n = path.n_segments
    sigma = np.linspace(0.0, sigma_knots[-1], n + 1)

    for _ in range(max_iter):
        r = np.interp(sigma, sigma_knots, rho)
        t = np.interp(sigma, sigma_knots, theta)
        _, _, _, _, d, E, w = _terms(r, t, p)
        mu = np.sqrt(d * E / w)
        total = float(np.sum(mu))
        if total == 0.0:
            raise DomainError("degenerate path: zero length")
        if float(np.max(np.abs(mu * (n / total) - 1.0))) <= tol:
            break
        cum = np.concatenate([[0.0], np.cumsum(mu)])
        levels = np.linspace(0.0, cum[-1], n + 1)
        sigma = np.interp(levels, cum, sigma)
        sigma[0], sigma[-1] = 0.0, sigma_knots[-1]

    return path.with_nodes(np.interp(sigma, sigma_knots, rho),
                           np.interp(sigma, sigma_knots, theta))


@dataclass(frozen=True)
class ArcOptions:
    """Solver options for minimize_arc."""

    n_nodes: int = 1024
    gtol: float = 1e-9
    max_iter: int = 10_000
    seed: PolarPath | None = None
    n_samples: int | None = None  # defaults to every node


@dataclass(frozen=True, eq=False)
class MinArc:
    """A minimizing arc together with its fixed-energy time parametrization.

    ``omega`` rescales the unit-interval parameter to physical time,
    z(t) = u(omega * t); flight time is 1/omega.  ``start_dir``/``end_dir``
    are unit velocity directions at the endpoints.
    """

    path: PolarPath
    M_value: float
    L_value: float
    omega: float
    solution: list = field(repr=False)
    start_dir: np.ndarray
    end_dir: np.ndarray
    info: dict = field(repr=False, default_factory=dict)

    @property
    def flight_time(self) -> float:
        return 1.0 / self.omega


def _chart_velocity(path: PolarPath) -> np.ndarray:
    """du/ds at the nodes: central differences inside, one-sided 5-point
    stencils at the endpoints, mapped to Cartesian components."""
    rho, theta = path.rho, path.theta
    n = path.n_segments
    drho = np.empty(n + 1)
    dth = np.empty(n + 1)
    drho[1:-1] = 0.5 * n * (rho[2:] - rho[:-2])
    dth[1:-1] = 0.5 * n * (theta[2:] - theta[:-2])
    drho[0] = n * float(_EDGE_STENCIL @ rho[:5])
    dth[0] = n * float(_EDGE_STENCIL @ theta[:5])
    drho[-1] = -n * float(_EDGE_STENCIL @ rho[-1:-6:-1])
    dth[-1] = -n * float(_EDGE_STENCIL @ theta[-1:-6:-1])
    r = np.exp(rho)
    ct, st = np.cos(theta), np.sin(theta)
    vx = r * (drho * ct - dth * st)
    vy = r * (drho * st + dth * ct)
    return np.column_stack([vx, vy])


def _build_min_arc(path: PolarPath, p: Params, info: dict,
                   n_samples: int | None = None) -> MinArc:
    from .propagator import ArcSample  # local import to avoid a cycle at import time

    n = path.n_segments
    _, _, _, _, d, E, w = _terms(path.rho, path.theta, p)
    K = n * float(d @ E)
    P = float(np.sum(w)) / n
    M_val = 0.5 * K * P
    L_val = float(np.sum(np.sqrt(d * E * w)))
    # critical points of M reparametrize to fixed-energy solutions with
    # omega^2 = 2 * int(h - V) / int |u'|^2
    omega = math.sqrt(2.0 * P / K)

    cart = path.cartesian()
    udot = _chart_velocity(path)
    vel = omega * udot
    ts = np.linspace(0.0, 1.0, n + 1) / omega
    idx = np.arange(n + 1)
    if n_samples is not None and n_samples < n + 1:
        idx = np.unique(np.linspace(0, n, n_samples).round().astype(int))
    solution = [
        ArcSample(float(ts[i]), cart[i].copy(), vel[i].copy(), float(path.theta[i]))
        for i in idx
    ]
    start_dir = udot[0] / np.linalg.norm(udot[0])
    end_dir = udot[-1] / np.linalg.norm(udot[-1])
    return MinArc(path=path, M_value=M_val, L_value=L_val, omega=omega,
                  solution=solution, start_dir=start_dir, end_dir=end_dir, info=info)


def _objective_factory(rho0, theta0, rho1, theta1, n, p: Params):
    """fun/grad and Hessian-vector product over the interior node coordinates."""

    def unpack(x):
        rho = np.empty(n + 1)
        theta = np.empty(n + 1)
        rho[0], rho[-1] = rho0, rho1
        theta[0], theta[-1] = theta0, theta1
        m = n - 1
        rho[1:-1] = x[:m]
        theta[1:-1] = x[m:]
        return rho, theta

    def fun_grad(x):
        rho, theta = unpack(x)
        K, P, gK_rho, gK_theta, gP_rho = _kinetic_potential_grads(rho, theta, p)
        g_rho = 0.5 * (gK_rho * P + K * gP_rho)
        g_theta = 0.5 * gK_theta * P
        return 0.5 * K * P, np.concatenate([g_rho[1:-1], g_theta[1:-1]])

    def grad_parts(x):
        # interior gradients of K and P separately, for the rank-2 Hessian split
        rho, theta = unpack(x)
        _, _, gK_rho, gK_theta, gP_rho = _kinetic_potential_grads(rho, theta, p)
        gK = np.concatenate([gK_rho[1:-1], gK_theta[1:-1]])
        gP = np.concatenate([gP_rho[1:-1], np.zeros(n - 1)])
        return gK, gP

    def hessp(x, v):
        rho, theta = unpack(x)
        m = n - 1
        vr = np.zeros(n + 1)
        vt = np.zeros(n + 1)
        vr[1:-1] = v[:m]
        vt[1:-1] = v[m:]

        ex2, pnode, drho, dtheta, d, E, w = _terms(rho, theta, p)
        K = n * float(d @ E)
        P = float(np.sum(w)) / n
        dvr = np.diff(vr)
        dvt = np.diff(vt)
        # dE_i/d rho_i = e^{2 rho_i}: the 1/2 in E cancels the chain-rule 2
        Edot = ex2[:-1] * vr[:-1] + ex2[1:] * vr[1:]
        ddot = 2.0 * (drho * dvr + dtheta * dvt)

        def seg_left(a):
            return np.concatenate([[0.0], a])

        def seg_right(a):
            return np.concatenate([a, [0.0]])

        gK_rho = n * (2.0 * (seg_left(drho * E) - seg_right(drho * E))
                      + ex2 * (seg_left(d) + seg_right(d)))
        gK_theta = 2.0 * n * (seg_left(dtheta * E) - seg_right(dtheta * E))
        pprime = -np.exp(-rho) - 2.0 * p.beta * np.exp(-2.0 * rho)
        weights = np.full(n + 1, 1.0)
        weights[0] = weights[-1] = 0.5
        gP_rho = weights * pprime / n

        HK_rho = n * (
            2.0 * (seg_left(dvr * E + drho * Edot) - seg_right(dvr * E + drho * Edot))
            + ex2 * (seg_left(ddot) + seg_right(ddot))
            + 2.0 * ex2 * vr * (seg_left(d) + seg_right(d))
        )
        HK_theta = 2.0 * n * (
            seg_left(dvt * E + dtheta * Edot) - seg_right(dvt * E + dtheta * Edot)
        )
        p2 = np.exp(-rho) + 4.0 * p.beta * np.exp(-2.0 * rho)
        HP_rho = weights * p2 * vr / n

        gK_dot_v = float(gK_rho @ vr + gK_theta @ vt)
        gP_dot_v = float(gP_rho @ vr)
        h_rho = 0.5 * (HK_rho * P + gK_rho * gP_dot_v + gP_rho * gK_dot_v + K * HP_rho)
        h_theta = 0.5 * (HK_theta * P + gK_theta * gP_dot_v)
        return np.concatenate([h_rho[1:-1], h_theta[1:-1]])

    return unpack, fun_grad, hessp, grad_parts


def _interleave(v_sep: np.ndarray) -> np.ndarray:
    m = v_sep.size // 2
    out = np.empty_like(v_sep)
    out[0::2] = v_sep[:m]
    out[1::2] = v_sep[m:]
    return out


def _separate(v_int: np.ndarray) -> np.ndarray:
    m = v_int.size // 2
    out = np.empty_like(v_int)
    out[:m] = v_int[0::2]
    out[m:] = v_int[1::2]
    return out


_BANDWIDTH = 3  # node j couples to j +/- 1 only: interleaved index distance <= 3


def _probe_banded(apply_B, m: int) -> np.ndarray:
    """Assemble a symmetric banded operator by probing with comb vectors.

    ``apply_B`` acts on interleaved vectors and must have bandwidth
    _BANDWIDTH; combs of stride 2*_BANDWIDTH + 1 recover every entry.
    """
    stride = 2 * _BANDWIDTH + 1
    ab = np.zeros((stride, m))
    for c in range(min(stride, m)):
        comb = np.zeros(m)
        comb[c::stride] = 1.0
        col = apply_B(comb)
        idx = np.arange(c, m, stride)
        for off in range(-_BANDWIDTH, _BANDWIDTH + 1):
            rows = idx + off
            ok = (rows >= 0) & (rows < m)
            ab[_BANDWIDTH + off, idx[ok]] = col[rows[ok]]
    return ab


def _newton_minimize(fun_grad, hessp, grad_parts, x0, gtol, max_iter=80):
    """Damped Newton (Levenberg) with O(N) steps.

    The Hessian splits as a banded part plus the symmetric rank-2 outer
    product (gK gP^T + gP gK^T)/2; the banded part is probed from the
    Hessian-vector product and factored with solve_banded, the rank-2
    correction handled by the Woodbury identity.
    """
    x = x0.copy()
    f, g = fun_grad(x)
    m = x.size
    lam = 0.0
    n_eval = 1
    for it in range(max_iter):
        gnorm = float(np.max(np.abs(g))) if m else 0.0
        if gnorm <= gtol:
            return x, f, g, it, True
        gK, gP = grad_parts(x)

        def apply_B(v_int):
            v = _separate(v_int)
            hv = hessp(x, v) - 0.5 * (gK * float(gP @ v) + gP * float(gK @ v))
            return _interleave(hv)

        ab = _probe_banded(apply_B, m)
        scale = float(np.mean(np.abs(ab[_BANDWIDTH]))) or 1.0
        g_i = _interleave(g)
        U = np.column_stack([_interleave(gK), _interleave(gP)])
        C_inv = np.array([[0.0, 2.0], [2.0, 0.0]])
        accepted = False
        for _ in range(30):
            ab_l = ab.copy()
            ab_l[_BANDWIDTH] += lam * scale
            try:
                sols = solve_banded((_BANDWIDTH, _BANDWIDTH), ab_l,
                                    np.column_stack([-g_i, U]))
            except np.linalg.LinAlgError:
                lam = max(10.0 * lam, 1e-10)
                continue
            y_g, y_U = sols[:, 0], sols[:, 1:]
            M2 = C_inv + U.T @ y_U
            try:
                corr = y_U @ np.linalg.solve(M2, U.T @ y_g)
            except np.linalg.LinAlgError:
                lam = max(10.0 * lam, 1e-10)
                continue
            step = _separate(y_g - corr)
            slope = float(g @ step)
            if not np.isfinite(step).all() or slope >= 0.0:
                lam = max(10.0 * lam, 1e-10)
                continue
            alpha = 1.0
            for _bt in range(40):
                f_new, g_new = fun_grad(x + alpha * step)
                n_eval += 1
                if np.isfinite(f_new) and f_new <= f + 1e-4 * alpha * slope:
                    x = x + alpha * step
                    f, g = f_new, g_new
                    lam *= 0.25
                    accepted = True
                    break
                alpha *= 0.5
            if accepted:
                break
            lam = max(10.0 * lam, 1e-10)
        if not accepted:
            return x, f, g, it + 1, False
    return x, f, g, max_iter, float(np.max(np.abs(g))) <= gtol


def minimize_arc(z0, z1, k: int, p: Params, opts: ArcOptions | None = None) -> MinArc:
    """Minimize the discretized product functional over paths from z0 to z1
    with winding number k != 0.

    Returns the local minimizer reached from the logarithmic-spiral seed (or
    from ``opts.seed``).  The winding number is structural (both endpoint
    angles are pinned in the chart); the reparametrized solution solves the
    fixed-energy equations of motion up to discretization error.
    """
    opts = opts or ArcOptions()
    if k == 0 or int(k) != k:
        raise DomainError("winding target k must be a nonzero integer")
    k = int(k)
    z0 = np.asarray(z0, dtype=float)
    z1 = np.asarray(z1, dtype=float)
    n = opts.n_nodes
    if opts.seed is not None:
        seed = opts.seed
        if seed.k != k or np.max(np.abs(seed.z0 - z0)) > 0 or np.max(np.abs(seed.z1 - z1)) > 0:
            seed = _transplant_path(seed, z0, z1, k)
        if seed.n_segments != n:
            seed = seed.resample(n)
    else:
        seed = PolarPath.spiral(z0, z1, k, n)

    unpack, fun_grad, hessp, grad_parts = _objective_factory(
        seed.rho[0], seed.theta[0], seed.rho[-1], seed.theta[-1], n, p
    )
    x0 = np.concatenate([seed.rho[1:-1], seed.theta[1:-1]])

    tried = []
    x, f, g, n_it, ok = _newton_minimize(fun_grad, hessp, grad_parts, x0, opts.gtol)
    gnorm = float(np.max(np.abs(g)))
    tried.append(("newton", n_it, gnorm))
    if not ok:
        for method in ("trust-ncg", "l-bfgs-b"):
            if method == "trust-ncg":
                res = _scipy_minimize(
                    fun_grad, x, jac=True, hessp=hessp, method="trust-ncg",
                    options={"gtol": opts.gtol, "maxiter": opts.max_iter},
                )
            else:
                res = _scipy_minimize(
                    fun_grad, x, jac=True, method="L-BFGS-B",
                    options={"gtol": opts.gtol, "maxiter": opts.max_iter,
                             "maxfun": 10 * opts.max_iter, "ftol": 0.0},
                )
            x = res.x
            # polish whatever the fallback produced
            x, f, g, n_pol, ok = _newton_minimize(fun_grad, hessp, grad_parts, x, opts.gtol)
            gnorm = float(np.max(np.abs(g)))
            tried.append((method, res.nit, n_pol, gnorm))
            if ok:
                break
        else:
            raise SolverError(
                "arc minimization did not reach the gradient tolerance",
                diagnostics={"attempts": tried, "gtol": opts.gtol, "k": k,
                             "z0": z0.tolist(), "z1": z1.tolist()},
            )

    rho, theta = unpack(x)
    path = PolarPath(rho=rho, theta=theta, z0=z0, z1=z1, k=k)
    # report the equal-speed representative of the converged curve: same
    # geometric image, exact discrete Cauchy-Schwarz equality L^2 = 2M
    path = equal_speed_reparam(path, p)
    info = {"grad_inf_norm": gnorm, "attempts": tried, "n_nodes": n}
    return _build_min_arc(path, p, info, n_samples=opts.n_samples)


def _transplant_path(path: PolarPath, z0, z1, k: int) -> PolarPath:
    """Warm-start helper: carry a converged path to nearby endpoints by an
    affine shift of the chart coordinates."""
    theta0_new, theta_n_new = chart_angles(z0, z1, k)
    rho0_new = math.log(float(np.linalg.norm(np.asarray(z0, float))))
    rho1_new = math.log(float(np.linalg.norm(np.asarray(z1, float))))
    s = np.linspace(0.0, 1.0, path.rho.size)
    rho = path.rho + (1.0 - s) * (rho0_new - path.rho[0]) + s * (rho1_new - path.rho[-1])
    theta = path.theta + (1.0 - s) * (theta0_new - path.theta[0]) + s * (theta_n_new - path.theta[-1])
    return PolarPath(rho=rho, theta=theta, z0=np.asarray(z0, float),
                     z1=np.asarray(z1, float), k=k)
