"""Primal and dual geodesics, gradient flows, and the right-angle criterion.

Primal geodesics trace Euclidean straight lines on the simplex; dual
geodesics trace straight lines in dual Euclidean coordinates.  In
exponential coordinates the primal geodesic from q to r is

    theta_k(t) = log((1 - h) e^{theta^q_k} + h e^{theta^r_k}),

where the reparameterization h(t) solves h'' = 2 (h')^2 d/dh f(theta(h)),
equivalently h'(t) proportional to exp(2 f(theta(t))).  That first-order
reduction separates, so h is computed here by quadrature of
exp(-2 f(theta(h))) and monotone inversion rather than by shooting; the
dual geodesic is handled identically with f* and reciprocal coordinates.

Gradient flows of T(r | .) and T(. | p) retrace the same geodesics up to a
time change, which yields inverse exponential maps for free.  The sign of
T(q|p) + T(r|q) - T(r|p) is the sign of the Riemannian angle defect at q
between the two geodesics; `pythagorean_sign` evaluates the gap, the
actual metric inner product, and the equivalent algebraic sign quantity
through three independent code paths.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .divergence import c_transform, f_value, inverse_dual_coord, l_divergence
from .generators import Generator, dual_coord, portfolio_theta
from .geometry import (
    metric_dual,
    metric_primal,
    pi_quantities,
    riem_gradient_dual,
    riem_gradient_primal,
)
from .simplex import (
    coord_array,
    from_primal_many,
    point_array,
    psi,
    psi_many,
    to_primal,
)

__all__ = [
    "Curve",
    "PythResult",
    "RegionSample",
    "DualRangeError",
    "GeodesicBlowupError",
    "primal_geodesic",
    "dual_geodesic",
    "integrate_geodesic",
    "geodesic_residual",
    "primal_flow",
    "dual_flow",
    "inverse_exp",
    "pythagorean_sign",
    "region_sample",
    "region_gap",
    "point_segment_distance",
    "polyline_hausdorff",
]

DEFAULT_GRID = 129
_DENSE = 4097


class DualRangeError(RuntimeError):
    """A dual-coordinate curve left the range of the dual coordinate system."""

    def __init__(self, msg, last_valid_t=None):
        super().__init__(msg)
        self.last_valid_t = last_valid_t


class GeodesicBlowupError(RuntimeError):
    """Numerical blow-up during integration; carries the last valid time."""

    def __init__(self, msg, last_valid_t=None):
        super().__init__(msg)
        self.last_valid_t = last_valid_t


@dataclass
class Curve:
    """A discretized path in a declared coordinate system."""

    times: np.ndarray
    points: np.ndarray
    coord: str
    velocities: np.ndarray | None = None
    diagnostic: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.points = np.asarray(self.points, dtype=float)
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("curve times must be strictly increasing")
        if self.points.shape[0] != self.times.size:
            raise ValueError("one point per time stamp required")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("curve points must be finite")
        if self.velocities is not None:
            self.velocities = np.asarray(self.velocities, dtype=float)
            if self.velocities.shape != self.points.shape:
                raise ValueError("velocities must match points in shape")

    def __len__(self):
        return self.times.size

    def spline(self) -> CubicSpline:
        return CubicSpline(self.times, self.points, axis=0)

    def euclidean_trace(self) -> np.ndarray:
        """Trace on the simplex: p(theta) for primal curves, p(-phi) for dual."""
        if self.coord == "primal":
            return from_primal_many(self.points)
        if self.coord == "dual":
            return from_primal_many(-self.points)
        if self.coord == "euclidean":
            return self.points
        raise ValueError(f"no Euclidean trace for coord {self.coord!r}")

    def to_csv(self, path) -> None:
        d = self.points.shape[1]
        label = {"primal": "theta", "dual": "phi", "euclidean": "p"}.get(self.coord, "x")
        header = ",".join(["t"] + [f"{label}_{i + 1}" for i in range(d)])
        data = np.column_stack([self.times, self.points])
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def _grid(grid) -> np.ndarray:
    if grid is None:
        return np.linspace(0.0, 1.0, DEFAULT_GRID)
    if np.isscalar(grid):
        return np.linspace(0.0, 1.0, int(grid))
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or np.any(np.diff(g) <= 0) or g[0] < 0 or g[-1] > 1:
        raise ValueError("grid must be increasing inside [0, 1]")
    return g


def _log_mix(s: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """log((1-s) e^a + s e^b) elementwise over a grid s, overflow-safe."""
    s = s[:, None]
    out = np.empty((s.size, a.size))
    interior = (s[:, 0] > 0) & (s[:, 0] < 1)
    out[s[:, 0] <= 0] = a
    out[s[:, 0] >= 1] = b
    si = s[interior]
    out[interior] = np.logaddexp(np.log1p(-si) + a, np.log(si) + b)
    return out


# 5-point Gauss-Legendre rule on [-1, 1]
_GL_X = np.array([-0.906179845938664, -0.5384693101056831, 0.0,
                  0.5384693101056831, 0.906179845938664])
_GL_W = np.array([0.23692688505618908, 0.47862867049936647, 0.5688888888888889,
                  0.47862867049936647, 0.23692688505618908])


def _gauss_segment(w_func, a: float, b: float) -> float:
    mid, half = (a + b) / 2, (b - a) / 2
    return half * float(_GL_W @ np.array([w_func(mid + half * x) for x in _GL_X]))


def _gl_nodes(s_dense: np.ndarray):
    """All Gauss-Legendre nodes of the dense intervals, flattened in order."""
    mid = (s_dense[:-1] + s_dense[1:]) / 2
    half = (s_dense[1:] - s_dense[:-1]) / 2
    return (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel(), half


def _reparam_from_weight(logw_at_nodes: np.ndarray, s_dense: np.ndarray,
                         t_out: np.ndarray, logw_func):
    """Invert t(h) = int_0^h w / int_0^1 w with w = exp(logw - shift).

    ``logw_at_nodes`` holds the log weight at the Gauss-Legendre nodes of
    the dense intervals, so the anchor table is a per-interval 5-point
    Gauss rule (accurate to rounding even for stiff weights).  Each
    requested h is then polished by Newton steps anchored at the nearest
    dense node; pointwise accuracy near machine precision keeps
    spline-based residual oracles meaningful.
    """
    shift = logw_at_nodes.max()
    _, half = _gl_nodes(s_dense)
    w_nodes = np.exp(logw_at_nodes - shift).reshape(-1, _GL_X.size)
    cum = np.concatenate([[0.0], np.cumsum(half * (w_nodes @ _GL_W))])
    W = cum[-1]
    t_of_s = cum / W
    h = np.interp(t_out, t_of_s, s_dense)
    w_func = lambda x: np.exp(logw_func(x) - shift)
    for i, t_star in enumerate(t_out):
        if t_star <= 0.0 or t_star >= 1.0:
            h[i] = min(max(t_star, 0.0), 1.0)
            continue
        j = min(np.searchsorted(t_of_s, t_star) - 1, s_dense.size - 2)
        j = max(j, 0)
        anchor_s, anchor_t = s_dense[j], cum[j]
        x = h[i]
        for _ in range(4):
            Fx = (anchor_t + _gauss_segment(w_func, anchor_s, x)) / W - t_star
            x = min(max(x - Fx / (w_func(x) / W), 1e-15), 1.0 - 1e-15)
            if abs(Fx) < 1e-15:
                break
        h[i] = x
    dh_dt = W / np.array([w_func(x) for x in h])
    h[t_out <= 0] = 0.0
    h[t_out >= 1] = 1.0
    return h, dh_dt


def primal_geodesic(gen: Generator, q, r, grid=None) -> Curve:
    """Geodesic of the primal connection from q to r on [0, 1].

    The Euclidean trace is the straight segment [q, r]; the affine
    parameterization comes from quadrature of exp(-2 f) along the segment.
    """
    t_out = _grid(grid)
    th_q = to_primal(q).theta
    th_r = to_primal(r).theta
    if np.allclose(th_q, th_r, atol=1e-14):
        pts = np.broadcast_to(th_q, (t_out.size, th_q.size)).copy()
        return Curve(t_out, pts, "primal", velocities=np.zeros_like(pts))
    s_dense = np.linspace(0.0, 1.0, _DENSE)
    nodes, _ = _gl_nodes(s_dense)
    theta_nodes = _log_mix(nodes, th_q, th_r)
    f_nodes = gen.log_gen_many(from_primal_many(theta_nodes)) + psi_many(theta_nodes)

    def logw(hval: float) -> float:
        if hval <= 0.0:
            th = th_q
        elif hval >= 1.0:
            th = th_r
        else:
            th = np.logaddexp(np.log1p(-hval) + th_q, np.log(hval) + th_r)
        return -2.0 * f_value(gen, th)

    h, dh_dt = _reparam_from_weight(-2.0 * f_nodes, s_dense, t_out, logw_func=logw)
    pts = _log_mix(h, th_q, th_r)
    # theta_dot_k = h'(t) (e^{theta^r_k} - e^{theta^q_k}) / A_k(h)
    B = np.exp(th_r) - np.exp(th_q)
    vel = dh_dt[:, None] * B[None, :] / np.exp(pts)
    return Curve(t_out, pts, "primal", velocities=vel)


def dual_geodesic(gen: Generator, q, p, grid=None, check_range: bool = True) -> Curve:
    """Geodesic of the dual connection from q to p on [0, 1].

    The dual Euclidean trace is the straight segment between the dual
    Euclidean images of q and p.  Along the way the curve must stay inside
    the range of the dual coordinate map; with ``check_range`` the Fenchel
    equality is re-verified through the conjugate minimization at every
    output node.
    """
    t_out = _grid(grid)
    ph_q = dual_coord(gen, to_primal(q).theta).phi
    ph_p = dual_coord(gen, to_primal(p).theta).phi
    if np.allclose(ph_q, ph_p, atol=1e-14):
        pts = np.broadcast_to(ph_q, (t_out.size, ph_q.size)).copy()
        return Curve(t_out, pts, "dual", velocities=np.zeros_like(pts))
    n_dense = _DENSE if gen.dual_map_inverse(ph_q) is not None else 1025
    s_dense = np.linspace(0.0, 1.0, n_dense)
    nodes, _ = _gl_nodes(s_dense)
    phi_nodes = -_log_mix(nodes, -ph_q, -ph_p)
    # f*(phi) = psi(theta - phi) - f(theta) at theta = inverse dual image,
    # marched with warm starts along the curve.
    fstar = np.empty(nodes.size)
    th = None
    for j, ph in enumerate(phi_nodes):
        th = inverse_dual_coord(gen, ph, x0=th)
        fstar[j] = psi(th - ph) - f_value(gen, th)
    hint = {"theta": None}

    def logw(hval: float) -> float:
        if hval <= 0.0:
            ph = ph_q
        elif hval >= 1.0:
            ph = ph_p
        else:
            ph = -np.logaddexp(np.log1p(-hval) - ph_q, np.log(hval) - ph_p)
        th_here = inverse_dual_coord(gen, ph, x0=hint["theta"])
        hint["theta"] = th_here
        return -2.0 * (psi(th_here - ph) - f_value(gen, th_here))

    h, dh_dt = _reparam_from_weight(-2.0 * fstar, s_dense, t_out, logw_func=logw)
    pts = -_log_mix(h, -ph_q, -ph_p)
    D = np.exp(-ph_p) - np.exp(-ph_q)
    vel = -dh_dt[:, None] * D[None, :] * np.exp(pts)
    curve = Curve(t_out, pts, "dual", velocities=vel)
    if check_range:
        _dual_range_guard(gen, curve)
    return curve


def _dual_range_guard(gen, curve):
    th0 = None
    for t, ph in zip(curve.times, curve.points):
        try:
            th0 = inverse_dual_coord(gen, ph, x0=th0)
            fstar = c_transform(gen, ph, x0=th0)
        except Exception as exc:
            raise DualRangeError(
                f"dual geodesic left the dual range near t={t:.6f}", last_valid_t=t
            ) from exc
        gap = abs(f_value(gen, th0) + fstar - psi(th0 - ph))
        if gap > 1e-6:
            raise DualRangeError(
                f"Fenchel equality fails by {gap:.2e} at t={t:.6f}", last_valid_t=t
            )


# ---------------------------------------------------------------------------
# direct integration of the geodesic equation

def geodesic_acceleration(gen: Generator, xi: np.ndarray, v: np.ndarray, which: str,
                          theta_hint=None) -> np.ndarray:
    """Acceleration -Gamma(xi)(v, v) of the requested connection.

    Contraction of the closed-form symbols: the primal one is
    -(v_k^2 - 2 v_k <pi, v>), the dual one its negative with pi at the
    dual-coordinate point.
    """
    if which == "primal":
        pi = portfolio_theta(gen, xi)
    else:
        th = inverse_dual_coord(gen, xi, x0=theta_hint)
        pi = portfolio_theta(gen, th)
    mix = pi[:-1] @ v
    quad = v * v - 2.0 * v * mix
    return -quad if which == "primal" else quad


def _geodesic_invariant(gen, xi, v, which, theta_hint=None) -> np.ndarray:
    """First integral of the geodesic equation, recorded as a diagnostic.

    Along a primal geodesic every component of ``v_k exp(xi_k - 2 f(xi))``
    is constant; the dual analog conserves ``-v_k exp(-xi_k - 2 f*(xi))``.
    Drift in these vectors measures integration error.
    """
    if which == "primal":
        return v * np.exp(xi - 2.0 * f_value(gen, xi))
    th = inverse_dual_coord(gen, xi, x0=theta_hint)
    fstar = psi(th - xi) - f_value(gen, th)
    return -v * np.exp(-xi - 2.0 * fstar)


def integrate_geodesic(gen: Generator, xi0, v0, which: str = "primal",
                       steps: int = DEFAULT_GRID - 1, t_end: float = 1.0) -> Curve:
    """Fixed-step RK4 integration of the second-order geodesic equation.

    The returned curve carries the conserved-vector diagnostic of
    :func:`_geodesic_invariant` at every step; its drift from the initial
    value is an a-posteriori error indicator.
    """
    xi = coord_array(xi0).copy()
    v = np.asarray(v0, dtype=float).copy()
    dt = t_end / steps
    times = np.linspace(0.0, t_end, steps + 1)
    pts = np.empty((steps + 1, xi.size))
    vels = np.empty_like(pts)
    diag = np.empty_like(pts)
    pts[0], vels[0] = xi, v
    hint = {"theta": None}

    def acc(x, w):
        a = geodesic_acceleration(gen, x, w, which, theta_hint=hint["theta"])
        if which == "dual":
            hint["theta"] = inverse_dual_coord(gen, x, x0=hint["theta"])
        return a

    diag[0] = _geodesic_invariant(gen, xi, v, which, theta_hint=hint["theta"])
    for k in range(steps):
        k1x, k1v = v, acc(xi, v)
        k2x, k2v = v + 0.5 * dt * k1v, acc(xi + 0.5 * dt * k1x, v + 0.5 * dt * k1v)
        k3x, k3v = v + 0.5 * dt * k2v, acc(xi + 0.5 * dt * k2x, v + 0.5 * dt * k2v)
        k4x, k4v = v + dt * k3v, acc(xi + dt * k3x, v + dt * k3v)
        xi = xi + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not np.all(np.isfinite(xi)) or np.linalg.norm(xi) > 1e3:
            raise GeodesicBlowupError(
                f"geodesic integration blew up at t={times[k + 1]:.6f}",
                last_valid_t=times[k],
            )
        pts[k + 1], vels[k + 1] = xi, v
        diag[k + 1] = _geodesic_invariant(gen, xi, v, which, theta_hint=hint["theta"])
    return Curve(times, pts, which, velocities=vels, diagnostic=diag)


def _residual_values(gen, times, points, coord, eval_times, end_velocities=None) -> np.ndarray:
    bc = "not-a-knot"
    if end_velocities is not None:
        bc = ((1, end_velocities[0]), (1, end_velocities[1]))
    spl = CubicSpline(times, points, axis=0, bc_type=bc)
    d1, d2 = spl.derivative(1), spl.derivative(2)
    out = np.empty((len(eval_times), points.shape[1]))
    hint = None
    for row, t in enumerate(eval_times):
        xi = spl(t)
        v = d1(t)
        a = d2(t)
        if coord == "dual":
            hint = inverse_dual_coord(gen, xi, x0=hint)
            pi = portfolio_theta(gen, hint)
            sign = -1.0
        else:
            pi = portfolio_theta(gen, xi)
            sign = 1.0
        out[row] = a + sign * (v * v - 2.0 * v * (pi[:-1] @ v))
    return out


def geodesic_residual(gen: Generator, curve: Curve, trim: int = 2,
                      richardson: bool = True) -> float:
    """Sup-norm residual of the geodesic equation along a sampled curve.

    Velocities and accelerations come from a cubic spline through the
    sampled points, so the check is independent of how the curve was built
    (stored end velocities, when present, clamp the spline ends).  On a
    uniform power-of-two-plus-one grid the O(step^2) spline truncation is
    removed by Richardson extrapolation against the half-resolution
    subsample, evaluated at their shared interior nodes; pass
    ``richardson=False`` for the raw residual.
    """
    ends = None
    if curve.velocities is not None:
        ends = (curve.velocities[0], curve.velocities[-1])
    m = curve.times.size
    uniform = np.allclose(np.diff(curve.times), curve.times[1] - curve.times[0], rtol=1e-9)
    if not richardson or not uniform or m < 9 or m % 2 == 0:
        ts_eval = curve.times[trim:-trim] if trim else curve.times
        res = _residual_values(gen, curve.times, curve.points, curve.coord, ts_eval, ends)
        return float(np.max(np.abs(res)))
    shared = curve.times[2 * trim : m - 2 * trim : 2]
    res_full = _residual_values(gen, curve.times, curve.points, curve.coord, shared, ends)
    half = slice(0, m, 2)
    res_half = _residual_values(
        gen, curve.times[half], curve.points[half], curve.coord, shared, ends
    )
    return float(np.max(np.abs((4.0 * res_full - res_half) / 3.0)))


# ---------------------------------------------------------------------------
# gradient flows

def _primal_flow_rhs(gen, th, th_target):
    pi = portfolio_theta(gen, th)
    delta = np.concatenate([th_target - th, [0.0]])
    m = delta.max()
    logZ = m + np.log(pi @ np.exp(delta - m))
    return np.exp(delta[:-1] - logZ) - np.exp(-logZ)


def _dual_flow_rhs(gen, th, ph_target):
    from .geometry import dual_jacobian

    ph = dual_coord(gen, th).phi
    pi = portfolio_theta(gen, th)
    delta = np.concatenate([ph - ph_target, [0.0]])
    m = delta.max()
    logZ = m + np.log(pi @ np.exp(delta - m))
    phi_dot = -(np.exp(delta[:-1] - logZ) - np.exp(-logZ))
    theta_dot = np.linalg.solve(dual_jacobian(gen, th), phi_dot)
    return theta_dot, phi_dot


def _rk4_step(rhs, y, dt):
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def primal_flow(gen: Generator, q, r, horizon: float = 20.0, steps: int = 800) -> Curve:
    """Gradient flow of T(r | .) from q; a time change of the primal geodesic.

    The divergence to the target must decrease along the discrete flow;
    steps that would increase it are halved and retried.
    """
    from .divergence import l_divergence_primal

    th_r = to_primal(r).theta
    th = to_primal(q).theta.copy()
    rhs = lambda x: _primal_flow_rhs(gen, x, th_r)
    times = [0.0]
    pts = [th.copy()]
    vels = [rhs(th)]
    value = l_divergence_primal(gen, th_r, th).value
    dt = horizon / steps
    t = 0.0
    while t < horizon - 1e-12:
        step = min(dt, horizon - t)
        for _ in range(50):
            cand = _rk4_step(rhs, th, step)
            cand_val = l_divergence_primal(gen, th_r, cand).value
            if cand_val <= value + 1e-15:
                break
            step *= 0.5
        th, value, t = cand, cand_val, t + step
        times.append(t)
        pts.append(th.copy())
        vels.append(rhs(th))
    return Curve(np.array(times), np.array(pts), "primal", velocities=np.array(vels))


def dual_flow(gen: Generator, q, p, horizon: float = 20.0, steps: int = 800) -> Curve:
    """Gradient flow of T(. | p) from q; a time change of the dual geodesic.

    Integrated in primal state coordinates but reported, like the dual
    geodesic, in dual coordinates.
    """
    from .divergence import l_divergence_primal

    ph_p = dual_coord(gen, to_primal(p).theta).phi
    th_p = to_primal(p).theta
    th = to_primal(q).theta.copy()
    rhs = lambda x: _dual_flow_rhs(gen, x, ph_p)[0]
    t = 0.0
    value = l_divergence_primal(gen, th, th_p).value
    times = [0.0]
    pts = [dual_coord(gen, th).phi]
    vels = [_dual_flow_rhs(gen, th, ph_p)[1]]
    dt = horizon / steps
    while t < horizon - 1e-12:
        step = min(dt, horizon - t)
        for _ in range(50):
            cand = _rk4_step(rhs, th, step)
            cand_val = l_divergence_primal(gen, cand, th_p).value
            if cand_val <= value + 1e-15:
                break
            step *= 0.5
        th, value, t = cand, cand_val, t + step
        times.append(t)
        pts.append(dual_coord(gen, th).phi)
        vels.append(_dual_flow_rhs(gen, th, ph_p)[1])
    return Curve(np.array(times), np.array(pts), "dual", velocities=np.array(vels))


def inverse_exp(gen: Generator, q, target, which: str = "primal") -> np.ndarray:
    """Unit initial velocity at q of the geodesic reaching ``target``.

    Proportional to the negative Riemannian gradient of the divergence to
    the target; returned metric-normalized (zero vector if target == q).
    """
    if which == "primal":
        raw = -riem_gradient_primal(gen, target, q)
        g = metric_primal(gen, to_primal(q).theta)
    elif which == "dual":
        raw = -riem_gradient_dual(gen, target, q)
        g = metric_dual(gen, theta=to_primal(q).theta)
    else:
        raise ValueError("which must be 'primal' or 'dual'")
    norm = g.norm(raw)
    if norm < 1e-15:
        return np.zeros_like(raw)
    return raw / norm


# ---------------------------------------------------------------------------
# generalized Pythagorean criterion

@dataclass(frozen=True)
class PythResult:
    """Outcome of the three-point rebalancing comparison at q."""

    gap: float
    inner: float
    angle_deg: float
    sign_quantity: float


def pythagorean_sign(gen: Generator, p, q, r) -> PythResult:
    """Evaluate T(q|p) + T(r|q) - T(r|p) and its two sign surrogates.

    ``gap`` comes from three divergence evaluations; ``inner`` is the metric
    inner product at q of the initial velocities of the dual geodesic to p
    and the primal geodesic to r; ``sign_quantity`` is the closed-form
    1 - sum_k Pi_k(q,p) Pi_k(r,q) / pi_k(q).  All three agree in sign.
    """
    from .geometry import dual_jacobian

    gap = (
        l_divergence(gen, q, p).value
        + l_divergence(gen, r, q).value
        - l_divergence(gen, r, p).value
    )
    th_q = to_primal(q).theta
    th_p = to_primal(p).theta
    th_r = to_primal(r).theta
    pi_q = portfolio_theta(gen, th_q)
    u_dual = -riem_gradient_dual(gen, p, q)
    v_primal = -riem_gradient_primal(gen, r, q)
    J = dual_jacobian(gen, th_q)
    u_primal = np.linalg.solve(J, u_dual)
    g = metric_primal(gen, th_q)
    inner = g.inner(u_primal, v_primal)
    nu, nv = g.norm(u_primal), g.norm(v_primal)
    if nu < 1e-15 or nv < 1e-15:
        angle = float("nan")
    else:
        angle = float(np.degrees(np.arccos(np.clip(inner / (nu * nv), -1.0, 1.0))))
    Pi_qp = pi_quantities(gen, th_q, th_p).values
    Pi_rq = pi_quantities(gen, th_r, th_q).values
    sign_q = 1.0 - float(np.sum(Pi_qp * Pi_rq / pi_q))
    return PythResult(gap=float(gap), inner=float(inner), angle_deg=angle, sign_quantity=sign_q)


# ---------------------------------------------------------------------------
# the rebalancing region on the 2-simplex

@dataclass
class RegionSample:
    """Classified grid of the region where coarser rebalancing wins."""

    points: np.ndarray       # (N, n) simplex points, p and r appended
    gap: np.ndarray          # T(q|p) + T(r|q) - T(r|p) per point
    in_region: np.ndarray    # gap <= tolerance
    boundary: np.ndarray     # bool mask: sign change among lattice neighbors
    boundary_polyline: np.ndarray  # (M, n) interpolated zero crossings

    @property
    def resolution(self) -> int:
        return int(getattr(self, "_resolution", 0))


def region_gap(gen: Generator, p, r, Q: np.ndarray) -> np.ndarray:
    """Vectorized gap T(q|p) + T(r|q) - T(r|p) over rows q of Q."""
    pa, ra = point_array(p), point_array(r)
    pi_p = np.asarray(gen.portfolio(pa), dtype=float)
    logv_p = gen.log_gen(pa)
    logv_r = gen.log_gen(ra)
    logv_Q = gen.log_gen_many(Q)
    Pi_Q = gen.portfolio_many(Q)
    t_qp = np.log((Q / pa) @ pi_p) - (logv_Q - logv_p)
    t_rq = np.log(np.sum(Pi_Q * (ra / Q), axis=1)) - (logv_r - logv_Q)
    t_rp = np.log((ra / pa) @ pi_p) - (logv_r - logv_p)
    return t_qp + t_rq - t_rp


def _barycentric_lattice(resolution: int):
    idx = []
    for i in range(1, resolution):
        for j in range(1, resolution - i):
            idx.append((i, j, resolution - i - j))
    idx = np.array(idx, dtype=int)
    return idx, idx / resolution


def region_sample(gen: Generator, p, r, grid_resolution: int = 60) -> RegionSample:
    """Classify a barycentric lattice by the sign of the rebalancing gap.

    Only n = 3 is supported (the lattice lives on the 2-simplex); p and r
    are appended to the sample and always classify as boundary points since
    their gap vanishes identically.  Boundary lattice points are those with
    a sign change toward some lattice neighbor; the polyline refines the
    crossing by linear interpolation along lattice edges.
    """
    pa, ra = point_array(p), point_array(r)
    if pa.size != 3:
        raise ValueError("region sampling draws on the 2-simplex: need n = 3")
    idx, Q = _barycentric_lattice(grid_resolution)
    workers = int(os.environ.get("LGEO_THREADS", "0") or 0)
    if workers > 1:
        chunks = np.array_split(np.arange(Q.shape[0]), workers)
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(lambda c: region_gap(gen, pa, ra, Q[c]), chunks))
        gaps = np.concatenate(parts)
    else:
        gaps = region_gap(gen, pa, ra, Q)

    in_region = gaps <= 1e-12
    index_map = {(i, j): k for k, (i, j, _) in enumerate(idx)}
    boundary = np.zeros(Q.shape[0], dtype=bool)
    segments = []
    for k, (i, j, _) in enumerate(idx):
        for di, dj in ((1, 0), (0, 1), (1, -1)):
            k2 = index_map.get((i + di, j + dj))
            if k2 is None:
                continue
            g1, g2 = gaps[k], gaps[k2]
            if (g1 <= 0 < g2) or (g2 <= 0 < g1):
                boundary[k] = boundary[k2] = True
                if g1 != g2:
                    lam = g1 / (g1 - g2)
                    segments.append(Q[k] + lam * (Q[k2] - Q[k]))
    # p and r always lie on the boundary of the region (their gap is zero)
    extra = np.array([pa, ra])
    extra_gap = region_gap(gen, pa, ra, extra)
    points = np.vstack([Q, extra])
    gaps = np.concatenate([gaps, extra_gap])
    in_region = np.concatenate([in_region, np.abs(extra_gap) <= 1e-9])
    boundary = np.concatenate([boundary, np.abs(extra_gap) <= 1e-9])
    poly = np.array(segments) if segments else np.empty((0, 3))
    out = RegionSample(points=points, gap=gaps, in_region=in_region,
                       boundary=boundary, boundary_polyline=poly)
    out._resolution = grid_resolution
    return out


# ---------------------------------------------------------------------------
# trace utilities

def point_segment_distance(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distance from each row of pts to the segment [a, b]."""
    pts = np.atleast_2d(pts)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.linalg.norm(pts - a, axis=1)
    s = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
    proj = a + s[:, None] * ab
    return np.linalg.norm(pts - proj, axis=1)


def _points_to_polyline(P: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Distance from each row of P to the polyline with vertices V."""
    best = np.full(P.shape[0], np.inf)
    for a, b in zip(V[:-1], V[1:]):
        best = np.minimum(best, point_segment_distance(P, a, b))
    return best


def polyline_hausdorff(A: np.ndarray, B: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two polylines (vertex sampling)."""
    return float(max(_points_to_polyline(A, B).max(), _points_to_polyline(B, A).max()))
