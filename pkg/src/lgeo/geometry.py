"""Riemannian metric, dual connections, and curvature induced by T.

Differentiating the divergence T twice at the diagonal yields a Riemannian
metric; differentiating three times yields a pair of affine connections
whose coefficients close in terms of the portfolio alone:

    g_ij(theta)      = pi_i (d_ij - pi_j) - d pi_i / d theta_j
    Gamma^k_ij       = d_ijk - d_ik pi_j - d_jk pi_i          (primal)
    Gamma*^k_ij      = -d_ijk + d_ik pi_j + d_jk pi_i         (dual)
    R^l_ijk          = d_lj g_ik - d_li g_jk

(Kronecker deltas written d).  Both connections have constant sectional
curvature -1.  Every closed form here is validated elsewhere against
finite differences of T itself; the helpers at the bottom build those
oracles.

Index conventions: Christoffel arrays are stored as ``gamma[i, j, k]``
meaning the raised symbol with lower pair (i, j); curvature arrays as
``R[i, j, k, l]`` meaning the coefficient of ``d/d xi_l`` in
``R(d_i, d_j) d_k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .divergence import inverse_dual_coord
from .generators import Generator, NonRegularError, portfolio_theta
from .simplex import coord_array, point_array

__all__ = [
    "MetricMatrix",
    "ChristoffelTensor",
    "PiQuantities",
    "pi_quantities",
    "pi_quantities_dual",
    "metric_euclidean",
    "metric_primal",
    "metric_dual",
    "dual_jacobian",
    "christoffel_primal",
    "christoffel_dual",
    "christoffel_lowered",
    "rc_curvature",
    "rc_curvature_assembled",
    "ricci",
    "sectional_curvature",
    "riem_gradient_primal",
    "riem_gradient_dual",
    "riem_gradient_primal_ratio_form",
    "riem_gradient_dual_ratio_form",
    "dual_connection_in_primal_coords",
    "pushforward_vector",
    "pullback_form",
    "pullback_metric",
    "fd_metric_from_divergence",
    "fd_lowered_primal_connection",
    "fd_lowered_dual_connection",
]

FD_STEP_FIRST = 1e-4
FD_STEP_HIGH = 1e-3


@dataclass(frozen=True)
class MetricMatrix:
    """Symmetric positive-definite metric coefficients at a base point."""

    entries: np.ndarray
    coord: str
    base_point: np.ndarray
    inv: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def inner(self, u, v) -> float:
        return float(np.asarray(u) @ self.entries @ np.asarray(v))

    def norm(self, u) -> float:
        return float(np.sqrt(max(self.inner(u, u), 0.0)))


@dataclass(frozen=True)
class ChristoffelTensor:
    """Raised connection coefficients gamma[i, j, k] = Gamma^k_ij."""

    gamma: np.ndarray
    coord: str
    base_point: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.gamma, dtype=dtype)

    def contract(self, v: np.ndarray) -> np.ndarray:
        """Quadratic form Gamma^k_ij v_i v_j for the geodesic equation."""
        return np.einsum("ijk,i,j->k", self.gamma, v, v)


@dataclass(frozen=True)
class PiQuantities:
    """The normalized two-point weights entering metric and gradient formulas."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        if np.any(self.values <= 0) or abs(self.values.sum() - 1.0) > 1e-8:
            raise NonRegularError("two-point weights must be a positive unit-sum vector")

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def _two_point_weights(pi: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Normalized pi_l * exp(delta_l) with the implicit delta_n = 0."""
    z = np.log(pi) + np.concatenate([delta, [0.0]])
    z -= z.max()
    w = np.exp(z)
    return w / w.sum()


def pi_quantities(gen: Generator, theta, theta2) -> PiQuantities:
    """Weights Pi_i(theta, theta2): the portfolio at theta2 tilted toward theta."""
    th, th2 = coord_array(theta), coord_array(theta2)
    pi = portfolio_theta(gen, th2)
    return PiQuantities(values=_two_point_weights(pi, th - th2), kind="primal")


def pi_quantities_dual(gen: Generator, phi, phi2) -> PiQuantities:
    """Weights Pi*_i(phi, phi2): the portfolio at the *first* point, tilted."""
    ph, ph2 = coord_array(phi), coord_array(phi2)
    th = inverse_dual_coord(gen, ph)
    pi = portfolio_theta(gen, th)
    return PiQuantities(values=_two_point_weights(pi, ph - ph2), kind="dual")


# ---------------------------------------------------------------------------
# metric

def metric_euclidean(gen: Generator, p, u, v) -> float:
    """Inner product of tangent vectors in Euclidean coordinates.

    Tangent vectors must sum to zero.  The bilinear form is
    ``-Hess Phi / Phi`` restricted to the tangent hyperplane, equivalently
    ``-Hess phi - grad phi grad phi^T``.
    """
    arr = point_array(p)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if abs(u.sum()) > 1e-10 or abs(v.sum()) > 1e-10:
        raise ValueError("tangent vectors must have zero component sum")
    g = gen.euclid_grad(arr)
    H = gen.euclid_hess_phi(arr)
    return float(u @ (-H - np.outer(g, g)) @ v)


def dual_jacobian(gen: Generator, theta) -> np.ndarray:
    """Analytic Jacobian d phi / d theta of the dual coordinate map."""
    th = coord_array(theta)
    pi = portfolio_theta(gen, th)
    dpi = gen.dpi_dtheta(th)
    m = th.size
    return np.eye(m) - dpi[:-1, :] / pi[:-1, None] + dpi[-1, :] / pi[-1]


def _metric_primal_parts(gen: Generator, th: np.ndarray):
    pi = portfolio_theta(gen, th)
    dpi = gen.dpi_dtheta(th)
    m = th.size
    pit = pi[:-1]
    G = np.diag(pit) - np.outer(pit, pit) - dpi[:-1, :]
    if np.max(np.abs(G - G.T)) > 1e-8:
        raise NonRegularError(f"{gen.name}: metric candidate not symmetric")
    G = (G + G.T) / 2
    J = np.eye(m) - dpi[:-1, :] / pit[:, None] + dpi[-1, :] / pi[-1]
    return pi, G, J


def metric_primal(gen: Generator, theta) -> MetricMatrix:
    """Metric coefficients in exponential coordinates, with closed-form inverse.

    The inverse combines the rank-one (Sherman-Morrison) inverse of
    ``I - 1 pi^T`` with the inverse dual Jacobian, avoiding a generic matrix
    inversion of the metric itself.
    """
    th = coord_array(theta)
    pi, G, J = _metric_primal_parts(gen, th)
    if np.linalg.eigvalsh(G).min() <= 0:
        raise NonRegularError(f"{gen.name}: metric not positive definite at {th}")
    M = np.diag(1.0 / pi[:-1]) + 1.0 / pi[-1]
    inv = np.linalg.solve(J, M)
    return MetricMatrix(entries=G, coord="primal", base_point=th.copy(), inv=inv)


def metric_dual(gen: Generator, phi=None, *, theta=None) -> MetricMatrix:
    """Metric coefficients in dual coordinates.

    Accepts either the dual coordinate ``phi`` (inverted numerically when the
    family has no closed form) or, as a shortcut, the primal coordinate of
    the same point.
    """
    if theta is None:
        th = inverse_dual_coord(gen, coord_array(phi))
    else:
        th = coord_array(theta)
    pi, _, J = _metric_primal_parts(gen, th)
    pit = pi[:-1]
    dpi = gen.dpi_dtheta(th)
    dpi_dphi = dpi[:-1, :] @ np.linalg.inv(J)
    G = np.diag(pit) - np.outer(pit, pit) + dpi_dphi
    if np.max(np.abs(G - G.T)) > 1e-8:
        raise NonRegularError(f"{gen.name}: dual metric candidate not symmetric")
    G = (G + G.T) / 2
    if np.linalg.eigvalsh(G).min() <= 0:
        raise NonRegularError(f"{gen.name}: dual metric not positive definite")
    M = np.diag(1.0 / pit) + 1.0 / pi[-1]
    inv = J @ M
    from .generators import dual_coord

    base = dual_coord(gen, th).phi if phi is None else coord_array(phi)
    return MetricMatrix(entries=G, coord="dual", base_point=base, inv=inv)


# ---------------------------------------------------------------------------
# connections

def _christoffel_raised(pi_trunc: np.ndarray, sign: float) -> np.ndarray:
    m = pi_trunc.size
    eye = np.eye(m)
    d3 = np.zeros((m, m, m))
    idx = np.arange(m)
    d3[idx, idx, idx] = 1.0
    gamma = d3 - eye[:, None, :] * pi_trunc[None, :, None] - eye[None, :, :] * pi_trunc[:, None, None]
    return sign * gamma


def christoffel_primal(gen: Generator, theta) -> ChristoffelTensor:
    th = coord_array(theta)
    pi = portfolio_theta(gen, th)
    return ChristoffelTensor(
        gamma=_christoffel_raised(pi[:-1], +1.0), coord="primal", base_point=th.copy()
    )


def christoffel_dual(gen: Generator, phi=None, *, theta=None) -> ChristoffelTensor:
    if theta is None:
        th = inverse_dual_coord(gen, coord_array(phi))
        base = coord_array(phi)
    else:
        th = coord_array(theta)
        from .generators import dual_coord

        base = dual_coord(gen, th).phi
    pi = portfolio_theta(gen, th)
    return ChristoffelTensor(
        gamma=_christoffel_raised(pi[:-1], -1.0), coord="dual", base_point=base
    )


def christoffel_lowered(gen: Generator, point, which: str) -> np.ndarray:
    """Lowered coefficients Gamma_ijk obtained by contracting with the metric."""
    if which == "primal":
        tensor = christoffel_primal(gen, point)
        g = metric_primal(gen, point).entries
    elif which == "dual":
        tensor = christoffel_dual(gen, point)
        g = metric_dual(gen, point).entries
    else:
        raise ValueError("which must be 'primal' or 'dual'")
    return np.einsum("ijm,mk->ijk", tensor.gamma, g)


# ---------------------------------------------------------------------------
# curvature

def _metric_for(gen, point, which) -> MetricMatrix:
    return metric_primal(gen, point) if which == "primal" else metric_dual(gen, point)


def rc_curvature(gen: Generator, point, which: str = "primal") -> np.ndarray:
    """Curvature tensor R[i,j,k,l] = d_lj g_ik - d_li g_jk (closed form)."""
    return _rc_closed(_metric_for(gen, point, which).entries)


def _rc_closed(g: np.ndarray) -> np.ndarray:
    m = g.shape[0]
    eye = np.eye(m)
    # R[i,j,k,l] = eye[l,j] g[i,k] - eye[l,i] g[j,k]
    R = np.einsum("lj,ik->ijkl", eye, g) - np.einsum("li,jk->ijkl", eye, g)
    return R


def rc_curvature_assembled(gen: Generator, point, which: str = "primal", h: float = FD_STEP_FIRST) -> np.ndarray:
    """Curvature assembled as dGamma - dGamma + GammaGamma - GammaGamma.

    The Christoffel field is the closed form; its coordinate derivatives are
    taken by central differences, so this is an independent route to R.
    """
    xi = coord_array(point)
    m = xi.size

    if which == "primal":
        gamma_at = lambda x: christoffel_primal(gen, x).gamma
    else:
        # Track theta alongside phi so each displaced inversion starts warm.
        th0 = inverse_dual_coord(gen, xi)

        def gamma_at(x):
            th = inverse_dual_coord(gen, x, x0=th0)
            pi = portfolio_theta(gen, th)
            return _christoffel_raised(pi[:-1], -1.0)

    G0 = gamma_at(xi)
    dG = np.empty((m, m, m, m))  # dG[a, i, j, k] = d Gamma^k_ij / d xi_a
    for a in range(m):
        e = np.zeros(m)
        e[a] = h
        dG[a] = (gamma_at(xi + e) - gamma_at(xi - e)) / (2 * h)
    # R^l_ijk = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik,
    # where dG[i, j, k, l] holds d_i Gamma^l_jk.
    term_quad = np.einsum("iml,jkm->ijkl", G0, G0)
    return dG - dG.transpose(1, 0, 2, 3) + term_quad - term_quad.transpose(1, 0, 2, 3)


def ricci(gen: Generator, point, which: str = "primal", assembled: bool = False) -> np.ndarray:
    """Ricci tensor Ric_jk = R^i_ijk (trace over the first slot)."""
    R = (
        rc_curvature_assembled(gen, point, which)
        if assembled
        else rc_curvature(gen, point, which)
    )
    return np.einsum("ijki->jk", R)


def sectional_curvature(gen: Generator, point, u, v, which: str = "primal") -> float:
    """Sectional curvature of the plane span(u, v); constantly -1 in theory."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    g = _metric_for(gen, point, which)
    R = rc_curvature(gen, point, which)
    Ruvv = np.einsum("ijkl,i,j,k->l", R, u, v, v)
    num = float(Ruvv @ g.entries @ u)
    den = g.inner(u, u) * g.inner(v, v) - g.inner(u, v) ** 2
    if den < 1e-14:
        raise ValueError("degenerate plane: u and v are (nearly) parallel")
    return num / den


# ---------------------------------------------------------------------------
# Riemannian gradients of the divergence

def riem_gradient_primal(gen: Generator, r, q) -> np.ndarray:
    """grad of T(r | .) at q, components in primal coordinates.

    Closed form: ((1 - exp(theta^r - theta^q)) / Z)_i with
    Z = sum_l pi_l(q) exp(theta^r_l - theta^q_l).
    """
    from .simplex import to_primal

    th_r = to_primal(r).theta
    th_q = to_primal(q).theta
    pi_q = portfolio_theta(gen, th_q)
    delta = np.concatenate([th_r - th_q, [0.0]])
    mshift = delta.max()
    Z = float(np.exp(mshift) * (pi_q @ np.exp(delta - mshift)))
    return (-np.exp(delta[:-1]) + 1.0) / Z


def riem_gradient_primal_ratio_form(gen: Generator, r, q) -> np.ndarray:
    """Equivalent expression -Pi_i/pi_i + Pi_n/pi_n via the two-point weights."""
    from .simplex import to_primal

    th_r = to_primal(r).theta
    th_q = to_primal(q).theta
    pi_q = portfolio_theta(gen, th_q)
    Pi = pi_quantities(gen, th_r, th_q).values
    return -Pi[:-1] / pi_q[:-1] + Pi[-1] / pi_q[-1]


def riem_gradient_dual(gen: Generator, p, q) -> np.ndarray:
    """grad of T(. | p) at q, components in dual coordinates.

    Closed form: ((exp(phi^q - phi^p) - 1) / Z*)_i with
    Z* = sum_l pi_l(q) exp(phi^q_l - phi^p_l).
    """
    from .generators import dual_coord
    from .simplex import to_primal

    th_q = to_primal(q).theta
    ph_q = dual_coord(gen, th_q).phi
    ph_p = dual_coord(gen, to_primal(p).theta).phi
    pi_q = portfolio_theta(gen, th_q)
    delta = np.concatenate([ph_q - ph_p, [0.0]])
    mshift = delta.max()
    Z = float(np.exp(mshift) * (pi_q @ np.exp(delta - mshift)))
    return (np.exp(delta[:-1]) - 1.0) / Z


def riem_gradient_dual_ratio_form(gen: Generator, p, q) -> np.ndarray:
    """Equivalent expression Pi*_i/pi_i - Pi*_n/pi_n via the two-point weights."""
    from .generators import dual_coord
    from .simplex import to_primal

    th_q = to_primal(q).theta
    ph_q = dual_coord(gen, th_q).phi
    ph_p = dual_coord(gen, to_primal(p).theta).phi
    pi_q = portfolio_theta(gen, th_q)
    Pi = _two_point_weights(pi_q, ph_q - ph_p)
    return Pi[:-1] / pi_q[:-1] - Pi[-1] / pi_q[-1]


# ---------------------------------------------------------------------------
# coordinate transport of tensors

def pushforward_vector(jacobian: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Components of a tangent vector in the target coordinates: J v."""
    return np.asarray(jacobian) @ np.asarray(v)


def pullback_form(jacobian: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Components of a covector pulled back to the source coordinates: J^T w."""
    return np.asarray(jacobian).T @ np.asarray(w)


def pullback_metric(jacobian: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Bilinear form pulled back to the source coordinates: J^T g J."""
    J = np.asarray(jacobian)
    return J.T @ np.asarray(g) @ J


def dual_connection_in_primal_coords(gen: Generator, theta, h: float = FD_STEP_HIGH) -> np.ndarray:
    """Coefficients of the dual connection expressed in primal coordinates.

    Applies the (non-tensorial) connection transformation law with the
    analytic dual Jacobian and a finite-difference second derivative of the
    dual coordinate map.
    """
    from .generators import dual_coord

    th = coord_array(theta)
    m = th.size
    J = dual_jacobian(gen, th)  # d phi / d theta
    A = np.linalg.inv(J)  # d theta / d phi
    gamma_star = christoffel_dual(gen, theta=th).gamma  # in phi coordinates

    # second derivatives d^2 phi_k / d theta_a d theta_b by central differences
    def phi_at(x):
        return dual_coord(gen, x).phi

    D2 = np.empty((m, m, m))  # D2[k, a, b]
    f0 = phi_at(th)
    for a in range(m):
        ea = np.zeros(m)
        ea[a] = h
        D2[:, a, a] = (phi_at(th + ea) - 2 * f0 + phi_at(th - ea)) / h**2
        for b in range(a):
            eb = np.zeros(m)
            eb[b] = h
            mixed = (
                phi_at(th + ea + eb)
                - phi_at(th + ea - eb)
                - phi_at(th - ea + eb)
                + phi_at(th - ea - eb)
            ) / (4 * h**2)
            D2[:, a, b] = mixed
            D2[:, b, a] = mixed
    # Gamma*(theta)^c_ab = A_ck [ Gamma*^k_ij J_ia J_jb + D2[k,a,b] ]
    inner = np.einsum("ijk,ia,jb->abk", gamma_star, J, J) + D2.transpose(1, 2, 0)
    return np.einsum("abk,ck->abc", inner, A)


# ---------------------------------------------------------------------------
# finite-difference oracles on a two-argument divergence

def fd_metric_from_divergence(T2, xi, h: float = FD_STEP_HIGH) -> np.ndarray:
    """Metric oracle -d^2 T / d xi_i d xi'_j at the diagonal, 4-point mixed."""
    xi = np.asarray(xi, dtype=float)
    m = xi.size
    G = np.empty((m, m))
    for i in range(m):
        ei = np.zeros(m)
        ei[i] = h
        for j in range(m):
            ej = np.zeros(m)
            ej[j] = h
            G[i, j] = -(
                T2(xi + ei, xi + ej)
                - T2(xi + ei, xi - ej)
                - T2(xi - ei, xi + ej)
                + T2(xi - ei, xi - ej)
            ) / (4 * h**2)
    return G


def fd_lowered_primal_connection(T2, xi, h: float = FD_STEP_HIGH) -> np.ndarray:
    """Oracle Gamma_ijk = -d^3 T / d xi_i d xi_j d xi'_k at the diagonal."""
    xi = np.asarray(xi, dtype=float)
    m = xi.size

    def dk(first, k):
        ek = np.zeros(m)
        ek[k] = h
        return (T2(first, xi + ek) - T2(first, xi - ek)) / (2 * h)

    out = np.empty((m, m, m))
    for k in range(m):
        base = dk(xi, k)
        for i in range(m):
            ei = np.zeros(m)
            ei[i] = h
            out[i, i, k] = -(dk(xi + ei, k) - 2 * base + dk(xi - ei, k)) / h**2
            for j in range(i):
                ej = np.zeros(m)
                ej[j] = h
                mixed = -(
                    dk(xi + ei + ej, k)
                    - dk(xi + ei - ej, k)
                    - dk(xi - ei + ej, k)
                    + dk(xi - ei - ej, k)
                ) / (4 * h**2)
                out[i, j, k] = mixed
                out[j, i, k] = mixed
    return out


def fd_lowered_dual_connection(T2, xi, h: float = FD_STEP_HIGH) -> np.ndarray:
    """Oracle Gamma*_ijk = -d^3 T / d xi_k d xi'_i d xi'_j at the diagonal."""
    xi = np.asarray(xi, dtype=float)
    m = xi.size

    def second_in_prime(first, i, j):
        ei = np.zeros(m)
        ei[i] = h
        if i == j:
            return (T2(first, xi + ei) - 2 * T2(first, xi) + T2(first, xi - ei)) / h**2
        ej = np.zeros(m)
        ej[j] = h
        return (
            T2(first, xi + ei + ej)
            - T2(first, xi + ei - ej)
            - T2(first, xi - ei + ej)
            + T2(first, xi - ei - ej)
        ) / (4 * h**2)

    out = np.empty((m, m, m))
    for k in range(m):
        ek = np.zeros(m)
        ek[k] = h
        for i in range(m):
            for j in range(i + 1):
                val = -(
                    second_in_prime(xi + ek, i, j) - second_in_prime(xi - ek, i, j)
                ) / (2 * h)
                out[i, j, k] = val
                out[j, i, k] = val
    return out
