"""Log-approximation divergences and the transport duality around them.

The central object is the divergence

    T(q | p) = log(1 + grad_phi(p) . (q - p)) - (phi(q) - phi(p)),

the error of the sharpened first-order approximation available to
exponentially concave ``phi``.  It admits three coordinate representations
(Euclidean, primal, dual) that must agree, is reproduced by the cost-based
divergence of the c-concave function ``f = phi + psi``, and certifies
optimality of the induced transport map through cyclical monotonicity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .generators import Generator, NonRegularError, dual_coord, portfolio_theta
from .simplex import coord_array, point_array, psi, softmax_with_tail, to_primal

__all__ = [
    "DivergenceValue",
    "CouplingSample",
    "ConvergenceError",
    "l_divergence",
    "l_divergence_gradient_form",
    "l_divergence_primal",
    "l_divergence_dual",
    "bregman",
    "f_value",
    "fenchel_conjugate_on_graph",
    "c_transform",
    "c_transform_argmin",
    "inverse_dual_coord",
    "c_divergence",
    "c_divergence_dual",
    "is_c_cyclical_monotone",
    "is_mcm",
    "pyth_transport_gap",
]


class ConvergenceError(RuntimeError):
    """Inner minimization failed to converge."""


@dataclass(frozen=True)
class DivergenceValue:
    """Non-negative divergence value with the coordinate system that made it."""

    value: float
    rep: str

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class CouplingSample:
    """Finite sample of (theta, phi) pairs from a coupling."""

    pairs: list

    def __post_init__(self):
        if len(self.pairs) == 0:
            raise ValueError("a coupling sample must be non-empty")
        for th, ph in self.pairs:
            if not (np.all(np.isfinite(th)) and np.all(np.isfinite(ph))):
                raise ValueError("coupling sample entries must be finite")

    def __len__(self):
        return len(self.pairs)


# ---------------------------------------------------------------------------
# the divergence in its three coordinate systems

def l_divergence(gen: Generator, q, p) -> DivergenceValue:
    """T(q|p) computed through the portfolio: log(sum pi_i(p) q_i/p_i) - dphi."""
    qa, pa = point_array(q), point_array(p)
    pi = gen.portfolio(pa)
    ratio = float(pi @ (qa / pa))
    if ratio <= 0.0:
        raise NonRegularError(f"{gen.name}: log argument {ratio!r} <= 0 in divergence")
    val = np.log(ratio) - (gen.log_gen(qa) - gen.log_gen(pa))
    return DivergenceValue(value=float(val), rep="euclidean")


def l_divergence_gradient_form(gen: Generator, q, p) -> float:
    """Same value through the gradient: log(1 + grad . (q - p)) - dphi."""
    qa, pa = point_array(q), point_array(p)
    g = gen.euclid_grad(pa)
    return float(np.log1p(g @ (qa - pa)) - (gen.log_gen(qa) - gen.log_gen(pa)))


def f_value(gen: Generator, theta) -> float:
    """The c-concave potential f(theta) = phi(p(theta)) + psi(theta)."""
    th = coord_array(theta)
    return float(gen.log_gen(softmax_with_tail(th)) + psi(th))


def _log_pi_mix(pi: np.ndarray, delta: np.ndarray) -> float:
    """log sum_l pi_l exp(delta_l) with delta_n = 0 implicit, max-shifted."""
    z = np.concatenate([delta, [0.0]]) + np.log(pi)
    m = z.max()
    return float(m + np.log(np.exp(z - m).sum()))


def l_divergence_primal(gen: Generator, theta, theta2) -> DivergenceValue:
    """T between the points with exponential coordinates theta and theta2."""
    th, th2 = coord_array(theta), coord_array(theta2)
    pi2 = portfolio_theta(gen, th2)
    if np.any(pi2 <= 0.0):
        raise NonRegularError(f"{gen.name}: boundary portfolio in primal divergence")
    val = _log_pi_mix(pi2, th - th2) - (f_value(gen, th) - f_value(gen, th2))
    return DivergenceValue(value=float(val), rep="primal")


def l_divergence_dual(gen: Generator, phi, phi2) -> DivergenceValue:
    """T between the points with dual coordinates phi and phi2.

    Requires both arguments to lie in the range of the dual coordinate map;
    the inverse map is evaluated by Newton iteration unless the family has a
    closed form.
    """
    ph, ph2 = coord_array(phi), coord_array(phi2)
    th = inverse_dual_coord(gen, ph)
    th2 = inverse_dual_coord(gen, ph2)
    pi_first = portfolio_theta(gen, th)
    fstar = psi(th - ph) - f_value(gen, th)
    fstar2 = psi(th2 - ph2) - f_value(gen, th2)
    val = _log_pi_mix(pi_first, ph - ph2) - (fstar2 - fstar)
    return DivergenceValue(value=float(val), rep="dual")


def bregman(gen, q, p) -> float:
    """Classical linear-approximation error grad . (q - p) - dphi.

    Accepts any generator-like object with ``log_gen`` and ``euclid_grad``;
    with the Shannon entropy as generator this is the relative entropy.
    """
    qa, pa = point_array(q), point_array(p)
    g = gen.euclid_grad(pa)
    return float(g @ (qa - pa) - (gen.log_gen(qa) - gen.log_gen(pa)))


# ---------------------------------------------------------------------------
# c-transform and the dual potential

def _u_value_grad_hess(gen: Generator, th: np.ndarray, ph: np.ndarray):
    """Value/gradient/Hessian of u(theta) = f(theta) - psi(theta - phi).

    Total on all of R^(n-1): iterates that graze the simplex boundary give
    u = -inf (rejected by the line search) instead of raising.
    """
    x = th - ph
    with np.errstate(divide="ignore", invalid="ignore"):
        u = f_value(gen, th) - psi(x)
    sigma_full = softmax_with_tail(x)
    sigma = sigma_full[:-1]
    pi = portfolio_theta(gen, th)
    grad = pi[:-1] - sigma
    dpi = gen.dpi_dtheta(th)[:-1, :]
    hess = dpi - (np.diag(sigma) - np.outer(sigma, sigma))
    return u, grad, hess


def _newton_max_u(gen: Generator, ph: np.ndarray, x0: np.ndarray, gtol=1e-10, maxiter=200):
    th = x0.astype(float).copy()
    u, grad, hess = _u_value_grad_hess(gen, th, ph)
    for _ in range(maxiter):
        gnorm = np.linalg.norm(grad)
        if gnorm < gtol:
            return th, u, True
        # Newton step on the concavified Hessian; shift if not negative definite
        tau = 0.0
        eigmax = np.linalg.eigvalsh((hess + hess.T) / 2).max()
        if eigmax > -1e-12:
            tau = eigmax + 1e-8
        try:
            step = np.linalg.solve(hess - tau * np.eye(th.size), -grad)
        except np.linalg.LinAlgError:
            step = grad
        if step @ grad < 0:
            step = grad
        if gnorm < 1e-6 and tau == 0.0:
            # quadratic convergence zone: objective differences underflow,
            # so skip the line search and trust the full Newton step
            cand = th + step
            u_new, grad_new, hess_new = _u_value_grad_hess(gen, cand, ph)
            if np.linalg.norm(grad_new) >= gnorm:
                # stagnating at the float floor counts as converged
                return th, u, gnorm < 1e-8
            th, u, grad, hess = cand, u_new, grad_new, hess_new
            continue
        alpha = 1.0
        for _ in range(60):
            cand = th + alpha * step
            u_new, grad_new, hess_new = _u_value_grad_hess(gen, cand, ph)
            if u_new >= u + 1e-4 * alpha * (grad @ step):
                th, u, grad, hess = cand, u_new, grad_new, hess_new
                break
            alpha *= 0.5
        else:
            return th, u, np.linalg.norm(grad) < 1e-8
        if not np.all(np.isfinite(th)) or np.linalg.norm(th) > 1e6:
            return th, u, False
    return th, u, np.linalg.norm(grad) < gtol


def c_transform_argmin(gen: Generator, phi, x0=None) -> np.ndarray:
    """Minimizer theta of psi(theta - phi) - f(theta).

    Damped Newton from the barycenter and, when available, from the family's
    closed-form inverse; Nelder-Mead as a last resort.  The objective is the
    negative of a strictly quasi-concave function, so the minimizer is unique
    when it exists.
    """
    ph = coord_array(phi)
    starts = [np.zeros_like(ph)]
    closed = gen.dual_map_inverse(ph)
    if closed is not None:
        starts.insert(0, np.asarray(closed, dtype=float))
    if x0 is not None:
        starts.insert(0, coord_array(x0))
    best = None
    for s in starts:
        th, u, ok = _newton_max_u(gen, ph, s)
        if ok:
            return th
        if best is None or u > best[1]:
            best = (th, u)
    res = minimize(
        lambda t: psi(t - ph) - f_value(gen, t),
        best[0],
        method="Nelder-Mead",
        options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000},
    )
    th = res.x
    _, grad, _ = _u_value_grad_hess(gen, th, ph)
    if np.linalg.norm(grad) > 1e-7:
        raise ConvergenceError(
            f"{gen.name}: c-transform minimization did not converge at phi={ph}"
        )
    return th


def c_transform(gen: Generator, phi, x0=None) -> float:
    """The conjugate potential f*(phi) = inf_theta psi(theta - phi) - f(theta)."""
    ph = coord_array(phi)
    th = c_transform_argmin(gen, ph, x0=x0)
    return float(psi(th - ph) - f_value(gen, th))


def inverse_dual_coord(gen: Generator, phi, x0=None) -> np.ndarray:
    """Exponential coordinate of the point whose dual coordinate is ``phi``."""
    ph = coord_array(phi)
    closed = gen.dual_map_inverse(ph)
    if closed is not None:
        return np.asarray(closed, dtype=float)
    return c_transform_argmin(gen, ph, x0=x0)


def fenchel_conjugate_on_graph(gen: Generator, theta) -> float:
    """f*(phi) at phi = dual map of theta, via the equality f + f* = c."""
    th = coord_array(theta)
    ph = dual_coord(gen, th).phi
    return float(psi(th - ph) - f_value(gen, th))


# ---------------------------------------------------------------------------
# c-divergences

def c_divergence(gen: Generator, p, p2) -> float:
    """D(p|p2) = c(theta, phi2) - f(theta) - f*(phi2); equals T(p|p2)."""
    th = to_primal(p).theta
    th2 = to_primal(p2).theta
    ph2 = dual_coord(gen, th2).phi
    fstar2 = psi(th2 - ph2) - f_value(gen, th2)
    return float(psi(th - ph2) - f_value(gen, th) - fstar2)


def c_divergence_dual(gen: Generator, p, p2) -> float:
    """D*(p|p2) = c(theta2, phi) - f*(phi) - f(theta2); equals T(p2|p)."""
    th = to_primal(p).theta
    th2 = to_primal(p2).theta
    ph = dual_coord(gen, th).phi
    fstar = psi(th - ph) - f_value(gen, th)
    return float(psi(th2 - ph) - fstar - f_value(gen, th2))


def pyth_transport_gap(gen: Generator, p, q, r) -> float:
    """Cost difference between the cyclic and transposition perturbations.

    Couples (q->p's partner, r->q's partner) against (q->q's, r->p's); the
    result coincides with T(q|p) + T(r|q) - T(r|p).
    """
    th_p = to_primal(p).theta
    th_q = to_primal(q).theta
    th_r = to_primal(r).theta
    ph_p = dual_coord(gen, th_p).phi
    ph_q = dual_coord(gen, th_q).phi
    return float(
        psi(th_q - ph_p) + psi(th_r - ph_q) - psi(th_r - ph_p) - psi(th_q - ph_q)
    )


# ---------------------------------------------------------------------------
# monotonicity certificates

_CM_SLACK = 1e-10
_MCM_SLACK = 1e-12


def is_c_cyclical_monotone(sample: CouplingSample, m_max: int = 5) -> bool:
    """Exhaustively test cyclical monotonicity on subsets up to size m_max.

    For every subset of pairs of size at most ``m_max`` (capped at 7) and
    every permutation of its second coordinates, the diagonal coupling must
    not cost more than the permuted one (up to 1e-10 slack).
    """
    if m_max > 7:
        raise ValueError("m_max capped at 7: permutation enumeration is factorial")
    pairs = sample.pairs
    N = len(pairs)
    thetas = np.array([np.asarray(t, dtype=float) for t, _ in pairs])
    phis = np.array([np.asarray(f, dtype=float) for _, f in pairs])
    # cost matrix C[i, j] = c(theta_i, phi_j)
    diff = thetas[:, None, :] - phis[None, :, :]
    m = np.maximum(diff.max(axis=-1), 0.0)
    C = m + np.log(np.exp(-m) + np.exp(diff - m[..., None]).sum(axis=-1))
    rows = {}
    for size in range(2, min(m_max, N) + 1):
        if size not in rows:
            rows[size] = np.array(list(itertools.permutations(range(size))))
        perms = rows[size]
        arange = np.arange(size)
        for subset in itertools.combinations(range(N), size):
            idx = np.array(subset)
            M = C[np.ix_(idx, idx)]
            base = M[arange, arange].sum()
            permuted = M[arange[None, :], perms].sum(axis=1)
            if base > permuted.min() + _CM_SLACK:
                return False
    return True


def is_mcm(portfolio_map, cycle) -> bool:
    """Multiplicative cyclical monotonicity of a portfolio map along a cycle.

    ``cycle`` must close (last point equals first).  The product of the
    one-step relative returns must be at least one.
    """
    pts = [point_array(p) for p in cycle]
    if not np.allclose(pts[0], pts[-1], atol=0.0, rtol=0.0):
        raise ValueError("cycle must close: last point must equal the first")
    log_product = 0.0
    for t in range(len(pts) - 1):
        w = np.asarray(portfolio_map(pts[t]), dtype=float)
        log_product += np.log(w @ (pts[t + 1] / pts[t]))
    return bool(log_product >= -_MCM_SLACK)
