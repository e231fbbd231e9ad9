"""Generating functions, their portfolio maps, and duality transforms.

A generator is a function ``phi`` on the open simplex whose exponential
``Phi = exp(phi)`` is concave (Fernholz's "generating function").  Each
generator induces a portfolio map

    pi_i(p) = p_i * (1 + grad_phi(p) . (e_i - p)),

which sends the open simplex into its closure, and a dual coordinate map

    phi_i(theta) = theta_i - log(pi_i / pi_n),

which is the transport map of the associated cost.  The built-in families
(constant-weighted, diversity-weighted and its weighted variant, convex
combinations) carry analytic gradients and portfolio derivatives; anything
defined from ``phi`` alone falls back to central differences.

A generator is *regular* when the tangent-restricted Hessian of ``Phi`` is
strictly negative definite and the portfolio stays strictly inside the
simplex; :func:`check_regularity` audits both conditions pointwise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .simplex import (
    DualCoord,
    SimplexPoint,
    coord_array,
    from_primal,
    from_primal_many,
    point_array,
    psi as _psi,
    softmax_with_tail,
    to_primal,
)

__all__ = [
    "Generator",
    "Portfolio",
    "NonRegularError",
    "ZeroGenerator",
    "UniformCrossEntropy",
    "ConstantWeighted",
    "DiversityWeighted",
    "GeneralizedDiversityWeighted",
    "ConvexCombination",
    "CustomGenerator",
    "constant_weighted",
    "diversity_weighted",
    "generalized_diversity_weighted",
    "convex_combination",
    "portfolio",
    "dual_coord",
    "dual_euclidean",
    "jacobian_dual",
    "weights_from_gaussian",
    "check_regularity",
    "RegularityReport",
    "generator_from_config",
    "generator_from_json",
    "generator_to_json",
    "tangent_basis",
]


class NonRegularError(ValueError):
    """Raised when an operation needs regularity the generator lacks."""


def _pos(x) -> np.ndarray:
    """Lenient point coercion: generator internals must stay total so that
    line searches can probe (and reject) iterates that graze the boundary."""
    if isinstance(x, SimplexPoint):
        return x.p
    return np.asarray(x, dtype=float)


# ---------------------------------------------------------------------------
# finite-difference fallbacks
#
# phi is only defined on the simplex; derivatives use the scale-invariant
# extension phi(x / sum(x)), which is smooth on the positive orthant and
# agrees with every other extension on tangent directions.

def _fd_step(scale: float) -> float:
    return 1e-5 * max(1.0, scale)


def _fd_grad_on_simplex(func, p: np.ndarray) -> np.ndarray:
    ext = lambda x: func(x / x.sum())
    g = np.empty_like(p)
    for i in range(p.size):
        h = min(1e-6, p[i] / 2)
        e = np.zeros_like(p)
        e[i] = h
        g[i] = (ext(p + e) - ext(p - e)) / (2 * h)
    return g


def _fd_hess_on_simplex(func, p: np.ndarray) -> np.ndarray:
    ext = lambda x: func(x / x.sum())
    n = p.size
    h = np.minimum(1e-4, p / 4)
    H = np.empty((n, n))
    f0 = ext(p)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        H[i, i] = (ext(p + ei) - 2 * f0 + ext(p - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                ext(p + ei + ej) - ext(p + ei - ej) - ext(p - ei + ej) + ext(p - ei - ej)
            ) / (4 * h[i] * h[j])
    return H


class Generator:
    """Base class: implement ``log_gen``; everything else has a fallback."""

    name = "generator"

    def log_gen(self, p) -> float:
        """Value of the log generating function ``phi`` at ``p``."""
        raise NotImplementedError

    def euclid_grad(self, p) -> np.ndarray:
        """Euclidean gradient of ``phi`` (any smooth extension off the simplex)."""
        return _fd_grad_on_simplex(self.log_gen, _pos(p))

    def euclid_hess_phi(self, p) -> np.ndarray:
        """Euclidean Hessian of ``phi``; only its tangent restriction is used."""
        return _fd_hess_on_simplex(self.log_gen, _pos(p))

    def euclid_hess_Phi(self, p) -> np.ndarray:
        """Hessian of the generating function ``Phi = exp(phi)``.

        Meaningful on tangent directions ``sum(u) == 0`` only; regularity
        demands it be strictly negative definite there.
        """
        arr = _pos(p)
        g = self.euclid_grad(arr)
        H = self.euclid_hess_phi(arr)
        return np.exp(self.log_gen(arr)) * (H + np.outer(g, g))

    def portfolio(self, p) -> np.ndarray:
        """Portfolio weights ``pi_i = p_i (1 + grad . (e_i - p))`` at ``p``."""
        arr = _pos(p)
        g = self.euclid_grad(arr)
        return arr * (1.0 + g - g @ arr)

    def dpi_dtheta(self, theta) -> np.ndarray:
        """Derivative of the portfolio in exponential coordinates, shape (n, n-1).

        Generic route: the head rows are the Hessian of the potential
        f = phi + psi (whose gradient is the portfolio), taken by central
        second differences and symmetrized; the last row follows from the
        weights summing to one.
        """
        th = coord_array(theta)
        h = _fd_step(np.linalg.norm(th))
        m = th.size

        def f(x):
            return self.log_gen(softmax_with_tail(x)) + _psi(x)

        H = np.empty((m, m))
        f0 = f(th)
        for j in range(m):
            ej = np.zeros(m)
            ej[j] = h
            H[j, j] = (f(th + ej) - 2 * f0 + f(th - ej)) / h**2
            for i in range(j):
                ei = np.zeros(m)
                ei[i] = h
                H[i, j] = H[j, i] = (
                    f(th + ei + ej) - f(th + ei - ej) - f(th - ei + ej) + f(th - ei - ej)
                ) / (4 * h * h)
        return np.vstack([H, -H.sum(axis=0)])

    def dual_map_inverse(self, phi) -> np.ndarray | None:
        """Closed-form inverse of the dual coordinate map, if the family has one."""
        return None

    # -- batch variants (rows of P are simplex points) ---------------------

    def log_gen_many(self, P: np.ndarray) -> np.ndarray:
        return np.array([self.log_gen(row) for row in P])

    def portfolio_many(self, P: np.ndarray) -> np.ndarray:
        return np.array([self.portfolio(row) for row in P])

    def dpi_dtheta_many(self, Theta: np.ndarray) -> np.ndarray:
        return np.array([self.dpi_dtheta(row) for row in Theta])

    # -- config -------------------------------------------------------------

    def to_config(self) -> dict:
        raise NotImplementedError(f"{self.name} is not config-serializable")

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


class ZeroGenerator(Generator):
    """phi = 0: generates the market portfolio ``pi(p) = p`` (not regular)."""

    name = "market"

    def log_gen(self, p) -> float:
        return 0.0

    def euclid_grad(self, p) -> np.ndarray:
        return np.zeros(_pos(p).size)

    def euclid_hess_phi(self, p) -> np.ndarray:
        n = _pos(p).size
        return np.zeros((n, n))

    def portfolio(self, p) -> np.ndarray:
        return _pos(p).copy()

    def dpi_dtheta(self, theta) -> np.ndarray:
        pv = softmax_with_tail(coord_array(theta))
        return pv[:, None] * (np.eye(pv.size)[:, :-1] - pv[None, :-1])

    def log_gen_many(self, P) -> np.ndarray:
        return np.zeros(P.shape[0])

    def portfolio_many(self, P) -> np.ndarray:
        return np.asarray(P, dtype=float).copy()

    def to_config(self) -> dict:
        return {"kind": "market"}


class UniformCrossEntropy(Generator):
    """Equal-weight cross-entropy ``phi(p) = mean(log p)``, any dimension.

    Generates the equal-weighted portfolio; its dual coordinate map is the
    identity.  Used as the t = 0 end of displacement interpolation.
    """

    name = "equal"

    def log_gen(self, p) -> float:
        return float(np.mean(np.log(_pos(p))))

    def euclid_grad(self, p) -> np.ndarray:
        arr = _pos(p)
        return 1.0 / (arr.size * arr)

    def euclid_hess_phi(self, p) -> np.ndarray:
        arr = _pos(p)
        return np.diag(-1.0 / (arr.size * arr**2))

    def portfolio(self, p) -> np.ndarray:
        n = _pos(p).size
        return np.full(n, 1.0 / n)

    def dpi_dtheta(self, theta) -> np.ndarray:
        m = coord_array(theta).size
        return np.zeros((m + 1, m))

    def dual_map_inverse(self, phi) -> np.ndarray:
        return coord_array(phi).copy()

    def log_gen_many(self, P) -> np.ndarray:
        return np.mean(np.log(P), axis=1)

    def portfolio_many(self, P) -> np.ndarray:
        return np.full_like(P, 1.0 / P.shape[1])

    def dpi_dtheta_many(self, Theta) -> np.ndarray:
        N, m = Theta.shape
        return np.zeros((N, m + 1, m))

    def to_config(self) -> dict:
        return {"kind": "equal"}


class ConstantWeighted(Generator):
    """Cross-entropy generator ``phi(p) = sum_i w_i log p_i``, constant weights."""

    def __init__(self, weights):
        self.weights = point_array(weights)
        self.name = "cw[" + ",".join(f"{w:g}" for w in self.weights) + "]"

    def log_gen(self, p) -> float:
        return float(self.weights @ np.log(_pos(p)))

    def euclid_grad(self, p) -> np.ndarray:
        return self.weights / _pos(p)

    def euclid_hess_phi(self, p) -> np.ndarray:
        return np.diag(-self.weights / _pos(p) ** 2)

    def portfolio(self, p) -> np.ndarray:
        _pos(p)
        return self.weights.copy()

    def dpi_dtheta(self, theta) -> np.ndarray:
        n = self.weights.size
        return np.zeros((n, n - 1))

    def dual_map_inverse(self, phi) -> np.ndarray:
        w = self.weights
        return coord_array(phi) + np.log(w[:-1] / w[-1])

    def log_gen_many(self, P) -> np.ndarray:
        return np.log(P) @ self.weights

    def portfolio_many(self, P) -> np.ndarray:
        return np.broadcast_to(self.weights, P.shape).copy()

    def dpi_dtheta_many(self, Theta) -> np.ndarray:
        n = self.weights.size
        return np.zeros((Theta.shape[0], n, n - 1))

    def to_config(self) -> dict:
        return {"kind": "constant", "weights": self.weights.tolist()}


class DiversityWeighted(Generator):
    """Generator ``phi(p) = log(sum_j p_j^lam) / lam`` with ``0 < lam < 1``."""

    def __init__(self, lam: float):
        if not 0.0 < lam < 1.0:
            raise ValueError(f"lam must lie in (0, 1), got {lam}")
        self.lam = float(lam)
        self.name = f"dw[{self.lam:g}]"

    def log_gen(self, p) -> float:
        arr = _pos(p)
        return float(np.log(np.sum(arr**self.lam)) / self.lam)

    def euclid_grad(self, p) -> np.ndarray:
        arr = _pos(p)
        q = arr ** (self.lam - 1.0)
        return q / (q @ arr)

    def euclid_hess_phi(self, p) -> np.ndarray:
        arr = _pos(p)
        lam = self.lam
        S = np.sum(arr**lam)
        q = arr ** (lam - 1.0)
        return np.diag((lam - 1.0) * arr ** (lam - 2.0) / S) - lam * np.outer(q, q) / S**2

    def portfolio(self, p) -> np.ndarray:
        q = _pos(p) ** self.lam
        return q / q.sum()

    def dpi_dtheta(self, theta) -> np.ndarray:
        # pi in exponential coordinates is a softmax of lam * theta
        pi = softmax_with_tail(self.lam * coord_array(theta))
        return self.lam * pi[:, None] * (np.eye(pi.size)[:, :-1] - pi[None, :-1])

    def dual_map_inverse(self, phi) -> np.ndarray:
        return coord_array(phi) / (1.0 - self.lam)

    def log_gen_many(self, P) -> np.ndarray:
        return np.log(np.sum(P**self.lam, axis=1)) / self.lam

    def portfolio_many(self, P) -> np.ndarray:
        Q = P**self.lam
        return Q / Q.sum(axis=1, keepdims=True)

    def dpi_dtheta_many(self, Theta) -> np.ndarray:
        P = _points_of(Theta)
        Pi = self.portfolio_many(P)
        n = Pi.shape[1]
        eye = np.eye(n)[:, :-1]
        return self.lam * Pi[:, :, None] * (eye[None] - Pi[:, None, :-1])

    def to_config(self) -> dict:
        return {"kind": "diversity", "lam": self.lam}


class GeneralizedDiversityWeighted(Generator):
    """Weighted variant ``phi(p) = log(sum_j w_j p_j^lam) / lam``."""

    def __init__(self, weights, lam: float):
        w = np.asarray(weights, dtype=float)
        if np.any(w <= 0):
            raise ValueError("weights must be strictly positive")
        if not 0.0 < lam < 1.0:
            raise ValueError(f"lam must lie in (0, 1), got {lam}")
        self.w = w
        self.lam = float(lam)
        self.name = f"gdw[{self.lam:g}]"

    def log_gen(self, p) -> float:
        arr = _pos(p)
        return float(np.log(self.w @ arr**self.lam) / self.lam)

    def euclid_grad(self, p) -> np.ndarray:
        arr = _pos(p)
        q = self.w * arr ** (self.lam - 1.0)
        return q / (q @ arr)

    def euclid_hess_phi(self, p) -> np.ndarray:
        arr = _pos(p)
        lam = self.lam
        S = self.w @ arr**lam
        q = self.w * arr ** (lam - 1.0)
        return np.diag((lam - 1.0) * self.w * arr ** (lam - 2.0) / S) - lam * np.outer(q, q) / S**2

    def portfolio(self, p) -> np.ndarray:
        q = self.w * _pos(p) ** self.lam
        return q / q.sum()

    def dpi_dtheta(self, theta) -> np.ndarray:
        th = coord_array(theta)
        pi = softmax_with_tail(self.lam * th + np.log(self.w[:-1] / self.w[-1]))
        return self.lam * pi[:, None] * (np.eye(pi.size)[:, :-1] - pi[None, :-1])

    def dual_map_inverse(self, phi) -> np.ndarray:
        shift = np.log(self.w[:-1] / self.w[-1])
        return (coord_array(phi) + shift) / (1.0 - self.lam)

    def log_gen_many(self, P) -> np.ndarray:
        return np.log(P**self.lam @ self.w) / self.lam

    def portfolio_many(self, P) -> np.ndarray:
        Q = self.w * P**self.lam
        return Q / Q.sum(axis=1, keepdims=True)

    def dpi_dtheta_many(self, Theta) -> np.ndarray:
        P = _points_of(Theta)
        Pi = self.portfolio_many(P)
        n = Pi.shape[1]
        eye = np.eye(n)[:, :-1]
        return self.lam * Pi[:, :, None] * (eye[None] - Pi[:, None, :-1])

    def to_config(self) -> dict:
        return {"kind": "generalized_diversity", "lam": self.lam, "weights": self.w.tolist()}


class ConvexCombination(Generator):
    """Pointwise blend: phi = sum_k c_k phi_k, pi = sum_k c_k pi_k."""

    def __init__(self, generators, coeffs):
        if len(generators) == 0:
            raise ValueError("need at least one generator to combine")
        c = np.asarray(coeffs, dtype=float)
        if c.size != len(generators):
            raise ValueError("one coefficient per generator required")
        if np.any(c < 0) or abs(c.sum() - 1.0) > 1e-12:
            raise ValueError("coefficients must be a point of the closed simplex")
        self.parts = list(generators)
        self.coeffs = c
        self.name = "+".join(f"{ck:g}*{g.name}" for ck, g in zip(c, self.parts))

    def log_gen(self, p) -> float:
        return float(sum(c * g.log_gen(p) for c, g in zip(self.coeffs, self.parts)))

    def euclid_grad(self, p) -> np.ndarray:
        return sum(c * g.euclid_grad(p) for c, g in zip(self.coeffs, self.parts))

    def euclid_hess_phi(self, p) -> np.ndarray:
        return sum(c * g.euclid_hess_phi(p) for c, g in zip(self.coeffs, self.parts))

    def portfolio(self, p) -> np.ndarray:
        return sum(c * g.portfolio(p) for c, g in zip(self.coeffs, self.parts))

    def dpi_dtheta(self, theta) -> np.ndarray:
        return sum(c * g.dpi_dtheta(theta) for c, g in zip(self.coeffs, self.parts))

    def dual_map_inverse(self, phi):
        if len(self.parts) == 1:
            return self.parts[0].dual_map_inverse(phi)
        return None

    def log_gen_many(self, P) -> np.ndarray:
        return sum(c * g.log_gen_many(P) for c, g in zip(self.coeffs, self.parts))

    def portfolio_many(self, P) -> np.ndarray:
        return sum(c * g.portfolio_many(P) for c, g in zip(self.coeffs, self.parts))

    def dpi_dtheta_many(self, Theta) -> np.ndarray:
        return sum(c * g.dpi_dtheta_many(Theta) for c, g in zip(self.coeffs, self.parts))

    def to_config(self) -> dict:
        return {
            "kind": "combination",
            "coeffs": self.coeffs.tolist(),
            "components": [g.to_config() for g in self.parts],
        }


class CustomGenerator(Generator):
    """Generator defined by a callable phi; derivatives by central differences."""

    def __init__(self, func, grad=None, name="custom"):
        self._func = func
        self._grad = grad
        self.name = name

    def log_gen(self, p) -> float:
        return float(self._func(_pos(p)))

    def euclid_grad(self, p) -> np.ndarray:
        if self._grad is not None:
            return np.asarray(self._grad(_pos(p)), dtype=float)
        return super().euclid_grad(p)


def _points_of(Theta: np.ndarray) -> np.ndarray:
    """Batch inverse exponential-coordinate map, max-shifted row-wise."""
    return from_primal_many(Theta)


# ---------------------------------------------------------------------------
# constructors matching the config vocabulary

def constant_weighted(weights) -> ConstantWeighted:
    return ConstantWeighted(weights)


def diversity_weighted(lam: float) -> DiversityWeighted:
    return DiversityWeighted(lam)


def generalized_diversity_weighted(weights, lam: float) -> GeneralizedDiversityWeighted:
    return GeneralizedDiversityWeighted(weights, lam)


def convex_combination(generators, coeffs) -> ConvexCombination:
    return ConvexCombination(generators, coeffs)


def equal_weighted(n: int) -> ConstantWeighted:
    return ConstantWeighted(np.full(n, 1.0 / n))


@dataclass(frozen=True)
class Portfolio:
    """Portfolio weights: a point of the *closed* simplex.

    Boundary weights are legitimate for non-regular generators, so this is
    deliberately laxer than :class:`~lgeo.simplex.SimplexPoint`.
    """

    weights: np.ndarray

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float).copy()
        if np.any(w < -1e-9):
            raise NonRegularError(f"negative portfolio weight {w.min()!r}")
        s = w.sum()
        if abs(s - 1.0) > 1e-8:
            raise NonRegularError(f"portfolio weights sum to {s!r}")
        w = np.clip(w, 0.0, None) / np.clip(w, 0.0, None).sum()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype)

    @property
    def interior(self) -> bool:
        return bool(np.all(self.weights > 0.0))


# ---------------------------------------------------------------------------
# duality maps

def portfolio(gen: Generator, p) -> Portfolio:
    """Portfolio of ``gen`` at ``p``, validated to sum to one."""
    return Portfolio(gen.portfolio(p))


def portfolio_theta(gen: Generator, theta) -> np.ndarray:
    """Portfolio weights at the point with exponential coordinate ``theta``."""
    return gen.portfolio(softmax_with_tail(coord_array(theta)))


def dual_coord(gen: Generator, theta) -> DualCoord:
    """Dual coordinates ``phi_i = theta_i - log(pi_i / pi_n)`` of a point."""
    th = coord_array(theta)
    pi = portfolio_theta(gen, th)
    if np.any(pi <= 0.0):
        raise NonRegularError(
            f"{gen.name}: portfolio touches the simplex boundary; dual map undefined"
        )
    return DualCoord(th - (np.log(pi[:-1]) - np.log(pi[-1])), generator=gen)


def dual_euclidean(gen: Generator, p) -> SimplexPoint:
    """Dual Euclidean coordinates: the point with exponential coordinate -phi."""
    phi = dual_coord(gen, to_primal(p))
    return from_primal(-phi.phi)


def jacobian_dual(gen: Generator, theta) -> np.ndarray:
    """Central-difference Jacobian of the dual coordinate map at ``theta``."""
    th = coord_array(theta)
    h = _fd_step(np.linalg.norm(th))
    m = th.size
    J = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        J[:, j] = (dual_coord(gen, th + e).phi - dual_coord(gen, th - e).phi) / (2 * h)
    if abs(np.linalg.det(J)) < 1e-12:
        raise NonRegularError(f"{gen.name}: singular dual Jacobian (regularity violated)")
    return J


def weights_from_gaussian(a, b, lam: float) -> np.ndarray:
    """Coefficients making the dual map send N(a_i, s^2) means onto b_i.

    Returns the n-vector ``w`` with ``w_n = 1`` and
    ``w_i = exp((1 - lam) a_i - b_i)``, so that
    ``(1 - lam) a_i - log(w_i / w_n) = b_i`` holds exactly.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("a and b must have equal length n-1")
    return np.concatenate([np.exp((1.0 - lam) * a - b), [1.0]])


# ---------------------------------------------------------------------------
# regularity audit

_REL_EIG_CUT = 1e-10


def tangent_basis(n: int) -> np.ndarray:
    """Orthonormal basis of the tangent hyperplane sum(u) = 0, shape (n, n-1)."""
    A = np.eye(n) - np.full((n, n), 1.0 / n)
    q, _ = np.linalg.qr(A[:, : n - 1])
    return q


@dataclass
class RegularityReport:
    generator: str
    records: list
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        head = f"{self.generator}: {len(self.records)} points, "
        if self.passed:
            return head + "all regular"
        return head + f"{len(self.failures)} failures (first: {self.failures[0][1]})"


def check_regularity(gen: Generator, sample_points) -> RegularityReport:
    """Audit strict concavity of Phi and interiority of the portfolio.

    For each point the tangent-restricted Hessian of ``Phi`` must have all
    eigenvalues below ``-1e-10 * ||H||`` and the portfolio weights must lie
    strictly inside the simplex.  Failures are reported, not raised.
    """
    records = []
    failures = []
    for idx, p in enumerate(sample_points):
        arr = _pos(p)
        B = tangent_basis(arr.size)
        H = B.T @ gen.euclid_hess_Phi(arr) @ B
        H = (H + H.T) / 2
        eigs = np.linalg.eigvalsh(H)
        scale = np.max(np.abs(eigs))
        neg_def = bool(scale > 0 and eigs.max() < -_REL_EIG_CUT * scale)
        pi = gen.portfolio(arr)
        interior = bool(np.all(pi > 0.0) and np.all(pi < 1.0))
        rec = {
            "point": arr,
            "max_eig": float(eigs.max()),
            "eig_scale": float(scale),
            "hessian_neg_def": neg_def,
            "portfolio_interior": interior,
        }
        records.append(rec)
        if not neg_def:
            failures.append((idx, "tangent Hessian of Phi not strictly negative definite"))
        elif not interior:
            failures.append((idx, "portfolio leaves the open simplex"))
    return RegularityReport(generator=gen.name, records=records, failures=failures)


# ---------------------------------------------------------------------------
# config records

def generator_from_config(cfg: dict) -> Generator:
    """Build a generator from a config record (see each family's to_config)."""
    kind = cfg.get("kind")
    if kind == "market":
        return ZeroGenerator()
    if kind == "equal":
        return UniformCrossEntropy()
    if kind == "constant":
        return ConstantWeighted(cfg["weights"])
    if kind == "diversity":
        return DiversityWeighted(cfg["lam"])
    if kind == "generalized_diversity":
        return GeneralizedDiversityWeighted(cfg["weights"], cfg["lam"])
    if kind == "combination":
        parts = [generator_from_config(sub) for sub in cfg["components"]]
        return ConvexCombination(parts, cfg["coeffs"])
    raise ValueError(f"unknown generator kind {kind!r}")


def generator_to_json(gen: Generator) -> str:
    return json.dumps(gen.to_config())


def generator_from_json(doc: str) -> Generator:
    return generator_from_config(json.loads(doc))
