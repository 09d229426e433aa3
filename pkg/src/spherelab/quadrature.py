"""Quadrature with certified polynomial exactness on [-1, 1] and on S^d.

Sphere rules are iterated product rules: a Gauss rule against the weight
(1 - t^2)^((d-2)/2) in each polar cosine and a uniform grid in azimuth.
A rule built for target degree D integrates every polynomial restricted to
the sphere of total degree <= D exactly; the per-axis node count carries a
two-node margin on top of the Gauss minimum.

L^p norms are computed as weighted node sums with exactly rounded (fsum)
accumulation, so the result does not depend on how the nodes are
partitioned across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import InfeasibleQuadratureError
from .harmonics import (
    _orthonormal_recurrence_offdiag,
    sphere_area,
    zonal_profile,
)

__all__ = [
    "LineRule",
    "SphereRule",
    "gauss_legendre",
    "gauss_gegenbauer",
    "sphere_rule",
    "lp_norm",
    "zonal_line_norm",
    "highest_weight_lp",
    "monomial_sphere_integral",
]

DEFAULT_NODE_BUDGET = 40_000_000


@dataclass(frozen=True)
class LineRule:
    """Quadrature rule on (-1, 1); exact through polynomial degree exact_degree."""

    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int


@dataclass(frozen=True)
class SphereRule:
    """Positive quadrature rule on S^d with certified polynomial exactness.

    nodes has shape (N, d+1); weights sum to the surface area of S^d.  On
    S^2 the product structure (polar x azimuth) is kept so coefficient
    vectors can be evaluated with separated sums.
    """

    dimension: int
    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int
    polar: LineRule | None = None
    azimuth_count: int | None = None

    @property
    def azimuth_angles(self):
        m = self.azimuth_count
        return 2.0 * math.pi * np.arange(m) / m


def gauss_legendre(n):
    """n-point Gauss-Legendre rule, exact through degree 2n - 1.

    Nodes are the roots of the degree-n Legendre polynomial, found by
    Newton iteration from the Chebyshev-like initial guess; convergence
    tolerance 1e-15 on the node update.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if n == 1:
        return LineRule(np.zeros(1), np.full(1, 2.0), 1)
    i = np.arange(1, n + 1)
    x = np.cos(math.pi * (i - 0.25) / (n + 0.5))
    for _ in range(100):
        pm1 = np.ones_like(x)
        p = x.copy()
        for k in range(2, n + 1):
            p, pm1 = ((2 * k - 1) * x * p - (k - 1) * pm1) / k, p
        dp = n * (pm1 - x * p) / (1.0 - x * x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    pm1 = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p, pm1 = ((2 * k - 1) * x * p - (k - 1) * pm1) / k, p
    dp = n * (pm1 - x * p) / (1.0 - x * x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # enforce the exact symmetry the rule has in exact arithmetic
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return LineRule(x, w, 2 * n - 1)


def gauss_gegenbauer(n, weight_exponent):
    """n-point Gauss rule for the weight (1 - t^2)^weight_exponent on [-1, 1].

    Built by the Golub-Welsch eigenvalue method from the three-term
    recurrence of the orthonormal ultraspherical polynomials; exact through
    polynomial degree 2n - 1 against the weight.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    e = float(weight_exponent)
    if e <= -1:
        raise ValueError("weight exponent must be > -1")
    alpha = e + 0.5
    mu0 = math.sqrt(math.pi) * math.gamma(e + 1.0) / math.gamma(e + 1.5)
    if n == 1:
        return LineRule(np.zeros(1), np.full(1, mu0), 1)
    off = np.array([_orthonormal_recurrence_offdiag(k, alpha) for k in range(1, n)])
    vals, vecs = eigh_tridiagonal(np.zeros(n), off)
    w = mu0 * vecs[0, :] ** 2
    x = 0.5 * (vals - vals[::-1])
    w = 0.5 * (w + w[::-1])
    return LineRule(x, w, 2 * n - 1)


def _polar_axis_count(target_degree):
    # ceil((D + 2) / 2) plus a 2-node margin
    return (target_degree + 2 + 1) // 2 + 2


def sphere_rule(d, target_degree, node_budget=DEFAULT_NODE_BUDGET):
    """Product quadrature rule on S^d exact for polynomials of total degree
    <= target_degree (d in {2, 3, 4, 5}).

    Recursive construction: S^d points are (sqrt(1 - t^2) y, t) with y on
    S^{d-1} and t a Gauss-Gegenbauer node for the weight
    (1 - t^2)^((d-2)/2); the innermost circle is sampled uniformly.
    """
    if d not in (2, 3, 4, 5):
        raise ValueError(f"unsupported dimension {d}; expected 2 <= d <= 5")
    if target_degree < 0:
        raise ValueError("target degree must be >= 0")
    n_axis = _polar_axis_count(target_degree)
    n_azimuth = 2 * n_axis
    total = n_axis ** (d - 1) * n_azimuth
    if total > node_budget:
        raise InfeasibleQuadratureError(
            f"sphere rule for d={d}, degree {target_degree} needs {total} nodes"
            f" (> budget {node_budget})")

    phi = 2.0 * math.pi * np.arange(n_azimuth) / n_azimuth
    nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    weights = np.full(n_azimuth, 2.0 * math.pi / n_azimuth)
    exact = n_azimuth - 1
    polar = None
    for dim in range(2, d + 1):
        line = gauss_gegenbauer(n_axis, (dim - 2) / 2.0)
        t = line.nodes
        s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
        # outer product: every (t_i, y_j) pair
        new = np.empty((t.size, nodes.shape[0], dim + 1))
        new[:, :, :dim] = s[:, None, None] * nodes[None, :, :]
        new[:, :, dim] = t[:, None]
        nodes = new.reshape(-1, dim + 1)
        weights = (line.weights[:, None] * weights[None, :]).reshape(-1)
        exact = min(exact, line.exact_degree)
        polar = line
    return SphereRule(
        dimension=d,
        nodes=nodes,
        weights=weights,
        exact_degree=exact,
        polar=polar if d == 2 else None,
        azimuth_count=n_azimuth if d == 2 else None,
    )


def _fsum(values):
    # exactly rounded accumulation; independent of any partitioning
    return math.fsum(values.tolist())


def lp_norm(f, rule, r):
    """L^r(S^d) norm of f over a SphereRule.

    f is either an array of values at rule.nodes or a callable mapping the
    (N, d+1) node array to values.  For finite r the caller is responsible
    for the rule being exact for |f|^r when exactness matters; r = inf
    returns the max over nodes (an empirical sup, a lower bound on the true
    one).
    """
    if r != math.inf and r < 1:
        raise ValueError("Lebesgue exponent must be >= 1")
    vals = f(rule.nodes) if callable(f) else np.asarray(f)
    a = np.abs(vals).astype(float).reshape(-1)
    if r == math.inf:
        return float(np.max(a))
    total = _fsum(rule.weights * a ** r)
    return float(total ** (1.0 / r))


def zonal_line_norm(d, degrees, r):
    """L^r norm of a product of co-axial unit zonal harmonics on S^d.

    The product depends only on t = <pole, x>, so the d-dimensional
    integral collapses to |S^{d-1}| times a weighted line integral; with r
    even the integrand is a polynomial and the Gauss-Gegenbauer rule sized
    to its degree is exact.
    """
    if r != int(r) or int(r) % 2 != 0 or r < 2:
        raise ValueError("zonal line norm requires an even Lebesgue exponent >= 2")
    r = int(r)
    degs = sorted(int(p) for p in degrees)
    if not degs:
        raise ValueError("need at least one factor")
    poly_degree = r * sum(degs)
    n = poly_degree // 2 + 2
    line = gauss_gegenbauer(n, (d - 2) / 2.0)
    prod = np.ones_like(line.nodes)
    for p in degs:
        prod = prod * zonal_profile(d, p, line.nodes)
    total = _fsum(line.weights * prod ** r) * sphere_area(d - 1)
    return float(total ** (1.0 / r))


def highest_weight_lp(d, n, r):
    """L^r(S^d) norm of the raw highest-weight harmonic (x1 + i x2)^n.

    Closed Beta/Gamma form of the integral of (x1^2 + x2^2)^(nr/2):
        ||e_n||_r^r = pi |S^{d-2}| B(nr/2 + 1, (d-1)/2),
    with |S^0| = 2.  Validated against sphere quadrature in the test suite
    before the experiments rely on it.  r = inf gives the true sup, 1.
    """
    if n < 0:
        raise ValueError("power must be >= 0")
    if d < 2:
        raise ValueError("dimension must be >= 2")
    if r == math.inf:
        return 1.0
    if r < 1:
        raise ValueError("Lebesgue exponent must be >= 1")
    area_dm2 = 2.0 if d == 2 else sphere_area(d - 2)
    log_beta = (math.lgamma(n * r / 2.0 + 1.0) + math.lgamma((d - 1) / 2.0)
                - math.lgamma(n * r / 2.0 + (d + 1) / 2.0))
    return float((math.pi * area_dm2 * math.exp(log_beta)) ** (1.0 / r))


def monomial_sphere_integral(d, exponents):
    """Exact integral of prod x_i^{a_i} over S^d (test oracle).

    Zero when any exponent is odd; otherwise 2 prod Gamma(b_i) / Gamma(sum b_i)
    with b_i = (a_i + 1) / 2.
    """
    a = list(exponents)
    if len(a) != d + 1:
        raise ValueError("need one exponent per coordinate")
    if any(int(x) != x or x < 0 for x in a):
        raise ValueError("exponents must be non-negative integers")
    if any(int(x) % 2 == 1 for x in a):
        return 0.0
    b = [(x + 1) / 2.0 for x in a]
    log_val = sum(math.lgamma(x) for x in b) - math.lgamma(sum(b))
    return 2.0 * math.exp(log_val)
