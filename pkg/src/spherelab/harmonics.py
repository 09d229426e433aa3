"""Eigenfunction families on round spheres S^d and the spectral window.

The Laplacian on S^d has eigenvalue p(p+d-1) on the space of degree-p
spherical harmonics.  This module evaluates the concrete families the
experiments measure:

* zonal harmonics about a pole -- ultraspherical (Gegenbauer) profiles in
  the cosine of the polar angle, which concentrate on the two poles;
* highest-weight harmonics (x1 + i x2)^n, which concentrate on the
  equator x1^2 + x2^2 = 1;
* the orthonormal basis Y_l^m on S^2 (Condon-Shortley phase);
* random unit elements of a single eigenspace on S^2;
* the Gaussian multiplier chi(s) = exp(-s^2) acting per degree block,
  which realizes a smooth spectral window about a target frequency.

All family evaluators are L^2(S^d)-normalized so measured product norms
compare directly against growth bounds without bookkeeping.  Everything is
pure and immutable; evaluation is safe to run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SpherePoint",
    "Zonal",
    "HighestWeight",
    "BasisS2",
    "RandomS2",
    "HarmonicSpec",
    "CoefficientVector",
    "SpectralWindow",
    "sphere_area",
    "gegenbauer",
    "zonal_profile",
    "zonal_eval",
    "zonal_values",
    "highest_weight_eval",
    "highest_weight_values",
    "norm_legendre_table",
    "sph_basis_s2",
    "random_harmonic_s2",
    "sqrt_laplace_eigenvalue",
    "windowed_projector",
]

_POINT_NORM_SLACK = 1e-12


def sphere_area(d):
    """Surface area of the unit sphere S^d in R^{d+1}: 2 pi^((d+1)/2) / Gamma((d+1)/2)."""
    if d < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {d}")
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


@dataclass(frozen=True)
class SpherePoint:
    """A point on S^d, stored as Euclidean coordinates of unit norm."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        object.__setattr__(self, "coords", c)
        if c.ndim != 1 or c.size < 3:
            raise ValueError("sphere point needs >= 3 coordinates (d >= 2)")
        if abs(np.linalg.norm(c) - 1.0) > _POINT_NORM_SLACK:
            raise ValueError(f"coordinates are off the unit sphere: |x| = {np.linalg.norm(c)!r}")

    @property
    def dimension(self):
        return self.coords.size - 1


def north_pole(d):
    """The point (0, ..., 0, 1) on S^d."""
    c = np.zeros(d + 1)
    c[-1] = 1.0
    return SpherePoint(c)


@dataclass(frozen=True)
class Zonal:
    """Zonal family about a pole; rotation-invariant around the pole axis."""

    pole: SpherePoint


@dataclass(frozen=True)
class HighestWeight:
    """The equator-concentrating family (x1 + i x2)^n, unit-normalized."""


@dataclass(frozen=True)
class BasisS2:
    """Single orthonormal basis element Y_l^m on S^2."""

    order: int


@dataclass(frozen=True)
class RandomS2:
    """Random unit element of one eigenspace on S^2, drawn deterministically."""

    seed: int


@dataclass(frozen=True)
class HarmonicSpec:
    """One named member of an eigenfunction family on S^d."""

    dimension: int
    degree: int
    family: object

    def __post_init__(self):
        if self.dimension < 2:
            raise ValueError("dimension must be >= 2")
        if self.degree < 0:
            raise ValueError("degree must be >= 0")
        fam = self.family
        if isinstance(fam, (BasisS2, RandomS2)) and self.dimension != 2:
            raise ValueError(f"{type(fam).__name__} requires dimension 2")
        if isinstance(fam, BasisS2) and abs(fam.order) > self.degree:
            raise ValueError(f"|order| = {abs(fam.order)} exceeds degree {self.degree}")
        if isinstance(fam, Zonal) and fam.pole.dimension != self.dimension:
            raise ValueError("pole dimension does not match spec dimension")


# ---------------------------------------------------------------------------
# Gegenbauer / zonal evaluation
# ---------------------------------------------------------------------------

def gegenbauer(p, alpha, t):
    """Gegenbauer polynomial C_p^alpha(t) by the upward degree recurrence.

    Accepts scalar or array t in [-1, 1] (1e-12 slack).  The recurrence
        p C_p = 2 t (p + alpha - 1) C_{p-1} - (p + 2 alpha - 2) C_{p-2}
    is run upward in ordinary double precision; on [-1, 1] this direction
    keeps the relative error at the 1e-10 level up to degree ~4096.
    """
    if p < 0:
        raise ValueError(f"degree must be >= 0, got {p}")
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    tt = np.asarray(t, dtype=float)
    if np.any(np.abs(tt) > 1.0 + _POINT_NORM_SLACK):
        raise ValueError("argument outside [-1, 1]")
    tt = np.clip(tt, -1.0, 1.0)
    c_prev = np.ones_like(tt)
    if p == 0:
        return c_prev if isinstance(t, np.ndarray) else float(c_prev)
    c = 2.0 * alpha * tt
    for n in range(2, p + 1):
        c, c_prev = (2.0 * tt * (n + alpha - 1.0) * c - (n + 2.0 * alpha - 2.0) * c_prev) / n, c
    return c if isinstance(t, np.ndarray) else float(c)


def _orthonormal_recurrence_offdiag(n, alpha):
    # t p_{n-1} = a_n p_n + a_{n-1} p_{n-2} for polynomials orthonormal
    # against (1 - t^2)^(alpha - 1/2) on [-1, 1]
    return 0.5 * math.sqrt(n * (n + 2.0 * alpha - 1.0) / ((n + alpha) * (n + alpha - 1.0)))


def zonal_profile(d, p, t):
    """1-D profile q_p of the unit-L^2(S^d) zonal harmonic of degree p.

    Z_p(x) = q_p(<pole, x>).  Evaluated by the recurrence on polynomials
    orthonormal against the weight (1 - t^2)^((d-2)/2); each step keeps
    magnitudes at the scale of the running L^2 normalizer, so no overflow
    occurs at high degree.  Vectorized over t.
    """
    if d < 2:
        raise ValueError("dimension must be >= 2")
    if p < 0:
        raise ValueError("degree must be >= 0")
    alpha = (d - 1) / 2.0
    mu0 = math.sqrt(math.pi) * math.gamma(d / 2.0) / math.gamma((d + 1) / 2.0)
    tt = np.asarray(t, dtype=float)
    scalar = tt.ndim == 0
    tt = np.atleast_1d(tt)
    prev = np.zeros_like(tt)
    cur = np.full_like(tt, 1.0 / math.sqrt(mu0))
    a_prev = 0.0
    for n in range(1, p + 1):
        a_n = _orthonormal_recurrence_offdiag(n, alpha)
        cur, prev = (tt * cur - a_prev * prev) / a_n, cur
        a_prev = a_n
    out = cur / math.sqrt(sphere_area(d - 1))
    return float(out[0]) if scalar else out


def zonal_values(d, p, pole, points):
    """Unit zonal harmonic of degree p about `pole`, at an (..., d+1) array of points."""
    pc = pole.coords if isinstance(pole, SpherePoint) else np.asarray(pole, dtype=float)
    pts = np.asarray(points, dtype=float)
    t = np.clip(pts @ pc, -1.0, 1.0)
    return zonal_profile(d, p, t)


def zonal_eval(spec, x):
    """Evaluate a Zonal HarmonicSpec at a single point.

    Equals N_{d,p} C_p^{(d-1)/2}(<pole, x>) with N_{d,p} the L^2(S^d)
    normalizing constant.
    """
    if not isinstance(spec.family, Zonal):
        raise ValueError("spec does not describe a zonal harmonic")
    xc = x.coords if isinstance(x, SpherePoint) else np.asarray(x, dtype=float)
    if xc.size != spec.dimension + 1:
        raise ValueError(
            f"point dimension {xc.size - 1} does not match spec dimension {spec.dimension}")
    return float(zonal_values(spec.dimension, spec.degree, spec.family.pole, xc))


def highest_weight_values(n, points):
    """(x1 + i x2)^n at an (..., d+1) array of points, NOT normalized.

    Uses modulus-argument exponentiation: r^n e^{i n phi} with
    r = |x1 + i x2|, which stays stable at large n (r^n underflows to 0
    gracefully far from the equator).
    """
    if n < 0:
        raise ValueError("power must be >= 0")
    pts = np.asarray(points, dtype=float)
    x1, x2 = pts[..., 0], pts[..., 1]
    if n == 0:
        return np.ones_like(x1, dtype=complex)
    r = np.hypot(x1, x2)
    phi = np.arctan2(x2, x1)
    with np.errstate(divide="ignore"):
        logr = np.where(r > 0, np.log(np.where(r > 0, r, 1.0)), -np.inf)
    mod = np.exp(n * logr)
    return mod * np.exp(1j * n * phi)


def highest_weight_eval(d, n, x):
    """(x1 + i x2)^n at a single point of S^d."""
    xc = x.coords if isinstance(x, SpherePoint) else np.asarray(x, dtype=float)
    if xc.size != d + 1:
        raise ValueError(f"point dimension {xc.size - 1} does not match d = {d}")
    return complex(highest_weight_values(n, xc))


def sqrt_laplace_eigenvalue(d, p):
    """Frequency sqrt(p (p + d - 1)) of the degree-p eigenspace on S^d."""
    if d < 2 or p < 0:
        raise ValueError("need d >= 2 and p >= 0")
    return math.sqrt(p * (p + d - 1.0))


# ---------------------------------------------------------------------------
# Orthonormal S^2 basis
# ---------------------------------------------------------------------------

def norm_legendre_table(lmax, t):
    """Fully normalized associated Legendre values for all 0 <= m <= l <= lmax.

    Returns dict (l, m) -> array over t with the normalization
    Y_l^m(theta, phi) = table[(l, m)] * exp(i m phi), so that the Y_l^m are
    orthonormal on S^2.  Condon-Shortley phase is baked into the m-seed.
    The recurrences operate on normalized values, which keeps them stable
    to degrees in the thousands.
    """
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    tab = {}
    tab[(0, 0)] = np.full_like(tt, 1.0 / math.sqrt(4.0 * math.pi))
    s = np.sqrt(np.clip(1.0 - tt * tt, 0.0, None))
    for m in range(1, lmax + 1):
        tab[(m, m)] = -math.sqrt((2 * m + 1) / (2.0 * m)) * s * tab[(m - 1, m - 1)]
    for m in range(0, lmax + 1):
        if m + 1 <= lmax:
            tab[(m + 1, m)] = math.sqrt(2 * m + 3.0) * tt * tab[(m, m)]
        for l in range(m + 2, lmax + 1):
            a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            tab[(l, m)] = a * (tt * tab[(l - 1, m)] - b * tab[(l - 2, m)])
    return tab


def _legendre_signed(tab, l, m):
    # Y_l^{-m} = (-1)^m conj(Y_l^m): the theta part picks up (-1)^m for m < 0
    v = tab[(l, abs(m))]
    if m < 0 and (m & 1):
        return -v
    return v


def sph_basis_s2(l, m, x):
    """Orthonormal spherical harmonic Y_l^m (Condon-Shortley) at point(s) on S^2.

    x: array (..., 3).  The polar axis is x3; phi = atan2(x2, x1).
    """
    if abs(m) > l:
        raise ValueError(f"|m| = {abs(m)} exceeds l = {l}")
    pts = np.asarray(x.coords if isinstance(x, SpherePoint) else x, dtype=float)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    t = np.clip(pts[..., 2], -1.0, 1.0)
    phi = np.arctan2(pts[..., 1], pts[..., 0])
    tab = norm_legendre_table(l, t)
    vals = _legendre_signed(tab, l, m) * np.exp(1j * m * phi)
    return complex(vals[0]) if scalar else vals


# ---------------------------------------------------------------------------
# Coefficient vectors on S^2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientVector:
    """Truncated expansion over Y_l^m on S^2, stored per degree block.

    blocks[l] is a complex array of length 2l+1, orders -l..l.
    """

    blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for l, arr in self.blocks.items():
            a = np.asarray(arr, dtype=complex)
            if a.shape != (2 * l + 1,):
                raise ValueError(f"degree-{l} block must have length {2 * l + 1}")
            if not np.all(np.isfinite(a.view(float))):
                raise ValueError("coefficients must be finite")
            clean[int(l)] = a
        object.__setattr__(self, "blocks", clean)

    @property
    def max_degree(self):
        return max(self.blocks, default=0)

    @property
    def degrees(self):
        return sorted(self.blocks)

    def coefficient_norm(self):
        """Euclidean norm of the coefficients (= L^2 norm by orthonormality)."""
        return math.sqrt(sum(float(np.sum(np.abs(a) ** 2)) for a in self.blocks.values()))

    def scaled(self, c):
        return CoefficientVector({l: c * a for l, a in self.blocks.items()})

    def unit(self):
        nrm = self.coefficient_norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return self.scaled(1.0 / nrm)

    def __add__(self, other):
        out = {l: a.copy() for l, a in self.blocks.items()}
        for l, a in other.blocks.items():
            if l in out:
                out[l] = out[l] + a
            else:
                out[l] = a.copy()
        return CoefficientVector(out)

    def __eq__(self, other):
        if not isinstance(other, CoefficientVector):
            return NotImplemented
        if self.degrees != other.degrees:
            return False
        return all(np.array_equal(self.blocks[l], other.blocks[l]) for l in self.blocks)

    def evaluate_grid(self, t, phi):
        """Values on the product grid t x phi, shape (len(t), len(phi)).

        Separates the polar and azimuthal sums: A[i, m] = sum_l c_{l,m}
        P-bar_l^m(t_i), then a dense Fourier synthesis over phi.
        """
        tt = np.asarray(t, dtype=float)
        pp = np.asarray(phi, dtype=float)
        lmax = self.max_degree
        tab = norm_legendre_table(lmax, tt)
        orders = np.arange(-lmax, lmax + 1)
        A = np.zeros((tt.size, orders.size), dtype=complex)
        for l, arr in self.blocks.items():
            for m in range(-l, l + 1):
                c = arr[m + l]
                if c != 0:
                    A[:, m + lmax] += c * _legendre_signed(tab, l, m)
        E = np.exp(1j * np.outer(orders, pp))
        return A @ E

    def evaluate_at(self, points):
        """Values at an (..., 3) array of points (generic, non-grid path)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        t = np.clip(pts[..., 2], -1.0, 1.0)
        phi = np.arctan2(pts[..., 1], pts[..., 0])
        lmax = self.max_degree
        tab = norm_legendre_table(lmax, t)
        out = np.zeros(t.shape, dtype=complex)
        for l, arr in self.blocks.items():
            for m in range(-l, l + 1):
                c = arr[m + l]
                if c != 0:
                    out += c * _legendre_signed(tab, l, m) * np.exp(1j * m * phi)
        return out


def basis_vector(l, m):
    """CoefficientVector for the single basis element Y_l^m."""
    a = np.zeros(2 * l + 1, dtype=complex)
    a[m + l] = 1.0
    return CoefficientVector({l: a})


def _philox_generator(*key_parts):
    # counter-based stream: key packs the (possibly nested) integer parts
    # into 128 bits, so identical inputs give identical output everywhere
    def flatten(parts):
        for part in parts:
            if isinstance(part, (tuple, list)):
                yield from flatten(part)
            else:
                yield int(part)

    key = 0
    for part in flatten(key_parts):
        key = (key << 32) ^ (part & 0xFFFFFFFFFFFFFFFF)
    return np.random.Generator(np.random.Philox(key=key & ((1 << 128) - 1)))


def random_harmonic_s2(l, seed):
    """Random unit element of the degree-l eigenspace on S^2.

    Complex Gaussian coefficients normalized to unit Euclidean norm: the
    rotation-invariant distribution on the eigenspace sphere.  Deterministic
    for fixed (l, seed) via a counter-based Philox stream keyed by them.
    """
    if l < 0:
        raise ValueError("degree must be >= 0")
    gen = _philox_generator(seed, l)
    raw = gen.standard_normal(2 * (2 * l + 1))
    coeffs = raw[0::2] + 1j * raw[1::2]
    coeffs /= np.linalg.norm(coeffs)
    return CoefficientVector({l: coeffs})


# ---------------------------------------------------------------------------
# Spectral window
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralWindow:
    """Gaussian window of unit width about a center frequency.

    The multiplier at distance s from the center is exp(-s^2) in (0, 1].
    """

    center: float

    def __post_init__(self):
        if self.center < 1.0:
            raise ValueError("window center must be >= 1")

    def multiplier(self, frequency):
        s = frequency - self.center
        return math.exp(-s * s)


def windowed_projector(window, f):
    """Apply the spectral window to a CoefficientVector, degree block by block.

    Each degree-l block is multiplied by exp(-(sqrt(l(l+1)) - center)^2);
    linear in f.
    """
    out = {}
    for l, arr in f.blocks.items():
        out[l] = window.multiplier(sqrt_laplace_eigenvalue(2, l)) * arr
    return CoefficientVector(out)


def spec_coefficients(spec):
    """CoefficientVector for an S^2 HarmonicSpec (basis / random / zonal)."""
    if spec.dimension != 2:
        raise ValueError("coefficient vectors exist only on the S^2 path")
    fam = spec.family
    if isinstance(fam, BasisS2):
        return basis_vector(spec.degree, fam.order)
    if isinstance(fam, RandomS2):
        return random_harmonic_s2(spec.degree, fam.seed)
    if isinstance(fam, Zonal):
        if not np.allclose(fam.pole.coords, [0.0, 0.0, 1.0]):
            raise ValueError("only the north-pole zonal maps to the Y_l^m basis")
        return basis_vector(spec.degree, 0)
    if isinstance(fam, HighestWeight):
        return basis_vector(spec.degree, spec.degree)
    raise ValueError(f"unsupported family: {fam!r}")
