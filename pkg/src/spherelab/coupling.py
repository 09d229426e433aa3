"""Exact product algebra for spherical harmonics on S^2.

Wigner 3j symbols drive everything here: Gaunt coefficients (triple-product
integrals of Y_l^m) are two 3j symbols and a dimension factor, products of
single-eigenspace functions expand through Gaunt sums, and the extremal
bilinear constant over an eigenspace pair is the top singular value of the
product map, located by alternating power iteration.

Two 3j evaluation paths:

* max l <= 200: exact big-integer arithmetic.  The alternating Racah sum
  is accumulated over a common denominator of cached factorials, so the
  only rounding happens in one final square root of an exact ratio
  (absolute error at the 1e-16 scale).
* max l > 200: the three-term recurrence in m2 (two-sided sweep matched at
  the turning point, normalized by the orthogonality sum, sign fixed by
  the boundary convention).  Float accuracy, ~1e-13.

A shared memo table caches scalar symbols under a canonical key (column
sort + m sign flip); dict.setdefault gives the insert-if-absent semantics
the concurrency model asks for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError
from .harmonics import CoefficientVector, _philox_generator

__all__ = [
    "TripleIndex",
    "wigner_3j",
    "gaunt_coeff",
    "gaunt_tensor",
    "ProductExpansion",
    "product_expand",
    "pair_product_norm",
    "BestConstantResult",
    "best_bilinear_constant",
]

EXACT_L_MAX = 200

_FACT = [1]


def _fact(n):
    while len(_FACT) <= n:
        _FACT.append(_FACT[-1] * len(_FACT))
    return _FACT[n]


@dataclass(frozen=True)
class TripleIndex:
    """Index set of one 3j symbol; selection predicates are computed, not assumed."""

    l1: int
    l2: int
    l3: int
    m1: int
    m2: int
    m3: int

    def __post_init__(self):
        if min(self.l1, self.l2, self.l3) < 0:
            raise ValueError("degrees must be >= 0")
        if abs(self.m1) > self.l1 or abs(self.m2) > self.l2 or abs(self.m3) > self.l3:
            raise ValueError("|m_i| must not exceed l_i")

    def triangle_ok(self):
        return abs(self.l1 - self.l2) <= self.l3 <= self.l1 + self.l2

    def m_sum_ok(self):
        return self.m1 + self.m2 + self.m3 == 0

    def selection_ok(self):
        return self.triangle_ok() and self.m_sum_ok()


def _big_ratio_sqrt(num, den):
    # sqrt(num / den) for positive big ints at full double precision,
    # without building a float from either huge operand directly
    nb = num.bit_length() - den.bit_length()
    if nb >= 0:
        q = (num << 80) // (den << nb)
    else:
        q = (num << (80 - nb)) // den
    return math.sqrt(math.ldexp(float(q), nb - 80))


def _threej_exact(l1, l2, l3, m1, m2, m3):
    # selection already verified by the caller
    kmin = max(0, -(l3 - l2 + m1), -(l3 - l1 - m2))
    kmax = min(l1 + l2 - l3, l1 - m1, l2 + m2)
    if kmax < kmin:
        return 0.0
    a2, a3, a4 = l1 + l2 - l3, l1 - m1, l2 + m2
    a5, a6 = l3 - l2 + m1, l3 - l1 - m2
    f1, f2, f3 = _fact(kmax), _fact(a2 - kmin), _fact(a3 - kmin)
    f4, f5, f6 = _fact(a4 - kmin), _fact(a5 + kmax), _fact(a6 + kmax)
    snum = 0
    for k in range(kmin, kmax + 1):
        term = ((f1 // _fact(k)) * (f2 // _fact(a2 - k)) * (f3 // _fact(a3 - k))
                * (f4 // _fact(a4 - k)) * (f5 // _fact(a5 + k)) * (f6 // _fact(a6 + k)))
        snum = snum - term if (k & 1) else snum + term
    if snum == 0:
        return 0.0
    num = (_fact(l1 + l2 - l3) * _fact(l1 - l2 + l3) * _fact(-l1 + l2 + l3)
           * _fact(l1 - m1) * _fact(l1 + m1) * _fact(l2 - m2) * _fact(l2 + m2)
           * _fact(l3 - m3) * _fact(l3 + m3) * snum * snum)
    den = _fact(l1 + l2 + l3 + 1) * (f1 * f2 * f3 * f4 * f5 * f6) ** 2
    mag = _big_ratio_sqrt(num, den)
    negative = ((l1 - l2 - m3) & 1) ^ (snum < 0)
    return -mag if negative else mag


def _threej_m_row(l1, l2, l3, m1):
    """f(m2) = 3j(l1,l2,l3; m1,m2,-m1-m2) over the full admissible m2 range.

    Two-sided three-term recurrence: forward from m2_min, backward from
    m2_max, matched at the turning point; normalized by
    sum_m2 f^2 = 1/(2 l1 + 1) and signed by sign(f(m2_max)) = (-1)^(l2-l3-m1).
    Returns (m2_min, values).
    """
    m2_min = max(-l2, -l3 - m1)
    m2_max = min(l2, l3 - m1)
    n = m2_max - m2_min + 1
    if n <= 0:
        return m2_min, np.zeros(0)

    def coupling(m2):
        m3 = -m1 - m2
        v = (l2 + m2) * (l2 - m2 + 1) * (l3 - m3) * (l3 + m3 + 1)
        return math.sqrt(v) if v > 0 else 0.0

    def diagonal(m2):
        m3 = -m1 - m2
        return (l2 * (l2 + 1.0) + l3 * (l3 + 1.0) - l1 * (l1 + 1.0) + 2.0 * m2 * m3)

    f = np.zeros(n)
    f[0] = 1.0
    match = n - 1
    if n > 1:
        c = coupling(m2_min + 1)
        f[1] = -diagonal(m2_min) / c if c != 0 else 1.0
    for i in range(1, n - 1):
        m2 = m2_min + i
        c_next = coupling(m2 + 1)
        f[i + 1] = -(diagonal(m2) * f[i] + coupling(m2) * f[i - 1]) / c_next
        if abs(f[i + 1]) > 1e250:
            f[: i + 2] /= abs(f[i + 1])
        if abs(f[i + 1]) < abs(f[i]):
            match = i + 1
            break
    if match < n - 1:
        g = np.zeros(n)
        g[n - 1] = 1.0
        c = coupling(m2_max)
        g[n - 2] = -diagonal(m2_max) / c if c != 0 else 1.0
        for i in range(n - 2, match, -1):
            m2 = m2_min + i
            c_prev = coupling(m2)
            g[i - 1] = -(diagonal(m2) * g[i] + coupling(m2 + 1) * g[i + 1]) / c_prev
            if abs(g[i - 1]) > 1e250:
                g[i - 1:] /= abs(g[i - 1])
        if g[match] != 0:
            f[match:] = g[match:] * (f[match] / g[match])
    f /= np.linalg.norm(f) * math.sqrt(2.0 * l1 + 1.0)
    want_negative = bool((l2 - l3 - m1) & 1)
    if f[-1] != 0 and (f[-1] < 0) != want_negative:
        f = -f
    return m2_min, f


_MEMO = {}
_MEMO_LIMIT = 4_000_000


_PERMS = (
    ((0, 1, 2), 0), ((1, 2, 0), 0), ((2, 0, 1), 0),
    ((0, 2, 1), 1), ((1, 0, 2), 1), ((2, 1, 0), 1),
)


def _canonical(l1, l2, l3, m1, m2, m3):
    # canonical representative under column permutations and global m
    # negation; odd images pick up (-1)^(l1+l2+l3)
    ls = (l1, l2, l3)
    ms = (m1, m2, m3)
    best = None
    best_parity = 0
    for perm, parity in _PERMS:
        for flip in (0, 1):
            if flip:
                cand = (ls[perm[0]], ls[perm[1]], ls[perm[2]],
                        -ms[perm[0]], -ms[perm[1]], -ms[perm[2]])
            else:
                cand = (ls[perm[0]], ls[perm[1]], ls[perm[2]],
                        ms[perm[0]], ms[perm[1]], ms[perm[2]])
            if best is None or cand < best:
                best = cand
                best_parity = parity ^ flip
    sign_flips = best_parity & ((l1 + l2 + l3) & 1)
    return best, -1.0 if sign_flips else 1.0


def wigner_3j(l1, l2, l3, m1, m2, m3):
    """Wigner 3j symbol for integer arguments.

    Invalid selections (triangle, m-sum, |m| > l) return 0 by definition.
    Exact big-integer evaluation for max l <= 200, the floating m-recurrence
    above.
    """
    l1, l2, l3 = int(l1), int(l2), int(l3)
    m1, m2, m3 = int(m1), int(m2), int(m3)
    if min(l1, l2, l3) < 0:
        return 0.0
    if m1 + m2 + m3 != 0:
        return 0.0
    if l3 < abs(l1 - l2) or l3 > l1 + l2:
        return 0.0
    if abs(m1) > l1 or abs(m2) > l2 or abs(m3) > l3:
        return 0.0
    key, sign = _canonical(l1, l2, l3, m1, m2, m3)
    cached = _MEMO.get(key)
    if cached is not None:
        return sign * cached
    a1, a2, a3, b1, b2, b3 = key
    if max(a1, a2, a3) <= EXACT_L_MAX:
        value = _threej_exact(a1, a2, a3, b1, b2, b3)
    else:
        m2_min, row = _threej_m_row(a1, a2, a3, b1)
        value = float(row[b2 - m2_min])
    if len(_MEMO) >= _MEMO_LIMIT:
        _MEMO.clear()
    _MEMO.setdefault(key, value)
    return sign * value


def gaunt_coeff(l1, m1, l2, m2, L, M):
    """Integral of Y_l1^m1 Y_l2^m2 conj(Y_L^M) over S^2.

    sqrt((2l1+1)(2l2+1)(2L+1)/(4 pi)) 3j(l1,l2,L;0,0,0) 3j(l1,l2,L;m1,m2,-M)
    times (-1)^M; zero whenever M != m1 + m2 or the triangle fails.
    """
    if M != m1 + m2:
        return 0.0
    if L < abs(l1 - l2) or L > l1 + l2:
        return 0.0
    if (l1 + l2 + L) % 2 != 0:
        return 0.0
    pref = math.sqrt((2 * l1 + 1) * (2 * l2 + 1) * (2 * L + 1) / (4.0 * math.pi))
    val = pref * wigner_3j(l1, l2, L, 0, 0, 0) * wigner_3j(l1, l2, L, m1, m2, -M)
    return -val if (M & 1) else val


_TENSOR_CACHE = {}


def gaunt_tensor(p, q):
    """All Gaunt coefficients for a degree pair: dict L -> matrix over (m1, m2).

    tensor[L][m1 + p, m2 + q] = gaunt_coeff(p, m1, q, m2, L, m1 + m2).
    Cached per (p, q); insert-if-absent on the shared table.
    """
    key = (int(p), int(q))
    cached = _TENSOR_CACHE.get(key)
    if cached is not None:
        return cached
    p, q = key
    out = {}
    for L in range(abs(p - q), p + q + 1):
        if (p + q + L) % 2 != 0:
            continue
        mat = np.zeros((2 * p + 1, 2 * q + 1))
        for m1 in range(-p, p + 1):
            lo = max(-q, -L - m1)
            hi = min(q, L - m1)
            for m2 in range(lo, hi + 1):
                mat[m1 + p, m2 + q] = gaunt_coeff(p, m1, q, m2, L, m1 + m2)
        out[L] = mat
    return _TENSOR_CACHE.setdefault(key, out)


@dataclass(frozen=True)
class ProductExpansion:
    """Expansion of a product of two single-eigenspace functions over Y_L^M."""

    p: int
    q: int
    blocks: dict  # L -> complex array of length 2L+1

    def coefficient(self, L, M):
        arr = self.blocks.get(L)
        if arr is None or abs(M) > L:
            return 0j
        return complex(arr[M + L])

    def norm(self):
        """L^2 norm of the product, by Parseval over the coefficients."""
        return math.sqrt(sum(float(np.sum(np.abs(a) ** 2)) for a in self.blocks.values()))


def _single_degree(cv):
    degs = [l for l, a in cv.blocks.items() if np.any(a != 0)]
    if len(degs) != 1:
        raise ValueError("product expansion needs factors supported on a single degree")
    return degs[0]


def product_expand(f, g):
    """Expand the pointwise product f g over the orthonormal basis.

    Both factors must be supported on a single degree; the coefficients
    come out of Gaunt sums, so Parseval against quadrature is exact up to
    roundoff.
    """
    p = _single_degree(f)
    q = _single_degree(g)
    fv = f.blocks[p]
    gv = g.blocks[q]
    tensor = gaunt_tensor(p, q)
    blocks = {}
    for L, mat in tensor.items():
        weighted = mat * np.outer(fv, gv)
        coeffs = np.zeros(2 * L + 1, dtype=complex)
        # anti-diagonal sums: M = m1 + m2
        flipped = weighted[:, ::-1]
        for M in range(-L, L + 1):
            coeffs[M + L] = np.trace(flipped, offset=q - p - M)
        blocks[L] = coeffs
    return ProductExpansion(p=p, q=q, blocks=blocks)


def pair_product_norm(f, g):
    """||f g||_{L^2(S^2)} for single-eigenspace factors, via the expansion."""
    return product_expand(f, g).norm()


# ---------------------------------------------------------------------------
# Extremal bilinear constant
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BestConstantResult:
    """Outcome of the alternating maximization of ||f g||_2 over a degree pair."""

    value: float
    f: CoefficientVector
    g: CoefficientVector
    converged: bool
    iterations: int


def _stacked_product_matrix(tensor, g, p, q):
    # matrix of f -> (f g) coefficients, rows packed over (L, M)
    rows = []
    for L in sorted(tensor):
        mat = tensor[L]
        block = np.zeros((2 * L + 1, 2 * p + 1), dtype=complex)
        for m1 in range(-p, p + 1):
            lo = max(-q, -L - m1)
            hi = min(q, L - m1)
            ms = np.arange(lo, hi + 1)
            block[ms + m1 + L, m1 + p] = mat[m1 + p, ms + q] * g[ms + q]
        rows.append(block)
    return np.vstack(rows)


def _top_right_singular(mat, v0, iters=200, tol=1e-13):
    # power iteration on the normal operator mat^H mat
    normal = mat.conj().T @ mat
    v = v0 / np.linalg.norm(v0)
    prev = 0.0
    for _ in range(iters):
        w = normal @ v
        lam = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        v = w / nw
        if abs(lam - prev) <= tol * max(lam, 1e-300):
            break
        prev = lam
    sigma = float(np.linalg.norm(mat @ v))
    return sigma, v


def best_bilinear_constant(p, q, starts=8, tol=1e-10, max_iters=500, seed=0,
                           extra_starts=()):
    """Approximate sup of ||f g||_2 over unit f, g in the degree-(p, q) pair.

    Alternating maximization: with g frozen the map f -> f g is linear, so
    the optimal f is its top right singular vector (power iteration on the
    normal operator); then the roles swap.  The objective is nondecreasing
    along the alternation, multistart takes the max, and the reported value
    dominates every start -- including the highest-weight and zonal pairs,
    which are always seeded, and any caller-supplied extra_starts pairs.

    Raises no error on slow convergence: if the iteration budget runs out
    before the tolerance is met the best value found is returned flagged
    (converged=False).
    """
    p, q = int(p), int(q)
    if p > 64 or q > 64:
        raise BudgetExceededError(f"degree pair ({p}, {q}) exceeds the desk-scale guard of 64")
    tensor = gaunt_tensor(p, q)
    tensor_swapped = gaunt_tensor(q, p)

    def unit_basis(size, idx):
        v = np.zeros(size, dtype=complex)
        v[idx] = 1.0
        return v

    start_pairs = [
        (unit_basis(2 * p + 1, 2 * p), unit_basis(2 * q + 1, 2 * q)),  # highest weight
        (unit_basis(2 * p + 1, p), unit_basis(2 * q + 1, q)),          # zonal
    ]
    for fs, gs in extra_starts:
        fv = fs.blocks[_single_degree(fs)] if isinstance(fs, CoefficientVector) else np.asarray(fs, dtype=complex)
        gv = gs.blocks[_single_degree(gs)] if isinstance(gs, CoefficientVector) else np.asarray(gs, dtype=complex)
        start_pairs.append((fv / np.linalg.norm(fv), gv / np.linalg.norm(gv)))
    gen = _philox_generator(seed, p, q)
    while len(start_pairs) < starts + len(extra_starts) + 2:
        raw_f = gen.standard_normal(2 * (2 * p + 1))
        fv = raw_f[0::2] + 1j * raw_f[1::2]
        raw_g = gen.standard_normal(2 * (2 * q + 1))
        gv = raw_g[0::2] + 1j * raw_g[1::2]
        start_pairs.append((fv / np.linalg.norm(fv), gv / np.linalg.norm(gv)))

    best_val = -1.0
    best_pair = None
    all_converged = True
    total_iters = 0
    for f0, g0 in start_pairs:
        f, g = f0.copy(), g0.copy()
        value = float(np.linalg.norm(_stacked_product_matrix(tensor, g, p, q) @ f))
        converged = False
        it = 0
        while it < max_iters:
            it += 1
            mat_g = _stacked_product_matrix(tensor, g, p, q)
            sig_f, f = _top_right_singular(mat_g, f)
            mat_f = _stacked_product_matrix(tensor_swapped, f, q, p)
            sig_g, g = _top_right_singular(mat_f, g)
            new_value = max(value, sig_f, sig_g)
            if new_value - value <= tol:
                value = new_value
                converged = True
                break
            value = new_value
        total_iters += it
        if not converged:
            all_converged = False
        if value > best_val:
            best_val = value
            best_pair = (f, g)
    f_best, g_best = best_pair
    return BestConstantResult(
        value=best_val,
        f=CoefficientVector({p: f_best}),
        g=CoefficientVector({q: g_best}),
        converged=all_converged,
        iterations=total_iters,
    )
