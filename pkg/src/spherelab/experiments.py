"""Product-norm ratio experiments across degree grids.

A ratio sample measures ||prod f_i||_{L^r} for unit-L^2 eigenfunctions and
stores it next to the growth bound for that frequency combination; grids of
samples feed log-log exponent fits and empirical-constant summaries.  Each
sample picks the cheapest exact route available: closed Beta/Gamma forms
for highest-weight factors, the 1-D reduction for co-axial zonal factors,
Gaunt expansions for single-eigenspace pairs on S^2, and exact-degree
sphere quadrature otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import best_bilinear_constant, pair_product_norm
from .errors import BudgetExceededError, NumericalInvariantError
from .harmonics import (
    CoefficientVector,
    SpectralWindow,
    _philox_generator,
    basis_vector,
    highest_weight_values,
    north_pole,
    random_harmonic_s2,
    sqrt_laplace_eigenvalue,
    windowed_projector,
    zonal_profile,
    zonal_values,
)
from .quadrature import highest_weight_lp, lp_norm, sphere_rule, zonal_line_norm

__all__ = [
    "bilinear_bound",
    "trilinear_bound",
    "RatioSample",
    "ExperimentGrid",
    "FitResult",
    "fit_exponent",
    "ratio_grid",
    "trilinear_ratio_grid",
    "critical_p_scan",
    "windowed_band_experiment",
    "empirical_constant",
    "subrange_constants",
    "StudyOutcome",
]

FAMILIES = ("highest-weight", "zonal", "random")

# degree pairs above this go through quadrature instead of Gaunt expansions
_TENSOR_DEGREE_CAP = 64


def bilinear_bound(d, nu):
    """Growth factor of the two-factor estimate at the smaller frequency nu.

    nu^(1/4) for d = 2, nu^((d-2)/2) for d >= 4, and for d = 3 the
    half-power of nu carries a sqrt(log nu) factor, guarded by
    max(log nu, 1) so the bound never vanishes at nu = 1.
    """
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if nu < 1:
        raise ValueError(f"frequency must be >= 1, got {nu}")
    if d == 2:
        return float(nu) ** 0.25
    if d == 3:
        return math.sqrt(nu) * math.sqrt(max(math.log(nu), 1.0))
    return float(nu) ** ((d - 2) / 2.0)


def trilinear_bound(d, l1, l2, l3):
    """Growth factor of the three-factor estimate: (l1 l2 l3 / max)^((2d-3)/4)."""
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    if min(l1, l2, l3) < 1:
        raise ValueError("frequencies must be >= 1")
    return float(l1 * l2 * l3 / max(l1, l2, l3)) ** ((2 * d - 3) / 4.0)


@dataclass(frozen=True)
class RatioSample:
    """One measured product-norm ratio with its growth bound."""

    dimension: int
    family_f: str
    family_g: str
    p: int
    q: int
    lebesgue_r: float
    ratio: float
    bound: float
    family_h: str | None = None
    k: int | None = None
    quad_degree: int | None = None

    def __post_init__(self):
        if self.ratio < 0 or not math.isfinite(self.ratio):
            raise NumericalInvariantError(f"ratio must be finite and >= 0, got {self.ratio}")
        if self.bound <= 0:
            raise NumericalInvariantError(f"bound must be > 0, got {self.bound}")


@dataclass
class ExperimentGrid:
    """A canonically ordered sequence of ratio samples plus reproducibility data.

    timestamp is excluded from equality so reruns of the same configuration
    compare equal.
    """

    samples: list
    seed: int
    quad_exact_degree: int | None = None
    timestamp: str | None = None

    def __eq__(self, other):
        if not isinstance(other, ExperimentGrid):
            return NotImplemented
        return (self.samples == other.samples and self.seed == other.seed
                and self.quad_exact_degree == other.quad_exact_degree)


@dataclass(frozen=True)
class FitResult:
    """Fitted power-law exponent with goodness-of-fit diagnostics."""

    exponent: float
    intercept: float
    r_squared: float
    residual_max: float
    loglog_coefficient: float | None = None


def fit_exponent(samples, with_loglog=False):
    """Least squares on log(value) = exponent * log(nu) + intercept
    (+ loglog_coefficient * log(log(nu)) when requested).

    samples: sequence of (nu, value) with all entries positive; at least 3.
    """
    pts = [(float(x), float(y)) for x, y in samples]
    if len(pts) < 3:
        raise ValueError("need at least 3 samples to fit")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("samples must be positive")
    xs = np.array([x for x, _ in pts])
    ys = np.log(np.array([y for _, y in pts]))
    cols = [np.log(xs), np.ones_like(xs)]
    if with_loglog:
        if np.any(xs <= 1.0):
            raise ValueError("log-log regressor requires nu > 1")
        cols.append(np.log(np.log(xs)))
    design = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    resid = ys - design @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(
        exponent=float(coef[0]),
        intercept=float(coef[1]),
        r_squared=float(min(max(r2, 0.0), 1.0)),
        residual_max=float(np.max(np.abs(resid))),
        loglog_coefficient=float(coef[2]) if with_loglog else None,
    )


# ---------------------------------------------------------------------------
# measurement routes
# ---------------------------------------------------------------------------

def _hw_unit_norm(d, n, r):
    # L^r norm of the unit-L^2 highest-weight harmonic of power n
    return highest_weight_lp(d, n, r) / highest_weight_lp(d, n, 2)


def _draw_eigenvector(family, d, degree, seed, tag):
    if d != 2:
        raise ValueError(f"family '{family}' needs coefficient vectors, only built on S^2")
    if family == "random":
        gen = _philox_generator(seed, tag, degree)
        raw = gen.standard_normal(2 * (2 * degree + 1))
        coeffs = raw[0::2] + 1j * raw[1::2]
        coeffs /= np.linalg.norm(coeffs)
        return CoefficientVector({degree: coeffs})
    if family == "zonal":
        return basis_vector(degree, 0)
    if family == "highest-weight":
        return basis_vector(degree, degree)
    raise ValueError(f"unknown family '{family}'")


def _grid_values(cv, rule):
    vals = cv.evaluate_grid(rule.polar.nodes, rule.azimuth_angles)
    return vals.reshape(-1)


def _factor_values(family, d, degree, rule, seed, tag):
    """Unit-normalized factor values at the nodes of a sphere rule."""
    if family == "zonal":
        return zonal_values(d, degree, north_pole(d), rule.nodes)
    if family == "highest-weight":
        return highest_weight_values(degree, rule.nodes) / highest_weight_lp(d, degree, 2)
    if family == "random":
        return _grid_values(_draw_eigenvector(family, d, degree, seed, tag), rule)
    raise ValueError(f"unknown family '{family}'")


def _check_family(family, d):
    if family not in FAMILIES:
        raise ValueError(f"unknown family '{family}'; expected one of {FAMILIES}")
    if family == "random" and d != 2:
        raise ValueError("the random eigenspace family is only built on S^2")


def _quadrature_ratio(d, families, degrees, r, seed, pair_tag, node_budget):
    """Measure ||prod factors||_r by an exact-degree sphere rule."""
    if r == math.inf:
        # dense sampling: 10x the oscillation degree
        target = 10 * sum(degrees)
    else:
        if r != int(r) or int(r) % 2:
            raise ValueError("quadrature route needs an even integer Lebesgue exponent")
        target = int(r) * sum(degrees)
    rule = sphere_rule(d, target, node_budget=node_budget)
    prod = np.ones(rule.nodes.shape[0], dtype=complex)
    for i, (family, degree) in enumerate(zip(families, degrees)):
        prod *= _factor_values(family, d, degree, rule, seed, (pair_tag, i))
    return lp_norm(prod, rule, r), rule.exact_degree


def _pair_ratio(d, family_f, family_g, p, q, r, seed, pair_tag, node_budget):
    """ratio = ||f g||_r with unit factors; returns (ratio, quad_degree|None)."""
    fams = (family_f, family_g)
    if fams == ("highest-weight", "highest-weight"):
        return highest_weight_lp(d, p + q, r) / (
            highest_weight_lp(d, p, 2) * highest_weight_lp(d, q, 2)), None
    if fams == ("zonal", "zonal"):
        if r == math.inf:
            # co-axial zonal product peaks at the pole
            return float(zonal_profile(d, p, 1.0) * zonal_profile(d, q, 1.0)), None
        return zonal_line_norm(d, sorted((p, q)), r), None
    if d == 2 and r == 2 and max(p, q) <= _TENSOR_DEGREE_CAP:
        f = _draw_eigenvector(family_f, d, p, seed, (pair_tag, 0))
        g = _draw_eigenvector(family_g, d, q, seed, (pair_tag, 1))
        return pair_product_norm(f, g), None
    return _quadrature_ratio(d, fams, (p, q), r, seed, pair_tag, node_budget)


def ratio_grid(d, family_f, family_g, degree_pairs, lebesgue_r=2.0, seed=0,
               node_budget=None):
    """Measure the two-factor ratio over a grid of degree pairs.

    One sample per pair, bound = bilinear_bound(d, min(p, q)); samples are
    returned sorted by degrees, and the whole grid is a pure function of
    (arguments, seed).
    """
    _check_family(family_f, d)
    _check_family(family_g, d)
    r = float(lebesgue_r)
    budget = node_budget if node_budget is not None else _default_budget()
    samples = []
    quad_used = None
    for idx, (p, q) in enumerate(degree_pairs):
        p, q = int(p), int(q)
        try:
            ratio, quad_degree = _pair_ratio(d, family_f, family_g, p, q, r,
                                             seed, idx, budget)
        except BudgetExceededError as exc:
            raise BudgetExceededError(
                f"pair (p={p}, q={q}) of family ({family_f}, {family_g}): {exc}") from exc
        if quad_degree is not None:
            quad_used = max(quad_used or 0, quad_degree)
        samples.append(RatioSample(
            dimension=d, family_f=family_f, family_g=family_g, p=p, q=q,
            lebesgue_r=r, ratio=float(ratio),
            bound=bilinear_bound(d, max(min(p, q), 1)),
            quad_degree=quad_degree,
        ))
    samples.sort(key=lambda s: (s.p, s.q))
    return ExperimentGrid(samples=samples, seed=seed, quad_exact_degree=quad_used)


def _triple_ratio(d, families, degrees, r, seed, tag, node_budget):
    if families == ("highest-weight",) * 3:
        total = sum(degrees)
        denom = 1.0
        for n in degrees:
            denom *= highest_weight_lp(d, n, 2)
        return highest_weight_lp(d, total, r) / denom, None
    if families == ("zonal",) * 3:
        if r == math.inf:
            val = 1.0
            for n in degrees:
                val *= zonal_profile(d, n, 1.0)
            return float(val), None
        return zonal_line_norm(d, sorted(degrees), r), None
    return _quadrature_ratio(d, families, degrees, r, seed, tag, node_budget)


def trilinear_ratio_grid(d, families, degree_triples, lebesgue_r=2.0, seed=0,
                         node_budget=None):
    """Measure the three-factor ratio over a grid of degree triples.

    bound = trilinear_bound(d, p, q, k) at the sample degrees (clamped to 1).
    """
    families = tuple(families)
    if len(families) != 3:
        raise ValueError("need exactly three families")
    for fam in families:
        _check_family(fam, d)
    r = float(lebesgue_r)
    budget = node_budget if node_budget is not None else _default_budget()
    samples = []
    quad_used = None
    for idx, (p, q, k) in enumerate(degree_triples):
        p, q, k = int(p), int(q), int(k)
        try:
            ratio, quad_degree = _triple_ratio(d, families, (p, q, k), r, seed, idx, budget)
        except BudgetExceededError as exc:
            raise BudgetExceededError(
                f"triple (p={p}, q={q}, k={k}): {exc}") from exc
        if quad_degree is not None:
            quad_used = max(quad_used or 0, quad_degree)
        samples.append(RatioSample(
            dimension=d, family_f=families[0], family_g=families[1],
            family_h=families[2], p=p, q=q, k=k, lebesgue_r=r,
            ratio=float(ratio),
            bound=trilinear_bound(d, max(p, 1), max(q, 1), max(k, 1)),
            quad_degree=quad_degree,
        ))
    samples.sort(key=lambda s: (s.p, s.q, s.k))
    return ExperimentGrid(samples=samples, seed=seed, quad_exact_degree=quad_used)


def critical_p_scan(n_fixed, m_values, r_values, seed=0):
    """Scan ||e_{n+m}||_r / (||e_n||_2 ||e_m||_2) on S^2 over m and r.

    The growth exponent in m is expected to be 1/4 - 1/(2r): zero exactly
    at r = 2, where the higher frequency drops out of the bound.
    """
    n = int(n_fixed)
    samples = []
    for r in r_values:
        r = float(r)
        if r != math.inf and r < 2:
            raise ValueError("Lebesgue exponents below 2 are out of range for the scan")
        for m in m_values:
            m = int(m)
            ratio = highest_weight_lp(2, n + m, r) / (
                highest_weight_lp(2, n, 2) * highest_weight_lp(2, m, 2))
            samples.append(RatioSample(
                dimension=2, family_f="highest-weight", family_g="highest-weight",
                p=n, q=m, lebesgue_r=r, ratio=float(ratio),
                bound=bilinear_bound(2, max(min(n, m), 1)),
            ))
    samples.sort(key=lambda s: (s.p, s.q, s.lebesgue_r))
    return ExperimentGrid(samples=samples, seed=seed, quad_exact_degree=None)


# ---------------------------------------------------------------------------
# windowed projector experiment
# ---------------------------------------------------------------------------

def _window_degrees(center, width_multiple=3.0):
    lo = int(max(0, math.floor(center - width_multiple - 1)))
    hi = int(math.ceil(center + width_multiple + 1))
    return [l for l in range(lo, hi + 1)
            if abs(sqrt_laplace_eigenvalue(2, l) - center) <= width_multiple]


def _center_degree(center):
    return min(range(int(center) + 3), key=lambda l: abs(sqrt_laplace_eigenvalue(2, l) - center))


def _windowed_draw(center, draw_index, seed, which):
    degrees = _window_degrees(center)
    l_star = _center_degree(center)
    if draw_index == 0:
        cv = basis_vector(l_star, 0)
    elif draw_index == 1:
        cv = basis_vector(l_star, l_star)
    else:
        gen = _philox_generator(seed, draw_index, which)
        blocks = {}
        for l in degrees:
            raw = gen.standard_normal(2 * (2 * l + 1))
            blocks[l] = raw[0::2] + 1j * raw[1::2]
        cv = CoefficientVector(blocks)
    return windowed_projector(SpectralWindow(center), cv).unit()


def windowed_band_experiment(lam, mu, n_draws, seed=0, degree_budget=512,
                             node_budget=None):
    """Genuine spectral-window ratios on S^2.

    Pairs of coefficient vectors supported within three window widths of
    each center are passed through the Gaussian window, normalized, and
    their product norm measured by exact quadrature.  Draw 0 is the zonal
    pair at the center degrees and draw 1 the highest-weight pair, so the
    empirical max dominates the single-eigenspace concentrating families;
    the remaining draws are random.
    """
    lam, mu = float(lam), float(mu)
    if lam < 1 or mu < 1:
        raise ValueError("window centers must be >= 1")
    deg_f = _window_degrees(lam)
    deg_g = _window_degrees(mu)
    if max(deg_f + deg_g) > degree_budget:
        raise BudgetExceededError(
            f"window truncation reaches degree {max(deg_f + deg_g)}"
            f" (> budget {degree_budget})")
    budget = node_budget if node_budget is not None else _default_budget()
    rule = sphere_rule(2, 2 * (max(deg_f) + max(deg_g)), node_budget=budget)
    bound = bilinear_bound(2, min(lam, mu))
    tags = {0: "windowed-zonal", 1: "windowed-highest-weight"}
    samples = []
    for i in range(int(n_draws)):
        f = _windowed_draw(lam, i, seed, 0)
        g = _windowed_draw(mu, i, seed, 1)
        prod = _grid_values(f, rule) * _grid_values(g, rule)
        ratio = lp_norm(prod, rule, 2)
        fam = tags.get(i, "windowed-random")
        samples.append(RatioSample(
            dimension=2, family_f=fam, family_g=fam,
            p=_center_degree(lam), q=_center_degree(mu), lebesgue_r=2.0,
            ratio=float(ratio), bound=bound, quad_degree=rule.exact_degree,
        ))
    return ExperimentGrid(samples=samples, seed=seed,
                          quad_exact_degree=rule.exact_degree)


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------

def empirical_constant(grid):
    """sup over samples of measured ratio / growth bound."""
    if not grid.samples:
        raise ValueError("empty grid")
    return max(s.ratio / s.bound for s in grid.samples)


def subrange_constants(grid, ranges, key=lambda s: min(s.p, s.q)):
    """Empirical constant restricted to degree subranges [lo, hi]."""
    out = {}
    for lo, hi in ranges:
        vals = [s.ratio / s.bound for s in grid.samples if lo <= key(s) <= hi]
        if vals:
            out[(lo, hi)] = max(vals)
    return out


def _default_budget():
    from .quadrature import DEFAULT_NODE_BUDGET
    return DEFAULT_NODE_BUDGET


# ---------------------------------------------------------------------------
# named studies
# ---------------------------------------------------------------------------

@dataclass
class StudyOutcome:
    """Raw study results before report assembly."""

    grids: list
    fits: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)


def study_bilinear_sharpness(n_values, m_factor=8, lebesgue_r=2.0, seed=0):
    pairs = [(n, m_factor * n) for n in n_values]
    grid = ratio_grid(2, "highest-weight", "highest-weight", pairs, lebesgue_r, seed)
    fit = fit_exponent([(s.p, s.ratio) for s in grid.samples])
    constants = {
        "empirical_constant": empirical_constant(grid),
        "bound_exponent": 0.25,
    }
    return StudyOutcome(grids=[grid], fits={"ratio_vs_min_degree": fit}, constants=constants)


def study_frequency_disappearance(n_fixed=16, m_values=(256, 512, 1024), seed=0):
    pairs = [(n_fixed, m) for m in m_values]
    grid = ratio_grid(2, "highest-weight", "highest-weight", pairs, 2.0, seed)
    ratios = [s.ratio for s in grid.samples]
    fit = fit_exponent([(s.q, s.ratio) for s in grid.samples])
    asymptote = (2.0 * math.pi ** 1.5) ** -0.5 * float(n_fixed) ** 0.25
    constants = {
        "empirical_constant": empirical_constant(grid),
        "ratio_spread": max(ratios) / min(ratios),
        "monotone": 1.0 if all(a < b for a, b in zip(ratios, ratios[1:])) else 0.0,
        "final_ratio": ratios[-1],
        "derived_asymptote": asymptote,
        "bound_exponent": 0.0,
    }
    return StudyOutcome(grids=[grid], fits={"ratio_vs_m": fit}, constants=constants)


def study_zonal_sharpness(dimension, p_values, seed=0):
    pairs = [(p, p) for p in p_values]
    grid = ratio_grid(dimension, "zonal", "zonal", pairs, 2.0, seed)
    with_loglog = dimension == 3 and min(p_values) > 1
    fit = fit_exponent([(s.p, s.ratio) for s in grid.samples])
    fits = {"ratio_vs_degree": fit}
    if with_loglog:
        fits["ratio_vs_degree_loglog"] = fit_exponent(
            [(s.p, s.ratio) for s in grid.samples], with_loglog=True)
    constants = {
        "empirical_constant": empirical_constant(grid),
        "bound_exponent": 0.25 if dimension == 2 else (dimension - 2) / 2.0,
    }
    lo = min(p_values)
    sub = subrange_constants(grid, [(P, 2 * P) for P in (16, 32, 64) if P >= lo])
    for (a, b), val in sub.items():
        constants[f"subrange_constant_{a}_{b}"] = val
    if sub:
        constants["subrange_spread"] = max(sub.values()) / min(sub.values())
    return StudyOutcome(grids=[grid], fits=fits, constants=constants)


def study_trilinear(n_values, m_values, k_factor=8, seed=0):
    triples = [(n, m, k_factor * (n + m)) for n in n_values for m in m_values]
    grid = trilinear_ratio_grid(2, ("highest-weight",) * 3, triples, 2.0, seed)
    n_ref = sorted(n_values)[len(n_values) // 2]
    m_ref = sorted(m_values)[len(m_values) // 2]
    fit_n = fit_exponent([(s.p, s.ratio) for s in grid.samples if s.q == m_ref])
    fit_m = fit_exponent([(s.q, s.ratio) for s in grid.samples if s.p == n_ref])
    constants = {
        "empirical_constant": empirical_constant(grid),
        "bound_exponent": 0.25,
    }
    return StudyOutcome(grids=[grid], fits={"ratio_vs_n": fit_n, "ratio_vs_m": fit_m},
                        constants=constants)


def study_critical_exponent(n_fixed=2, m_values=(32, 64, 128, 256),
                            r_values=(2.0, 4.0), seed=0):
    grid = critical_p_scan(n_fixed, m_values, r_values, seed)
    fits = {}
    for r in r_values:
        r = float(r)
        pts = [(s.q, s.ratio) for s in grid.samples if s.lebesgue_r == r]
        fits[f"m_exponent_r{r:g}"] = fit_exponent(pts)
    constants = {
        "empirical_constant": empirical_constant(grid),
        "bound_exponent": 0.25,
    }
    return StudyOutcome(grids=[grid], fits=fits, constants=constants)


def study_best_constant(p_values=(4, 8, 16, 32), starts=8, tol=1e-10,
                        max_iters=500, seed=0, n_random_pairs=64):
    """Extremal bilinear constants on diagonal pairs, checked to dominate
    the zonal pair, the highest-weight pair, and a cloud of random pairs."""
    samples = []
    min_margin = math.inf
    for p in p_values:
        p = int(p)
        sampled = {
            "zonal": zonal_line_norm(2, (p, p), 2),
            "highest-weight": highest_weight_lp(2, 2 * p, 2) / highest_weight_lp(2, p, 2) ** 2,
        }
        extra = []
        for j in range(n_random_pairs):
            f = random_harmonic_s2(p, seed * 1_000_003 + 2 * j)
            g = random_harmonic_s2(p, seed * 1_000_003 + 2 * j + 1)
            sampled[f"random_{j}"] = pair_product_norm(f, g)
            extra.append((f, g))
        result = best_bilinear_constant(p, p, starts=starts, tol=tol,
                                        max_iters=max_iters, seed=seed,
                                        extra_starts=extra)
        margin = result.value - max(sampled.values())
        min_margin = min(min_margin, margin)
        samples.append(RatioSample(
            dimension=2, family_f="extremal", family_g="extremal", p=p, q=p,
            lebesgue_r=2.0, ratio=result.value, bound=bilinear_bound(2, p),
        ))
    grid = ExperimentGrid(samples=samples, seed=seed, quad_exact_degree=None)
    fit = fit_exponent([(s.p, s.ratio) for s in grid.samples])
    constants = {
        "empirical_constant": empirical_constant(grid),
        "min_dominance_margin": min_margin,
        "bound_exponent": 0.25,
    }
    return StudyOutcome(grids=[grid], fits={"value_vs_degree": fit}, constants=constants)


def study_windowed_projector(centers=(32.0, 64.0, 128.0), n_draws=64, seed=0):
    grids = []
    constants = {"bound_exponent": 0.25}
    per_scale = []
    for c in centers:
        grid = windowed_band_experiment(c, c, n_draws, seed=seed)
        grids.append(grid)
        c_emp = empirical_constant(grid)
        constants[f"empirical_constant_{c:g}"] = c_emp
        per_scale.append(c_emp)
    constants["empirical_constant"] = max(per_scale)
    constants["scale_spread"] = max(per_scale) / min(per_scale)
    return StudyOutcome(grids=grids, fits={}, constants=constants)
