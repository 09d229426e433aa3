"""Acceptance suite: every headline criterion at its stated tolerance.

Each test prints one pass/fail line (run with ``pytest -s`` to see them on
success).  Budgets are wall-clock seconds on one commodity core.
"""

import math
import time

import numpy as np
import pytest

from spherelab import coupling as C
from spherelab import experiments as E
from spherelab import harmonics as H
from spherelab import quadrature as Q


def _report(number, name, ok, detail, elapsed, budget):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {number:>2} [{name}]: {status} ({detail}; "
          f"{elapsed:.1f}s of {budget:.0f}s budget)")
    assert ok, f"criterion {number} ({name}): {detail}"
    assert elapsed < budget, f"criterion {number} exceeded budget: {elapsed:.1f}s"


def test_criterion_01_bilinear_sharpness_s2():
    budget, t0 = 10.0, time.perf_counter()
    outcome = E.study_bilinear_sharpness([8, 16, 32, 64, 128, 256, 512], m_factor=8)
    fit = outcome.fits["ratio_vs_min_degree"]
    ok = abs(fit.exponent - 0.25) <= 0.02 and fit.r_squared >= 0.999
    _report(1, "bilinear sharpness d=2", ok,
            f"exponent {fit.exponent:.4f} (0.25 +- 0.02), r2 {fit.r_squared:.6f} (>= 0.999)",
            time.perf_counter() - t0, budget)


def test_criterion_02_frequency_disappearance():
    budget, t0 = 5.0, time.perf_counter()
    outcome = E.study_frequency_disappearance(16, (256, 512, 1024))
    grid = outcome.grids[0]
    ratios = [s.ratio for s in grid.samples]
    asymptote = outcome.constants["derived_asymptote"]
    monotone = outcome.constants["monotone"] == 1.0
    spread = outcome.constants["ratio_spread"]
    rel_gap = abs(ratios[-1] - asymptote) / asymptote
    ok = monotone and spread <= 1.02 and rel_gap <= 0.05
    _report(2, "frequency disappearance", ok,
            f"monotone {monotone}, max/min {spread:.4f} (<= 1.02), "
            f"final {ratios[-1]:.4f} vs asymptote {asymptote:.4f} ({100 * rel_gap:.2f}% <= 5%)",
            time.perf_counter() - t0, budget)


def test_criterion_03_zonal_sharpness_d4():
    budget, t0 = 30.0, time.perf_counter()
    outcome = E.study_zonal_sharpness(4, [8, 16, 32, 64, 128, 256])
    fit = outcome.fits["ratio_vs_degree"]
    ok = abs(fit.exponent - 1.0) <= 0.1
    _report(3, "zonal sharpness d=4", ok,
            f"exponent {fit.exponent:.4f} (1.0 +- 0.1)",
            time.perf_counter() - t0, budget)


def test_criterion_04_zonal_d3_branch():
    budget, t0 = 30.0, time.perf_counter()
    outcome = E.study_zonal_sharpness(3, [16, 23, 32, 45, 64, 91, 128])
    fit = outcome.fits["ratio_vs_degree"]
    sub = E.subrange_constants(outcome.grids[0], [(16, 32), (32, 64), (64, 128)])
    spread = max(sub.values()) / min(sub.values())
    ok = 0.45 <= fit.exponent <= 0.65 and spread <= 2.0
    _report(4, "zonal d=3 branch", ok,
            f"exponent {fit.exponent:.4f} (in [0.45, 0.65]), "
            f"subrange constant spread {spread:.3f} (<= 2)",
            time.perf_counter() - t0, budget)


def test_criterion_05_trilinear_s2():
    budget, t0 = 20.0, time.perf_counter()
    outcome = E.study_trilinear([8, 16, 32, 64, 128], [8, 16, 32, 64, 128], k_factor=8)
    fit_n = outcome.fits["ratio_vs_n"]
    fit_m = outcome.fits["ratio_vs_m"]
    c_emp = outcome.constants["empirical_constant"]
    grid = outcome.grids[0]
    dominated = all(s.ratio <= c_emp * s.bound * (1 + 1e-12) for s in grid.samples)
    ok = (abs(fit_n.exponent - 0.25) <= 0.03 and abs(fit_m.exponent - 0.25) <= 0.03
          and math.isfinite(c_emp) and dominated)
    _report(5, "trilinear estimate d=2", ok,
            f"exponent in n {fit_n.exponent:.4f}, in m {fit_m.exponent:.4f} "
            f"(0.25 +- 0.03), grid C_emp {c_emp:.4f} dominates all samples: {dominated}",
            time.perf_counter() - t0, budget)


def test_criterion_06_critical_exponent():
    budget, t0 = 10.0, time.perf_counter()
    outcome = E.study_critical_exponent(2, (32, 64, 128, 256), (2.0, 4.0))
    a2 = outcome.fits["m_exponent_r2"].exponent
    a4 = outcome.fits["m_exponent_r4"].exponent
    ok = abs(a2) <= 0.02 and abs(a4 - 0.125) <= 0.02
    _report(6, "critical Lebesgue exponent", ok,
            f"L2 m-exponent {a2:.4f} (|.| <= 0.02), L4 m-exponent {a4:.4f} (0.125 +- 0.02)",
            time.perf_counter() - t0, budget)


def test_criterion_07_coupling_correctness():
    budget, t0 = 60.0, time.perf_counter()
    lmax = 20
    line = Q.gauss_legendre(3 * lmax // 2 + 2)
    tab = H.norm_legendre_table(lmax, line.nodes)

    def signed(l, m):
        v = tab[(l, abs(m))]
        return -v if (m < 0 and m % 2) else v

    worst_gaunt = 0.0
    for l1 in range(lmax + 1):
        p1 = np.stack([signed(l1, m) for m in range(-l1, l1 + 1)])
        for l2 in range(lmax + 1):
            p2 = np.stack([signed(l2, m) for m in range(-l2, l2 + 1)])
            for L in range(abs(l1 - l2), min(l1 + l2, lmax) + 1):
                if (l1 + l2 + L) % 2:
                    continue
                for m1 in range(-l1, l1 + 1):
                    lo, hi = max(-l2, -L - m1), min(l2, L - m1)
                    if lo > hi:
                        continue
                    ms = np.arange(lo, hi + 1)
                    p3 = np.stack([signed(L, m1 + m2) for m2 in ms])
                    # azimuthal integral contributes exactly 2 pi at M = m1 + m2
                    quad = 2 * math.pi * np.einsum(
                        "mt,mt->m", p1[m1 + l1] * p2[ms + l2] * line.weights, p3)
                    formula = np.array([
                        C.gaunt_coeff(l1, m1, l2, int(m2), L, m1 + int(m2)) for m2 in ms])
                    worst_gaunt = max(worst_gaunt, float(np.max(np.abs(quad - formula))))

    # literal 2-D sphere-rule spot check of the same integrals
    rule = Q.sphere_rule(2, 3 * lmax)
    gen = np.random.default_rng(0)
    worst_spot = 0.0
    for _ in range(40):
        l1, l2 = int(gen.integers(0, lmax + 1)), int(gen.integers(0, lmax + 1))
        L = int(gen.integers(abs(l1 - l2), min(l1 + l2, lmax) + 1))
        m1 = int(gen.integers(-l1, l1 + 1))
        m2 = int(gen.integers(max(-l2, -L - m1), min(l2, L - m1) + 1))
        integrand = (H.sph_basis_s2(l1, m1, rule.nodes) * H.sph_basis_s2(l2, m2, rule.nodes)
                     * np.conj(H.sph_basis_s2(L, m1 + m2, rule.nodes)))
        quad = float(np.real(np.dot(rule.weights, integrand)))
        worst_spot = max(worst_spot, abs(quad - C.gaunt_coeff(l1, m1, l2, m2, L, m1 + m2)))

    worst_orth = 0.0
    for l1 in range(11):
        for l2 in range(11):
            for l3 in range(abs(l1 - l2), min(l1 + l2, 10) + 1):
                for m3 in range(-l3, l3 + 1):
                    total = 0.0
                    for m1 in range(-l1, l1 + 1):
                        m2 = -m1 - m3
                        if abs(m2) <= l2:
                            total += (2 * l3 + 1) * C.wigner_3j(l1, l2, l3, m1, m2, m3) ** 2
                    worst_orth = max(worst_orth, abs(total - 1.0))

    gen = np.random.default_rng(7)
    rule24 = Q.sphere_rule(2, 4 * 24)
    worst_pars = 0.0
    for _ in range(50):
        p, q = int(gen.integers(0, 25)), int(gen.integers(0, 25))
        f = H.random_harmonic_s2(p, int(gen.integers(0, 2 ** 32)))
        g = H.random_harmonic_s2(q, int(gen.integers(0, 2 ** 32)))
        parseval = C.product_expand(f, g).norm()
        vals = (f.evaluate_grid(rule24.polar.nodes, rule24.azimuth_angles)
                * g.evaluate_grid(rule24.polar.nodes, rule24.azimuth_angles)).reshape(-1)
        quad = Q.lp_norm(vals, rule24, 2)
        worst_pars = max(worst_pars, abs(parseval - quad) / quad)

    ok = worst_gaunt <= 1e-9 and worst_spot <= 1e-9 and worst_orth <= 1e-12 \
        and worst_pars <= 1e-9
    _report(7, "coupling correctness", ok,
            f"gaunt vs quadrature {worst_gaunt:.2e} (<= 1e-9, spot {worst_spot:.2e}), "
            f"3j orthogonality {worst_orth:.2e} (<= 1e-12), "
            f"parseval {worst_pars:.2e} (<= 1e-9)",
            time.perf_counter() - t0, budget)


def test_criterion_08_best_constant():
    budget, t0 = 300.0, time.perf_counter()
    outcome = E.study_best_constant(p_values=(4, 8, 16, 32), starts=8,
                                    n_random_pairs=64)
    fit = outcome.fits["value_vs_degree"]
    margin = outcome.constants["min_dominance_margin"]
    ok = margin >= -1e-12 and 0.20 <= fit.exponent <= 0.30
    _report(8, "best bilinear constant", ok,
            f"dominance margin {margin:.3e} (>= 0), growth exponent "
            f"{fit.exponent:.4f} (in [0.20, 0.30])",
            time.perf_counter() - t0, budget)


def test_criterion_09_quadrature():
    budget, t0 = 30.0, time.perf_counter()
    worst_area = 0.0
    for d in (2, 3, 4, 5):
        rule = Q.sphere_rule(d, 8)
        worst_area = max(worst_area, abs(rule.weights.sum() - H.sphere_area(d))
                         / H.sphere_area(d))
    lmax = 32
    rule = Q.sphere_rule(2, 2 * lmax)
    pairs = [(l, m) for l in range(lmax + 1) for m in range(-l, l + 1)]
    tab = H.norm_legendre_table(lmax, rule.polar.nodes)
    phi = rule.azimuth_angles
    vals = np.empty((len(pairs), rule.nodes.shape[0]), dtype=complex)
    for i, (l, m) in enumerate(pairs):
        theta_part = tab[(l, abs(m))]
        if m < 0 and m % 2:
            theta_part = -theta_part
        vals[i] = np.outer(theta_part, np.exp(1j * m * phi)).reshape(-1)
    gram = (vals * rule.weights) @ np.conj(vals.T)
    worst_orth = float(np.max(np.abs(gram - np.eye(len(pairs)))))
    ok = worst_area <= 1e-10 and worst_orth <= 1e-10
    _report(9, "quadrature exactness", ok,
            f"area error {worst_area:.2e} (<= 1e-10), "
            f"Y orthonormality l<=32 error {worst_orth:.2e} (<= 1e-10)",
            time.perf_counter() - t0, budget)


def test_criterion_10_windowed_projector():
    budget, t0 = 120.0, time.perf_counter()
    outcome = E.study_windowed_projector(centers=(32.0, 64.0, 128.0), n_draws=64)
    spread = outcome.constants["scale_spread"]
    dominated = True
    for grid in outcome.grids:
        c_emp = max(s.ratio / s.bound for s in grid.samples)
        dominated &= all(s.ratio <= c_emp * s.bound * (1 + 1e-12) for s in grid.samples)
    ok = dominated and spread <= 2.0
    _report(10, "windowed projector", ok,
            f"per-scale C_emp dominates draws: {dominated}, "
            f"cross-scale spread {spread:.3f} (<= 2)",
            time.perf_counter() - t0, budget)
