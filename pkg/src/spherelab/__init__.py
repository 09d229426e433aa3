"""spherelab: product norms of sphere eigenfunctions against growth bounds.

A desk-scale numerical laboratory: exact quadrature on S^d, eigenfunction
families that concentrate on equators and poles, the Wigner/Gaunt product
algebra on S^2, and experiment grids that fit growth exponents of measured
product-norm ratios.
"""

from .coupling import (
    BestConstantResult,
    ProductExpansion,
    TripleIndex,
    best_bilinear_constant,
    gaunt_coeff,
    product_expand,
    wigner_3j,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    InfeasibleQuadratureError,
    NumericalInvariantError,
    SphereLabError,
)
from .experiments import (
    ExperimentGrid,
    FitResult,
    RatioSample,
    bilinear_bound,
    critical_p_scan,
    empirical_constant,
    fit_exponent,
    ratio_grid,
    trilinear_bound,
    trilinear_ratio_grid,
    windowed_band_experiment,
)
from .harmonics import (
    CoefficientVector,
    HarmonicSpec,
    SpectralWindow,
    SpherePoint,
    gegenbauer,
    highest_weight_eval,
    random_harmonic_s2,
    sph_basis_s2,
    sphere_area,
    sqrt_laplace_eigenvalue,
    windowed_projector,
    zonal_eval,
)
from .quadrature import (
    LineRule,
    SphereRule,
    gauss_legendre,
    highest_weight_lp,
    lp_norm,
    sphere_rule,
    zonal_line_norm,
)
from .report import ReportDocument, emit_report, parse_report, plot_svg

__version__ = "0.1.0"
