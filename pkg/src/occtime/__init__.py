"""occtime: occupation-time statistics of one-dimensional diffusions.

Exact moment tables (arcsine, skew Brownian, skew two-sided Bessel,
oscillating BM, Brownian spider, sticky BM), moment generating functions at
independent exponential times, occupation densities with a quadrature
moment oracle, path-level Monte Carlo cross-checks, and numerical Laplace
inversion.
"""

from .densities import (
    OccupationDensity,
    arcsine_cdf,
    arcsine_density,
    arcsine_pdf,
    density_moment_oracle,
    lamperti_cdf,
    lamperti_density,
    lamperti_pdf,
    skew_bm_cdf,
    skew_bm_density,
    skew_bm_pdf,
)
from .diffusions import (
    DiffusionSpec,
    QuadratureError,
    green_kernel,
    hitting_transform_deriv,
    integrate_green_m,
    make_custom,
    make_oscillating_bm,
    make_skew_bessel,
    make_skew_bm,
    make_sticky_bm,
    resolvent_mass,
    spec_from_params,
)
from .laplace import (
    InversionResult,
    TransformFn,
    invert,
    invert_sticky_b,
    sticky_b_transform,
    tauberian_check,
)
from .mgf import MgfValue, mgf_bessel_closed, mgf_exp_time, mgf_moment_consistency, mgf_two_sided
from .moments import (
    DkCoefficients,
    MomentTable,
    analytic_moments_for,
    bessel_moments_closed,
    bessel_moments_recursive,
    bm_moments,
    dk_quadrature,
    generic_laplace_moments,
    hausdorff_completely_monotone,
    kac_raw_moment_mc_check,
    oscillating_moments,
    skew_bm_moments,
    spider_moments,
    sticky_bhat,
    sticky_dk,
    sticky_h,
    sticky_tn,
)
from .special import bessel_i, bessel_k, gen_binomial, stirling1_unsigned, stirling2

__version__ = "0.1.0"
