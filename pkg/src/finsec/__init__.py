"""finsec: finite section stability analysis for convolution type operators.

The package splits into five layers:

* :mod:`finsec.geometry` -- circular arcs, winding numbers, the lentiform
  spectral region;
* :mod:`finsec.symbols` -- step functions, slowly oscillating generators,
  composite multiplier symbols, fibers over infinity;
* :mod:`finsec.expr` -- operator expression trees;
* :mod:`finsec.analyzer` -- the stability and finite-section criteria;
* :mod:`finsec.numerics` -- discretizations, condition sweeps, truncated
  solves, spectra, and strong-limit probes;
* :mod:`finsec.cli_report` -- config-driven command line front end.
"""

from .geometry import (
    ArcCurve,
    CircularArc,
    CurveThroughOrigin,
    LensDomain,
    arc_contains,
    arc_point,
    f_param,
    lens_contains,
    triple_curve,
    winding_about_origin,
)
from .symbols import (
    CircleCluster,
    FiberAssignment,
    FiniteCluster,
    PCSOSymbol,
    PointCluster,
    SampledCluster,
    SOGenerator,
    StepFunction,
    chi_interval,
    chi_minus,
    chi_plus,
    constant_step,
    sample_fibers,
    so_constant,
    so_sqrt_log,
    so_phase,
    so_with_limit,
)
from .expr import Conv, Ident, Mult, OperatorExpr, Prod, ProjSeq, Scale, Sum
from .analyzer import (
    AnalyzerConfig,
    ConditionRecord,
    StabilityReport,
    SymbolMatrix2,
    analyze_stability,
    check_condition_a,
    check_condition_b,
    check_condition_c,
    det_nonvanishing_on_lens,
    fsm_check,
    fsm_wrap,
    fullline_sio_invertible,
    gk_one_sided,
    h_eta_image,
    n_eta_matrix,
    sio_pc_invertible,
    w_image,
)
from .numerics import (
    DenseOperator,
    Grid,
    KernelNotRepresentable,
    SweepResult,
    cond_sweep,
    convolution_oracle,
    dilation_factor,
    dilation_matrix,
    discretize,
    empirical_spectrum,
    finite_section_matrix,
    homomorphism_probe,
    instantiate,
    modulation_matrix,
    p_norm_estimate,
    shift_matrix,
    smallest_singular_value,
    solve_fsm,
)

__version__ = "0.1.0"
