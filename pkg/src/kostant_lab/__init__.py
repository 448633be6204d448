"""Constructive solvers for the Kostant complex of hyperbolic integrable systems.

Coefficients of line-bundle-valued polarised forms are handled either as
truncated Taylor series (formal mode) or as explicitly evaluable separable
functions (exact mode); numerical checks run along the exact flows.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .functions import (  # noqa: E402
    FlatFactor,
    FlatHomotopy,
    HRational,
    PairFactor,
    QuadrantKernel,
    SeparableFunction,
)
from .hyperbolic2d import (  # noqa: E402
    flat_section_build,
    homotopy_flat_integral,
    smooth_function,
    solve_full_2d,
    solve_jets_closed_form,
    solve_jets_recursive,
    solve_poly_exact,
    symbolic_residual,
)
from .kostant import (  # noqa: E402
    PolarizedForm,
    SectionCoefficient,
    apply_dnabla,
    check_closed,
    solve_h1,
    solve_h2_dim6,
    solve_pair,
    solve_preserving,
    solve_top,
)
from .normal_forms import (  # noqa: E402
    WilliamsonSpec,
    build_model,
    connection_potential,
    flow,
    log_gamma,
)
from .series import TruncatedSeries, apply_X, cohom_operator, mul_h, series_ring_ops  # noqa: E402
from .verify import DerivativeProbe, GridSpec, ResidualReport, compare_series, flow_residual  # noqa: E402
