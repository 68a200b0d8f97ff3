"""Wiener-Hopf solvers for fractional boundary problems of ``(1 - Delta)^a`` on the half-space."""
from .errors import (
    AccuracyWarning,
    DomainError,
    EvaluationError,
    ExponentFitError,
    IllConditionedTraceWarning,
    InvalidArgumentError,
    ModeFailures,
    MuhsError,
    OracleFailure,
    TruncationError,
)
from .halfline import (
    GridFn,
    HalfLineGrid,
    ModeParams,
    extend_by_zero,
    forward_op,
    forward_op_wholeline,
    restrict,
    xi_minus_plus_neg,
    xi_plus_neg,
)
from .oracle import (
    ExponentFit,
    convergence_study,
    dense_oracle_dirichlet,
    fit_boundary_exponent,
    structure_decompose,
)
from .profiles import parse_profile
from .solvers import (
    ExteriorData,
    HalfPlaneField,
    solve_dirichlet_hom,
    solve_dirichlet_nonhom,
    solve_exterior,
    solve_halfplane,
    solve_neumann,
)
from .symbols import ComplexOrder, SymbolSpec, check_mu_transmission, minus_symbol, plus_symbol
from .traces import (
    TraceFit,
    dtn_symbol,
    gamma0_weighted,
    gamma1_weighted,
    poisson_dirichlet,
    poisson_neumann,
)

__version__ = "0.1.0"
