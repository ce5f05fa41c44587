"""Numerical laboratory for argmax theorems with sequences of constraint sets.

Modules
-------
sets        set representations, directed distances, numeric PK limits
processes   limit processes and constrained argmax sampling
estimators  finite-sample break-date, boundary and weak-id estimators
harness     Monte Carlo comparisons and reports
cli         command-line front end
"""

from __future__ import annotations

from .empirical import EmpiricalDist, ks_distance
from .errors import (
    ArgmaxLabError,
    DesignError,
    DimensionError,
    EmptyConstraintError,
    GridRangeError,
    InfeasibleError,
    IterationLimitError,
    ProfileGridError,
    SingularDesignError,
)
from .estimators import (
    BreakDesign,
    BreakFitResult,
    ToyModelDesign,
    estimate_break,
    fit_boundary_model,
    fit_weakid_model,
    localized_break_objective,
    simulate_break_data,
    v_t_objective,
    weakid_limit_sets,
)
from .harness import (
    MCReport,
    run_corollary1,
    run_corollary2,
    run_corollary3,
    run_pk_check,
    run_value_convergence,
    two_rate_contrast,
)
from .processes import (
    GaussianSpec,
    PathSample,
    QuadraticLimit,
    argmax_over,
    limit_process_M,
    polyhedral_argmax,
    sample_limit_argmax,
    sample_polyhedral_limit,
    sample_scaled_bm,
)
from .qp import maximize_quadratic
from .seeding import derive_seed, mix64
from .sets import (
    Box,
    GridSet,
    PolyhedralSet,
    SetSequence,
    directed_distance,
    linearized_boundary_set,
    mfcq_check,
    pk_limit_estimate,
    point_to_set_distance,
    rescaled_break_set,
)

__version__ = "0.1.0"
