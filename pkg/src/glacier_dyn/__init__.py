"""Planar temperature/ice-extent climate model toolkit.

Library layout:

- model: parameters, response curves, scalings, vector fields, nullclines
- equilibria: nullcline crossings, count classification, lambda branches
- stability: Jacobian, mu windows, Hopf data, center-manifold reduction
- simulator: time integration, limit cycles, mu sweeps
- oracle: independent numerical cross-checks for every closed form
- cli: the glacier-dyn command-line front end
"""

__version__ = "0.1.0"

from .equilibria import (
    BranchPair,
    CriticalPoint,
    EquilibriumCount,
    branch_bounds,
    count_classification,
    critical_point_at,
    find_equilibria,
    lambda0_max,
    lambda_branches,
    theta_extrema,
)
from .errors import (
    ComplexSnowline,
    ConditioningError,
    ConfigError,
    DegenerateSlope,
    DomainError,
    GlacierDynError,
    NoBranches,
    NonDifferentiablePoint,
    NotHopfCandidate,
    NotTangent,
    OracleMismatch,
    OutOfProfile,
    ScaleError,
    StiffnessError,
    TangencyWarning,
)
from .model import (
    DimensionalState,
    ModelParams,
    PhysicalParams,
    Regime,
    Scales,
    SigmoidFamily,
    SigmoidResponse,
    State,
    continental_albedo,
    from_dimensional,
    ice_profile_height,
    lambda0,
    nondimensionalize,
    nullcline_f,
    nullcline_g,
    response_eval,
    sheet_height_scale,
    sigmoid_eval,
    to_dimensional,
    vector_field,
    vector_field_full,
)
from .oracle import (
    FdConfig,
    VerificationReport,
    bisect_lambda_branches,
    fd_jacobian,
    grid_max_lambda0,
    numeric_l1,
    run_verification,
)
from .simulator import (
    BifRow,
    BifurcationDiagram,
    LimitCycle,
    ModelKind,
    Termination,
    Trajectory,
    amplitude_curve,
    integrate,
    poincare_cycle,
    sweep_mu,
)
from .stability import (
    CenterManifoldVerdict,
    Classification,
    Criticality,
    HopfData,
    Jacobian2,
    MuThresholds,
    center_manifold,
    classify,
    eigenvalues,
    hopf_analysis,
    jacobian,
    lyapunov_l1,
    mu_thresholds,
    tangency_directions,
)

__all__ = [name for name in dir() if not name.startswith("_")]
