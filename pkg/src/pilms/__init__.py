"""Local-setting measurement plans for permutation-invariant observables."""

from ._backend import BACKEND
from .bounds import (
    BoundCertificate,
    ProjectionVector,
    audit_plan,
    dicke_null_rank_bound,
    ghz_projection,
    min_settings_sign_change,
    plan_projection,
)
from .errors import (
    DecompositionRejected,
    InvalidObservableError,
    MissingDataError,
    ParameterRangeError,
    PilmsError,
    RankDeficientError,
)
from .pidecomp import Decomposition, decompose, decompose_dense, omega_matrix, pi_target_library
from .planner import (
    LocalSetting,
    MeasurementPlan,
    expectations_from_setting,
    plan_dicke,
    plan_for_target,
    plan_ghz,
    reduce_to_settings,
)
from .product_basis import (
    OperatorBasis,
    ParamMatrix,
    certify_rank,
    expansion_matrix,
    make_param_matrix,
    operator_basis,
    product_state_basis,
)
from .sim import (
    FidelityEstimate,
    ShotRecord,
    estimate_fidelity,
    exact_statistics,
    noise_models,
    sample_shots,
    simulate,
)
from .symcore import (
    SymCoords,
    enumerate_indices,
    m_basis_dense,
    norm_const,
    product_op_coords,
    project_to_sym,
    twirl,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundCertificate",
    "Decomposition",
    "DecompositionRejected",
    "FidelityEstimate",
    "InvalidObservableError",
    "LocalSetting",
    "MeasurementPlan",
    "MissingDataError",
    "OperatorBasis",
    "ParamMatrix",
    "ParameterRangeError",
    "PilmsError",
    "ProjectionVector",
    "RankDeficientError",
    "ShotRecord",
    "SymCoords",
    "audit_plan",
    "certify_rank",
    "decompose",
    "decompose_dense",
    "dicke_null_rank_bound",
    "enumerate_indices",
    "estimate_fidelity",
    "exact_statistics",
    "expansion_matrix",
    "expectations_from_setting",
    "ghz_projection",
    "m_basis_dense",
    "make_param_matrix",
    "min_settings_sign_change",
    "noise_models",
    "norm_const",
    "omega_matrix",
    "operator_basis",
    "pi_target_library",
    "plan_dicke",
    "plan_for_target",
    "plan_ghz",
    "plan_projection",
    "product_op_coords",
    "product_state_basis",
    "project_to_sym",
    "reduce_to_settings",
    "sample_shots",
    "simulate",
    "twirl",
]
