"""pep-forge: tight worst-case bounds for first-order methods.

Builds performance-estimation problems from interpolation constraints,
compiles them to semidefinite programs, solves them with an embedded
interior-point method, and recovers/verifies the worst-case instances
attaining the bounds.
"""

from .families import (
    ClassSpec,
    ConsensusData,
    ConsensusDataHandle,
    FeasibilityReport,
    FunctionData,
    FunctionDataHandle,
    LinearMapData,
    LinearMapDataHandle,
    OperatorData,
    OperatorDataHandle,
    check_numeric,
)
from .gram import (
    BasisLabel,
    BuildError,
    Constraint,
    PEPProblem,
    QuadExpr,
    ScalarVar,
    VectorExpr,
    build_problem,
    inner,
    sq_norm,
)
from .ipm import SDPSolution, dual_report, solve
from .methods import (
    DGDSpec,
    MethodSpec,
    alternating_spectrum_matrix,
    build_custom_method,
    build_dgd_fixed_matrix,
    build_dgd_spectral,
    build_gradient_method,
    classical_bound,
)
from .recover import (
    NetworkRecovery,
    WorstCaseInstance,
    factor_gram,
    recover_instance,
    recover_network_matrix,
    verify_instance,
    write_instance,
)
from .sdp import StandardSDP, compile, export_sdp_text

__version__ = "0.1.0"

__all__ = [
    "BasisLabel",
    "BuildError",
    "ClassSpec",
    "Constraint",
    "ConsensusData",
    "ConsensusDataHandle",
    "DGDSpec",
    "FeasibilityReport",
    "FunctionData",
    "FunctionDataHandle",
    "LinearMapData",
    "LinearMapDataHandle",
    "MethodSpec",
    "NetworkRecovery",
    "OperatorData",
    "OperatorDataHandle",
    "PEPProblem",
    "QuadExpr",
    "ScalarVar",
    "SDPSolution",
    "StandardSDP",
    "VectorExpr",
    "WorstCaseInstance",
    "alternating_spectrum_matrix",
    "build_custom_method",
    "build_dgd_fixed_matrix",
    "build_dgd_spectral",
    "build_gradient_method",
    "build_problem",
    "check_numeric",
    "classical_bound",
    "compile",
    "dual_report",
    "export_sdp_text",
    "factor_gram",
    "inner",
    "recover_instance",
    "recover_network_matrix",
    "solve",
    "sq_norm",
    "verify_instance",
    "write_instance",
]
