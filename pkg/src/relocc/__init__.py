"""relocc: delocalization power of bipartite two-qudit unitaries.

Classify gates by local-unitary equivalence to a controlled-unitary
operation (equivalently, by LOCC one-piece relocalizability), synthesize
and simulate the relocalization protocols, and compute entangling power
for contrast.
"""

from ._backend import backend_name, product_output_entropies
from .controlled import (
    Classification,
    ControlledUnitaryForm,
    classify,
    coarsen_projectors,
    controlled_random,
    detect_controlled,
    reconstruct,
)
from .entangling import (
    EntanglingPowerResult,
    OptimizationConfig,
    entangling_power,
    entanglement_entropy,
    sample_entangling_power,
)
from .fileio import (
    InputFileError,
    read_protocol,
    read_unitary,
    write_protocol,
    write_unitary,
)
from .gates import (
    BipartiteUnitary,
    GALLERY_NAMES,
    build_gate,
    cnot,
    heisenberg,
    identity_gate,
    local_sandwich,
    random_bipartite_unitary,
    swap,
    swap_phase,
)
from .linalg import (
    JointDiagonalizationError,
    ToleranceConfig,
    hermitian_eig,
    joint_diagonalize,
    kron,
    partial_trace,
    polar_unitary,
    random_state,
    random_unitary,
    reshuffle,
    svd,
    unreshuffle,
)
from .locc import (
    Branch,
    LoccProtocol,
    Measurement,
    ProtocolNode,
    RelocalizationReport,
    accumulated_recursion_residual,
    apply_channel,
    branch_operators,
    check_bob_accumulated_unitary,
    execute_protocol,
    fixed_input_relocalization_demo,
    random_measurement,
    random_protocol,
    synthesize_relocalization_protocol,
    validate_measurement,
    verify_one_piece_relocalization,
)
from .schmidt import (
    SchmidtDecomposition,
    operator_schmidt_decomposition,
    operator_schmidt_rank,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend_name",
    "product_output_entropies",
    "Classification",
    "ControlledUnitaryForm",
    "classify",
    "coarsen_projectors",
    "controlled_random",
    "detect_controlled",
    "reconstruct",
    "EntanglingPowerResult",
    "OptimizationConfig",
    "entangling_power",
    "entanglement_entropy",
    "sample_entangling_power",
    "InputFileError",
    "read_protocol",
    "read_unitary",
    "write_protocol",
    "write_unitary",
    "BipartiteUnitary",
    "GALLERY_NAMES",
    "build_gate",
    "cnot",
    "heisenberg",
    "identity_gate",
    "local_sandwich",
    "random_bipartite_unitary",
    "swap",
    "swap_phase",
    "JointDiagonalizationError",
    "ToleranceConfig",
    "hermitian_eig",
    "joint_diagonalize",
    "kron",
    "partial_trace",
    "polar_unitary",
    "random_state",
    "random_unitary",
    "reshuffle",
    "svd",
    "unreshuffle",
    "Branch",
    "LoccProtocol",
    "Measurement",
    "ProtocolNode",
    "RelocalizationReport",
    "accumulated_recursion_residual",
    "apply_channel",
    "branch_operators",
    "check_bob_accumulated_unitary",
    "execute_protocol",
    "fixed_input_relocalization_demo",
    "random_measurement",
    "random_protocol",
    "synthesize_relocalization_protocol",
    "validate_measurement",
    "verify_one_piece_relocalization",
    "SchmidtDecomposition",
    "operator_schmidt_decomposition",
    "operator_schmidt_rank",
]
