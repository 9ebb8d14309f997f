"""qrelent: numerics for the extended quantum relative entropy.

Dense-matrix machinery for positive operators and quantum operations, the
extended relative entropy with its identities, closed-form converging state
families with known discontinuity jumps, projector ladders, and a
verification harness for the monotonicity of those jumps under quantum
operations.
"""

from .channels import (
    KrausOperation,
    MapKind,
    StinespringDilation,
    Validation,
    amplitude_damping_channel,
    dephasing_channel,
    depolarizing_channel,
    extend_to_channel,
    identity_channel,
    named_channel,
    pinching_channel,
    random_channel,
    random_operation,
    reflection_unitary,
    stinespring,
)
from .divergence import (
    DonaldDecomposition,
    SumDecomposition,
    donald_identity,
    eta,
    extended_entropy,
    relative_entropy,
    relative_entropy_via_entropy,
    scaling_residuals,
    sum_decomposition_check,
    symmetrized_divergence,
)
from .extreal import ExtendedNonNegative
from .operators import (
    HermitianMatrix,
    IsometryMatrix,
    PositiveOperator,
    Projector,
    conjugate,
    default_rank_tol,
    identity_operator,
    operator_norm,
    partial_trace_env,
    spectral_decompose,
    support_projector,
    tensor_product,
    trace_distance,
    trace_norm,
    trace_product,
    zero_operator,
)
from .sequences import (
    LadderReport,
    ProjectorLadder,
    StateSequenceFamily,
    continuous_family,
    jump_family,
    jump_family_thresholds,
    jump_weight,
    tabulated_family,
    threshold_ladder,
    verify_ladder,
)
from .verify import (
    CompressionTrace,
    ContinuityCheck,
    DiniCheck,
    JumpComparison,
    JumpEstimate,
    TraceReport,
    check_compressed_continuity,
    check_dini,
    check_donald_split,
    check_jump_monotonicity,
    check_operation_reduction,
    check_pinching_identity,
    check_symmetrized_continuity,
    compression_trace,
    estimate_jump,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
