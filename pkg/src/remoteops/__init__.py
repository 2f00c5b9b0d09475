"""Deterministic simulator and verification suite for LOCC remote-operation protocols."""

from .gates import (
    HADAMARD,
    PAULI_I,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    RotationClass,
    RotationKind,
    TripletBasis,
    WaveplateKind,
    WaveplateSpec,
    anticommuting_rotation,
    commuting_rotation,
    commuting_rotation_waveplates,
    controlled_cycle,
    embed_triplet,
    embed_triplet_pair,
    pbs_cnot,
    qutrit_cycle,
    qutrit_fourier,
    triplet_phase,
    waveplate,
)
from .noisetomo import (
    ChiMatrix,
    DephasingParams,
    OpticalExperimentReport,
    average_fidelity,
    channel_from_chi,
    chi_from_channel,
    dephased_output_closed_form,
    dephasing_average_fidelity,
    dephasing_channel,
    optical_experiment_sim,
    probe_state,
    qpt_reconstruct,
    visibility_dephasing,
)
from .protocols import (
    ClassicalMessage,
    Direction,
    LocalOperation,
    MeasurementRecord,
    ProtocolResult,
    ProtocolTranscript,
    ResourceDeclaration,
    SignalingReport,
    bell_pair,
    bidirectional_u_teleport,
    multicopy_remote_rotation,
    nonlocal_cnot_signaling_check,
    remote_rotation,
    remote_rotation_circuit,
    select_branch,
    telecloning_state,
    teleport,
    verify_branch_determinism,
)
from .qcore import (
    DensityMatrix,
    KrausChannel,
    MeasurementBranch,
    Owner,
    PureState,
    SubsystemLabel,
    apply_channel,
    apply_unitary,
    entanglement_entropy,
    fidelity,
    measure_and_remove,
    measure_projective,
    overlap,
    partial_trace,
    qubit,
    tensor,
)
from .resources import (
    BoundSet,
    BoundVerdict,
    ProtocolKind,
    ResourceLedger,
    check_bounds,
    ledger_from_transcript,
)

__version__ = "0.1.0"
