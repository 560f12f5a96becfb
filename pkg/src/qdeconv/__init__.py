"""Single-qubit noise channels, their exact (non-CP) inverse maps, and
tomographic noise deconvolution of expectation values."""

from .channels import (
    AmplitudeDamping,
    BitFlip,
    BitPhaseFlip,
    Decoherence,
    Depolarizing,
    GeneralPauli,
    NoiseModel,
    PhaseFlip,
    SignedKrausMap,
    TwoKraus,
    apply,
    apply_ptm,
    choi_of,
    compose,
    compose_maps,
    compose_n,
    decoherence_from_times,
    is_completely_positive,
    is_trace_preserving,
    is_unital,
    kraus_of,
    min_choi_eigenvalue,
    ptm_of,
    unitary_map,
)
from .deconvolution import (
    EstimationResult,
    QuorumEstimator,
    correction_for,
    correction_for_repeated,
    deconvolve_observable,
    deconvolve_pauli_string,
    quorum_estimator,
    required_shots,
)
from .errors import (
    ConfigError,
    CorrectionOverflow,
    DegenerateFit,
    InvalidParameter,
    NonInvertible,
    NonUnitalUnsupported,
    NotDiagonal,
    NotHermitian,
    QdeconvError,
    SingularAssignment,
    SingularPtm,
    UnphysicalT2,
)
from .experiments import (
    ChannelReport,
    CurvePoint,
    DecayConfig,
    GateTimeFit,
    SweepConfig,
    channel_report,
    fit_gate_time,
    mitigate_counts,
    run_decoherence_decay,
    run_pauli_sweep,
)
from .inversion import (
    CorrectionFactors,
    InverseCheck,
    InverseMap,
    adjoint,
    inverse_of,
    invert_ptm,
    operator_sum_from_pauli_diagonal,
    verify_inverse,
)
from .operators import (
    AXES,
    ID2,
    PAULIS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    Tolerances,
    bloch_vector,
    dagger,
    eigenvalues_hermitian,
    expectation,
    pauli_decompose,
    pauli_reconstruct,
    ry_state,
)
from .sampling import (
    AssignmentMatrix,
    RngSpec,
    ShotRecord,
    apply_readout_error,
    inject_pauli_error,
    mean_from_counts,
    mean_from_frequencies,
    mitigate_readout,
    sample_pauli,
    sample_pauli_noisy,
)

__version__ = "0.1.0"
