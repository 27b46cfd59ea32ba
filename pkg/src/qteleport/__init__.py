"""Simulator for multiparty-controlled teleportation of m-qudit states
over pure (non-maximally) entangled channels, with exact branch
enumeration, Monte Carlo execution, and decoy-photon security checks."""

from .state import (
    MeasurementOutcome,
    SimulationError,
    SizeGuardError,
    StateVector,
    apply,
    branch_outcomes,
    fidelity,
    is_unitary,
    make_state,
    measure_in_basis,
    tensor,
)
from .primitives import (
    ChannelSpec,
    channel_state,
    correction_unitary,
    gbs_basis,
    gbs_basis_matrix,
    gbs_vector,
    hadamard_d,
    multi_correction_unitary,
    u_max,
    u_max_m,
    u_uv,
    x_basis_matrix,
    x_basis_vector,
)
from .protocol import (
    BranchReport,
    EnumerationGuardError,
    ForcedBranch,
    InputStateSpec,
    Transcript,
    enumerate_branches,
    fidelity_without_control,
    run_protocol,
    run_structured,
    theoretical_success_probability,
)
from .decoy import (
    DecoyRound,
    DetectionReport,
    analytic_detection_rate,
    check_decoy,
    detection_campaign,
    eavesdrop,
    prepare_decoy,
)
from .config import ConfigError, ExperimentConfig, load_config, random_coeffs
from .campaign import ResultRecord, run_campaign, to_csv_text, to_json_text, write_output

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
