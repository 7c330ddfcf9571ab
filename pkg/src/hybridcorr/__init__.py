"""Correlations and communication protocols for qubit-oscillator hybrid states."""

from .correlations import (
    CorrelationReport,
    DiscordOptimizerConfig,
    DiscordResult,
    correlation_report,
    entropic_discord_digitalized,
    entropic_discord_numeric,
    geometric_discord,
    geometric_discord_asymptote,
    geometric_discord_bruteforce,
    negativity,
    negativity_asymptote,
    negativity_witness_bound,
)
from .digitalize import (
    ChannelConstructionError,
    DigitalizeConfig,
    DigitalizeResult,
    FailPolicy,
    TwoQubitState,
    digitalize_channel,
    digitalized_target,
    kraus_set,
    state_fidelity,
)
from .hybrid import (
    FanoVector,
    HybridState,
    InputPureState,
    QubitParams,
    build_resource_state,
    fano_components,
    overlap_diagnostic,
    partial_trace_osc,
    partial_trace_qubit,
    partial_transpose_qubit,
    product_state,
    rotate_qubit_phase,
)
from .linalg import NumericalToleranceError
from .oscillator import (
    OscillatorState,
    TruncationError,
    TruncationReport,
    char_fn,
    coherent_state,
    displace,
    displacement_matrix,
    fock_state,
    purity,
    recommended_dim,
    thermal_state,
    truncation_report,
    vacuum,
)
from .protocols import (
    RspMode,
    RspResult,
    TeleportResult,
    hybrid_bell_basis,
    phase_shift_operator,
    rsp_average_fidelity,
    rsp_classical_threshold,
    rsp_payoff_bounds,
    rsp_simulate,
    teleport_average_fidelity,
    teleport_simulate,
)

__version__ = "0.1.0"
