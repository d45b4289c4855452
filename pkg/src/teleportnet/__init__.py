"""Exact simulation and verification of probabilistic two-qubit teleportation
through a partially entangled four-particle channel."""

from .config import ConfigError, RunConfig, default_config, load_config
from .gates import (
    ChannelParams,
    GateOp,
    channel_for_alpha,
    compose,
    equal_channel,
    factored_u0_sequence,
    purification_unitary,
    random_channel,
)
from .protocol import (
    CORRECTION_TABLE,
    InputState,
    TrialRecord,
    bell_measure,
    bob_recover,
    collapse_oracle,
    correction_for,
    prepare_channel,
    prepare_input,
    random_input_state,
    run_deferred_comparison,
    run_trial,
    run_trials,
    success_probability,
)
from .statevector import PureState, UnnormalizedBranch, apply_gate, make_state, measure, project

__all__ = [
    "CORRECTION_TABLE",
    "ChannelParams",
    "ConfigError",
    "GateOp",
    "InputState",
    "PureState",
    "RunConfig",
    "TrialRecord",
    "UnnormalizedBranch",
    "apply_gate",
    "bell_measure",
    "bob_recover",
    "channel_for_alpha",
    "collapse_oracle",
    "compose",
    "correction_for",
    "default_config",
    "equal_channel",
    "factored_u0_sequence",
    "load_config",
    "make_state",
    "measure",
    "prepare_channel",
    "prepare_input",
    "project",
    "purification_unitary",
    "random_channel",
    "random_input_state",
    "run_deferred_comparison",
    "run_trial",
    "run_trials",
    "success_probability",
]

__version__ = "0.1.0"
