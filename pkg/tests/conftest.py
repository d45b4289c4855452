import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from teleportnet.gates import ChannelParams, random_channel
from teleportnet.protocol import InputState, random_input_state

settings.register_profile(
    "suite",
    max_examples=30,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


# Channels and inputs are drawn through seeded generators so hypothesis
# shrinks over a single integer instead of four correlated floats.
channels = st.integers(min_value=0, max_value=2**32 - 1).map(
    lambda s: random_channel(np.random.default_rng(s))
)
input_states = st.integers(min_value=0, max_value=2**32 - 1).map(
    lambda s: random_input_state(np.random.default_rng(s))
)


@pytest.fixture
def reference_channel() -> ChannelParams:
    return ChannelParams(0.3, 0.4, 0.5, np.sqrt(0.5))


@pytest.fixture
def uniform_input() -> InputState:
    return InputState(0.5, 0.5, 0.5, 0.5)
