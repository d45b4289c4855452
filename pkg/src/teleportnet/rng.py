"""Deterministic random-stream derivation.

All randomness in the package flows through numpy's PCG64 generator.  Streams
are derived from a 64-bit base seed plus integer stream keys via
``numpy.random.SeedSequence`` hashing, so results are reproducible across
platforms and independent of execution order.

Reserved stream tags (second key after the base seed):

* 0 — per-trial streams for Monte-Carlo runs: ``stream(seed, 0, trial_index)``
* 1 — random channel parameters drawn by the verification commands
* 2 — random input states drawn by the verification commands
* 3 — per-row streams for parameter sweeps: ``stream(seed, 3, row_index)``
"""

from __future__ import annotations

import numpy as np

TRIAL_STREAM = 0
CHANNEL_STREAM = 1
INPUT_STREAM = 2
SWEEP_STREAM = 3


def seed_sequence(*keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(tuple(int(k) for k in keys))


def stream(*keys: int) -> np.random.Generator:
    """PCG64 generator for the given key tuple."""
    return np.random.default_rng(seed_sequence(*keys))


def derive_seed(*keys: int) -> int:
    """A 64-bit integer deterministically mixed from the key tuple."""
    return int(seed_sequence(*keys).generate_state(1, np.uint64)[0])
