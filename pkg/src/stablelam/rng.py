"""Deterministic random streams.

All randomness in the package flows through numpy Generators backed by the
Philox counter-based bit generator, so a (seed, trial) pair identifies the
same stream on every platform.  Parallel Monte Carlo derives one independent
stream per trial with :func:`stream`.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, trial: int = 0) -> np.random.Generator:
    """Independent, reproducible generator for a (master seed, trial) pair."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))
