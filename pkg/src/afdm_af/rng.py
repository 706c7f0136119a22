"""Seed plumbing.

Every random draw in the package goes through a Philox (counter-based)
generator keyed by ``(seed, index)``, so a trial's data does not depend on
chunk sizes or on how many trials run before it.
"""

import numpy as np


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def trial_rng(seed: int, index: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for trial ``index`` of an experiment seeded with ``seed``.

    ``stream`` separates draws that must not share state within one trial
    (data symbols vs. target fluctuation vs. noise).
    """
    ss = np.random.SeedSequence(seed, spawn_key=(int(index), int(stream)))
    return np.random.Generator(np.random.Philox(ss))
