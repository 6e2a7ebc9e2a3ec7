"""Deterministic substreams: one independent generator per (seed, key) path.

Replicates, arms and oracles each derive their own stream from the master
seed, so results are reproducible bit-for-bit no matter how work is
scheduled across workers.
"""

import numpy as np


def substream(master_seed, *key):
    """Generator for the given spawn key, e.g. substream(seed, arm, replicate)."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(seq)
