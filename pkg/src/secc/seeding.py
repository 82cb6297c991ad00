"""Seed handling shared by every sampler.

Instance seeds are derived from the master seed by
``SeedSequence(master).spawn(...)[index]`` and collapsed to one unsigned
64-bit integer, so a single instance can be replayed from that integer alone.
"""

import numpy as np

SPLIT_RULE = "instance_seed = SeedSequence(master, spawn_key=(index,)).generate_state(1, uint64)[0]"


def as_seed_sequence(seed):
    """A fresh SeedSequence; never spawns from the caller's object."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)
    return np.random.SeedSequence(seed)


def rng(seed):
    return np.random.default_rng(as_seed_sequence(seed))


def instance_seed(master, index):
    ss = np.random.SeedSequence(master, spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


def substreams(seed, n):
    return as_seed_sequence(seed).spawn(n)
