"""Named seed derivation so parallel components draw from independent streams."""

from __future__ import annotations

import zlib

import numpy as np


def derive_seed_sequence(base_seed: int, label: str, *index: int) -> np.random.SeedSequence:
    # crc32 keeps the label mapping stable across interpreter runs (unlike hash()).
    key = (zlib.crc32(label.encode("utf-8")),) + tuple(int(i) for i in index)
    return np.random.SeedSequence(entropy=int(base_seed), spawn_key=key)


def derive_rng(base_seed: int, label: str, *index: int) -> np.random.Generator:
    """Return a generator for ``(base_seed, label, index...)``.

    The same triple always gives the same stream, independent of how many
    other streams were drawn before it or on which worker.
    """
    return np.random.default_rng(derive_seed_sequence(base_seed, label, *index))


def check_random_state(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
