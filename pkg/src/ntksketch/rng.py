"""Counter-based splittable randomness.

Every sketch instance derives its own Philox stream from a 64-bit master
seed plus a string label identifying the component ("ntk/cov_tree/leaf3",
...).  Streams are independent for distinct labels and reproducible across
runs, platforms and thread counts.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def component_key(label: str) -> int:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def component_rng(seed: int, label: str) -> np.random.Generator:
    """Generator keyed by (seed, label); same arguments give the same stream."""
    seq = np.random.SeedSequence([seed & _MASK64, component_key(label)])
    return np.random.Generator(np.random.Philox(seq))
