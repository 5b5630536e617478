"""Seedable, counter-based random streams.

All randomness in the package flows through Philox4x64 counter-based
generators keyed as

    key = (root_seed mod 2^64,  fold(path))

where ``path`` is a tuple of integers naming the stream and ``fold`` is
SplitMix64 applied over the path elements. The derivation for the i-th
MC-Dropout pass is therefore ``rng_stream(seed, STREAM_MC_PASS, i)``;
other languages can reproduce every stream from this description.

Stream ids used by the package:

    STREAM_INIT             model weight initialization
    STREAM_SHUFFLE          per-epoch training-set shuffles (path: epoch)
    STREAM_DROPOUT          training-time dropout masks
    STREAM_VIEWS            dataset viewpoint sampling
    STREAM_DATASET_SHUFFLE  dataset entry shuffle
    STREAM_MC_PASS          MC-Dropout inference passes (path: pass index)
    STREAM_NOISE            synthetic 1-D regression noise
    STREAM_MEMBER           per-ensemble-member root seeds (path: member index)
"""

import numpy as np

STREAM_INIT = 1
STREAM_SHUFFLE = 2
STREAM_DROPOUT = 3
STREAM_VIEWS = 4
STREAM_DATASET_SHUFFLE = 5
STREAM_MC_PASS = 6
STREAM_NOISE = 7
STREAM_MEMBER = 8

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def fold_path(*path: int) -> int:
    """Fold a tuple of ints into one 64-bit word (SplitMix64 chain)."""
    h = 0
    for p in path:
        h = _splitmix64((h ^ (int(p) & _MASK64)) & _MASK64)
    return h


def rng_stream(root_seed: int, *path: int) -> np.random.Generator:
    """Named, reproducible generator for (root_seed, path)."""
    key = np.array([int(root_seed) & _MASK64, fold_path(*path)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def mix_seed(root_seed: int, *path: int) -> int:
    """Derived integer seed (used where a plain seed must be recorded)."""
    return fold_path(int(root_seed) & _MASK64, *path)
