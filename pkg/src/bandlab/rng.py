"""Counter-based random streams.

Every sample in an experiment gets its own Philox stream keyed by
``(base_seed, sample_index)``, so the randomness of sample ``k`` never depends
on how samples are scheduled across workers.
"""
import numpy as np

_MASK64 = (1 << 64) - 1


def sample_seed(base_seed, index):
    """64-bit seed of sample ``index``: word ``index`` of the base Philox stream."""
    if index < 0:
        raise ValueError("sample index must be nonnegative")
    bitgen = np.random.Philox(key=int(base_seed) & _MASK64, counter=int(index))
    return int(bitgen.random_raw())


def sample_seeds(base_seed, count):
    return [sample_seed(base_seed, k) for k in range(count)]


def generator(seed):
    """Generator for a single 64-bit seed (Philox keyed by the seed)."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))
