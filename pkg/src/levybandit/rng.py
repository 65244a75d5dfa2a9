"""Counter-based uniform stream keyed by (seed, path index).

Each draw is a pure function of ``(key, counter)``: a SplitMix64 finaliser
applied to ``key + counter * GAMMA``.  A path's randomness therefore does not
depend on which worker simulates it or in what order.
"""

import numba as nb
import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(nogil=True, cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(nogil=True, cache=True)
def path_key(seed, path_index):
    return mix64(mix64(np.uint64(seed)) + np.uint64(path_index) * GAMMA)


@nb.njit(nogil=True, cache=True)
def uniform(key, counter):
    """Uniform double on the open interval (0, 1)."""
    bits = mix64(key + np.uint64(counter) * GAMMA) >> _S11
    return (np.float64(bits) + 0.5) * _INV53


def uniforms(seed: int, path_index: int, counters) -> np.ndarray:
    key = path_key(np.uint64(seed), np.uint64(path_index))
    return np.array([uniform(key, np.uint64(c)) for c in counters])
