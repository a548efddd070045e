"""Counter-based random streams usable inside numba kernels.

Each logical task (a point, a walk, a pass) derives its own stream from the
run seed and its id, so results do not depend on how work is split across
threads.
"""

import numba
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@numba.njit(cache=True, inline="always")
def mix64(z):
    z = np.uint64(z)
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@numba.njit(cache=True)
def stream_seed(seed, a, b):
    """Seed for the stream identified by ``(seed, a, b)``."""
    s = mix64(np.uint64(seed) + _GOLDEN)
    s = mix64(s ^ (np.uint64(a) + _GOLDEN))
    return mix64(s ^ (np.uint64(b) * _M2 + _GOLDEN))


@numba.njit(cache=True, inline="always")
def next_state(state):
    return state + _GOLDEN


@numba.njit(cache=True, inline="always")
def uniform(state):
    """Float in [0, 1) from the current state."""
    return float(mix64(state) >> _S11) * _INV53


@numba.njit(cache=True, inline="always")
def randint(state, n):
    """Integer in [0, n) from the current state."""
    r = int(uniform(state) * n)
    return r if r < n else n - 1
