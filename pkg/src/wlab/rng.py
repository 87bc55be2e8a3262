"""Counter-based random numbers: u = mix(key + counter * gamma), SplitMix64 style.

Every value is a pure function of (key, counter), so streams can be indexed by
replica id or by lattice site and evaluated in any order or in parallel.
"""
from __future__ import annotations

import numba as nb
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

MASK64 = (1 << 64) - 1


@nb.njit(nb.uint64(nb.uint64), cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(nb.uint64(nb.uint64, nb.uint64, nb.uint64), cache=True)
def stream_key(seed, stream, domain):
    """Key of stream ``stream`` in namespace ``domain`` under a master seed."""
    h = mix64(seed ^ _GOLDEN)
    h = mix64(h + domain * _GOLDEN)
    return mix64(h ^ (stream * _M1 + _GOLDEN))


@nb.njit(nb.float64(nb.uint64, nb.uint64), cache=True)
def uniform(key, counter):
    """Uniform double in [0, 1) at position ``counter`` of stream ``key``."""
    return np.float64(mix64(key + counter * _GOLDEN) >> _S11) * _INV53


@nb.njit(cache=True)
def uniforms(key, counters):
    out = np.empty(counters.shape[0])
    for i in range(counters.shape[0]):
        out[i] = uniform(key, counters[i])
    return out


# namespaces for stream_key
DOMAIN_DYNAMICS = 1
DOMAIN_INITIAL = 2
DOMAIN_ENVIRONMENT = 3


def key(seed: int, stream: int, domain: int) -> np.uint64:
    return np.uint64(stream_key(np.uint64(int(seed) & MASK64), np.uint64(int(stream) & MASK64),
                                np.uint64(domain)))
