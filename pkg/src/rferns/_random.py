"""Counter-based random streams used everywhere randomness enters a run.

Every random draw in the library comes from a SplitMix64 stream whose
starting state is derived from the master seed through a fixed tree of
``child`` mixes.  A fern's bag, trunk and permutations therefore depend
only on ``(master_seed, fern index, attribute, tag)`` and never on the
order in which workers process ferns.

Derivation tree (identifier ``SEED_SCHEME``):

    fern_seed(k)        = child(child(master, TAG_FERNS), k)
    bag stream          = child(fern_seed(k), TAG_BAG)
    trunk stream        = child(fern_seed(k), TAG_TRUNK)
    regular perm (k, a) = child(child(fern_seed(k), TAG_REGULAR), a)
    shadow perm (k, a)  = child(child(fern_seed(k), TAG_SHADOW), a)
    shadow plan (a)     = child(child(master, TAG_PLAN), a)
    boruta shadows (it) = child(child(master, TAG_BORUTA), it)
"""

from __future__ import annotations

import numpy as np
from numba import njit

SEED_SCHEME = "splitmix64-tree-v1"

MASK64 = (1 << 64) - 1

TAG_FERNS = 1
TAG_BAG = 2
TAG_TRUNK = 3
TAG_REGULAR = 4
TAG_SHADOW = 5
TAG_PLAN = 6
TAG_BORUTA = 7
TAG_GENERATOR = 8

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SALT = np.uint64(0xD1B54A32D192ED03)
_ONE = np.uint64(1)
_TWO_M53 = 1.0 / 9007199254740992.0


def as_seed(seed) -> np.uint64:
    """Fold any Python integer into an unsigned 64-bit seed."""
    return np.uint64(int(seed) & MASK64)


@njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def child(seed, index):
    return mix64(mix64(seed ^ _SALT) + _GAMMA * (np.uint64(index) + _ONE))


@njit(cache=True, nogil=True)
def next_u64(state):
    """Advance a stream; returns ``(new_state, output)``."""
    state = state + _GAMMA
    return state, mix64(state)


@njit(cache=True, nogil=True)
def next_below(state, n):
    """Uniform integer in ``0..n-1`` from the top 53 bits of one output."""
    state, x = next_u64(state)
    u = np.float64(x >> np.uint64(11)) * _TWO_M53
    return state, np.int64(u * n)


@njit(cache=True, nogil=True)
def next_unit(state):
    state, x = next_u64(state)
    return state, np.float64(x >> np.uint64(11)) * _TWO_M53


@njit(cache=True, nogil=True)
def shuffle_inplace(state, arr):
    """Fisher-Yates shuffle of ``arr`` driven by the stream."""
    for i in range(arr.shape[0] - 1, 0, -1):
        state, j = next_below(state, i + 1)
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp
    return state


@njit(cache=True, nogil=True)
def permutation(seed, n):
    perm = np.arange(n)
    shuffle_inplace(seed, perm)
    return perm


@njit(cache=True, nogil=True)
def fern_seed(master, k):
    return child(child(master, TAG_FERNS), k)


@njit(cache=True, nogil=True)
def bag_counts(seed, n):
    """Multiplicities of ``n`` uniform draws with replacement over ``0..n-1``."""
    counts = np.zeros(n, dtype=np.int64)
    state = child(seed, TAG_BAG)
    for _ in range(n):
        state, j = next_below(state, n)
        counts[j] += 1
    return counts


@njit(cache=True, nogil=True)
def pair_seed(fseed, tag, attr):
    return child(child(fseed, tag), attr)


def derive(seed, *path) -> np.uint64:
    """``child(child(seed, path[0]), path[1])...`` evaluated from Python."""
    s = as_seed(seed)
    for p in path:
        # numba boxes uint64 results as Python ints
        s = as_seed(child(s, p))
    return s


def fern_seeds(master, n_ferns: int) -> np.ndarray:
    return np.array([derive(master, TAG_FERNS, k) for k in range(n_ferns)], dtype=np.uint64)


def oob_permutation(master, k: int, attr: int, tag: int, m: int) -> np.ndarray:
    """The within-OOB permutation fern ``k`` uses for one attribute and one term."""
    return permutation(derive(master, TAG_FERNS, k, tag, attr), m)


def stream_generator(master, tag: int, index: int = 0) -> np.random.Generator:
    """A numpy Generator for non-kernel code paths (data generators, Boruta)."""
    return np.random.Generator(np.random.PCG64(int(derive(master, tag, index))))
