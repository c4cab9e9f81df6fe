"""Counter-based random numbers keyed on (session seed, packet index).

Every random quantity of packet ``j`` is a pure function of
``(seed, j, counter)``, so any packet can be regenerated in isolation and a
session gives the same result whatever order or worker count is used. The
mixing function is the SplitMix64 finaliser. The compiled kernel uses the
same constants and operations, so both backends draw identical numbers.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
GAMMA = 0xD1B54A32D192ED03
SEED_SALT = 0x5851F42D4C957F2D
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
TO_UNIT = 1.0 / (1 << 53)

# counter slots within a packet's substream
C_PHASE = 0
C_DELAY = 1
C_PHOTONS = 2
C_SURVIVE = 3
C_SIGNAL_POS = 4
C_DARK = 5
C_DARK_POS = 6
C_FLIP = 7
C_DARK_BIT = 8
C_BITS = 16  # phase bits occupy C_BITS, C_BITS + 1, ... (64 bits per word)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def session_key(seed: int) -> int:
    return mix64((int(seed) ^ SEED_SALT) & MASK64)


def packet_key(key: int, index: int) -> int:
    return mix64(key + index * GOLDEN)


def draw_word(pkey: int, counter: int) -> int:
    return mix64(pkey + (counter + 1) * GAMMA)


def to_unit(word: int) -> float:
    return (word >> 11) * TO_UNIT


class SubStream:
    """Random source for one packet of one session."""

    __slots__ = ("seed", "index", "_pkey")

    def __init__(self, seed: int, index: int):
        self.seed = int(seed)
        self.index = int(index)
        self._pkey = packet_key(session_key(seed), index)

    def word(self, counter: int) -> int:
        return draw_word(self._pkey, counter)

    def uniform(self, counter: int) -> float:
        return to_unit(self.word(counter))

    def below(self, counter: int, n: int) -> int:
        """Integer uniform on 0..n-1."""
        return int(self.uniform(counter) * n)


# vectorised twins for the numpy backend

_U = np.uint64


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> _U(30))
    z = z * _U(MIX1)
    z = z ^ (z >> _U(27))
    z = z * _U(MIX2)
    return z ^ (z >> _U(31))


def packet_keys(key: int, start: int, count: int) -> np.ndarray:
    idx = np.arange(start, start + count, dtype=np.uint64)
    return mix64_array(_U(key) + idx * _U(GOLDEN))


def draw_words(pkeys: np.ndarray, counter) -> np.ndarray:
    """Words for slot ``counter`` (an int or a per-packet array of slots)."""
    if np.ndim(counter) == 0:
        return mix64_array(pkeys + _U(((int(counter) + 1) * GAMMA) & MASK64))
    c = np.asarray(counter, dtype=np.uint64)
    return mix64_array(pkeys + (c + _U(1)) * _U(GAMMA))


def to_unit_array(words: np.ndarray) -> np.ndarray:
    return (words >> _U(11)).astype(np.float64) * TO_UNIT
