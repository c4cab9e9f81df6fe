"""Vectorised numpy backend for the packet sampler.

Must stay draw-for-draw identical to ``_ckernel.pyx``.
"""

from __future__ import annotations

import numpy as np

from .rng import (
    C_BITS,
    C_DARK,
    C_DARK_BIT,
    C_DARK_POS,
    C_DELAY,
    C_FLIP,
    C_PHOTONS,
    C_SIGNAL_POS,
    C_SURVIVE,
    draw_words,
    packet_keys,
    to_unit_array,
)


def _phase_bit(pkeys, pos):
    """Alice's phase bit at 0-based position ``pos`` of each packet."""
    pos = pos.astype(np.uint64)
    words = draw_words(pkeys, C_BITS + (pos >> np.uint64(6)))
    return ((words >> (pos & np.uint64(63))) & np.uint64(1)).astype(np.uint8)


def simulate_block(key, start, count, L, cdf, surv, dark_valid, e_s,
                   out_r, out_k, out_alice, out_bob, out_dark):
    """Sample ``count`` packets starting at index ``start``.

    Writes per-packet delay, window position ``k`` (0 when nothing was
    recorded), Alice's and Bob's bits and the dark-click flag into the
    ``out_*`` arrays.
    """
    pk = packet_keys(key, start, count)

    def u(slot):
        return to_unit_array(draw_words(pk, slot))

    r = 1 + (u(C_DELAY) * (L - 1)).astype(np.int64)
    n = np.minimum(np.searchsorted(cdf, u(C_PHOTONS), side="right"), len(cdf) - 1)
    signal = u(C_SURVIVE) < surv[r, n]
    t = 1 + (u(C_SIGNAL_POS) * L).astype(np.int64)
    valid = signal & (t <= L - r)
    dark = ~signal & (u(C_DARK) < dark_valid[r])
    kd = 1 + (u(C_DARK_POS) * (L - r)).astype(np.int64)
    k = np.where(valid, t, np.where(dark, kd, 0))

    alice = np.zeros(count, dtype=np.uint8)
    bob = np.zeros(count, dtype=np.uint8)
    hit = np.flatnonzero(k)
    if hit.size:
        pk_h, k_h, r_h = pk[hit], k[hit], r[hit]
        a = _phase_bit(pk_h, k_h - 1) ^ _phase_bit(pk_h, k_h + r_h - 1)
        alice[hit] = a
        flip = (to_unit_array(draw_words(pk_h, C_FLIP)) < e_s[r_h]).astype(np.uint8)
        coin = (to_unit_array(draw_words(pk_h, C_DARK_BIT)) < 0.5).astype(np.uint8)
        bob[hit] = np.where(dark[hit], coin, a ^ flip)

    out_r[:] = r
    out_k[:] = k
    out_alice[:] = alice
    out_bob[:] = bob
    out_dark[:] = dark
