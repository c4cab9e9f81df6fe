# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled packet sampler; draw-for-draw identical to ``_pykernel``."""

from libc.stdint cimport uint64_t, int64_t, int32_t, uint8_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t GAMMA = 0xD1B54A32D192ED03ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL
cdef double TO_UNIT = 1.0 / 9007199254740992.0

cdef enum:
    C_DELAY = 1
    C_PHOTONS = 2
    C_SURVIVE = 3
    C_SIGNAL_POS = 4
    C_DARK = 5
    C_DARK_POS = 6
    C_FLIP = 7
    C_DARK_BIT = 8
    C_BITS = 16


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


cdef inline uint64_t word(uint64_t pkey, uint64_t slot) noexcept nogil:
    return mix64(pkey + (slot + 1) * GAMMA)


cdef inline double unit(uint64_t pkey, uint64_t slot) noexcept nogil:
    return <double>(word(pkey, slot) >> 11) * TO_UNIT


cdef inline uint8_t phase_bit(uint64_t pkey, int64_t pos) noexcept nogil:
    cdef uint64_t p = <uint64_t>pos
    return <uint8_t>((word(pkey, C_BITS + (p >> 6)) >> (p & 63)) & 1)


def simulate_block(uint64_t key, uint64_t start, Py_ssize_t count, int64_t L,
                   const double[::1] cdf, const double[:, ::1] surv,
                   const double[::1] dark_valid, const double[::1] e_s,
                   int32_t[::1] out_r, int32_t[::1] out_k, uint8_t[::1] out_alice,
                   uint8_t[::1] out_bob, uint8_t[::1] out_dark):
    cdef Py_ssize_t j, n, ncdf = cdf.shape[0]
    cdef uint64_t pk
    cdef int64_t r, t, k
    cdef double u
    cdef bint signal, dark
    cdef uint8_t a, b

    with nogil:
        for j in range(count):
            pk = mix64(key + (start + <uint64_t>j) * GOLDEN)
            r = 1 + <int64_t>(unit(pk, C_DELAY) * (L - 1))
            u = unit(pk, C_PHOTONS)
            n = 0
            while n < ncdf and cdf[n] <= u:
                n += 1
            if n > ncdf - 1:
                n = ncdf - 1
            signal = unit(pk, C_SURVIVE) < surv[r, n]
            t = 1 + <int64_t>(unit(pk, C_SIGNAL_POS) * L)
            dark = (not signal) and unit(pk, C_DARK) < dark_valid[r]
            k = 0
            if signal:
                if t <= L - r:
                    k = t
            elif dark:
                k = 1 + <int64_t>(unit(pk, C_DARK_POS) * (L - r))
            a = 0
            b = 0
            if k:
                a = phase_bit(pk, k - 1) ^ phase_bit(pk, k + r - 1)
                if dark:
                    b = 1 if unit(pk, C_DARK_BIT) < 0.5 else 0
                else:
                    b = a ^ (1 if unit(pk, C_FLIP) < e_s[r] else 0)
            out_r[j] = <int32_t>r
            out_k[j] = <int32_t>k
            out_alice[j] = a
            out_bob[j] = b
            out_dark[j] = dark
