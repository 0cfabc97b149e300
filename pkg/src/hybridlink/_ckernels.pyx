# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the kernels in ``_pykernels``; results are identical."""
from libc.stdint cimport uint64_t, int64_t

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t M2 = 0x94D049BB133111EBULL
cdef uint64_t SIZE_KEY = 0xD6E8FEB86659FD93ULL


cdef inline uint64_t fmix(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


def synth_payload(frame_id, Py_ssize_t size):
    if size < 0:
        raise ValueError("size must be >= 0")
    cdef uint64_t seed = fmix(((<uint64_t>(frame_id & 0xFFFFFFFFFFFFFFFF)) * GOLDEN)
                              ^ (<uint64_t>size * SIZE_KEY))
    cdef Py_ssize_t nwords = (size + 7) // 8
    cdef bytearray out = bytearray(nwords * 8)
    cdef unsigned char[::1] view = out
    cdef Py_ssize_t i, b
    cdef uint64_t w
    with nogil:
        for i in range(nwords):
            w = fmix(seed + <uint64_t>(i + 1) * GOLDEN)
            for b in range(8):
                view[i * 8 + b] = <unsigned char>((w >> (8 * b)) & 0xFF)
    return bytes(out[:size])


def digest64(data):
    cdef const unsigned char[::1] view = memoryview(bytes(data)).cast("B")
    cdef Py_ssize_t n = view.shape[0]
    cdef Py_ssize_t nwords = (n + 7) // 8
    cdef Py_ssize_t i, b, pos
    cdef uint64_t w, acc = 0
    with nogil:
        for i in range(nwords):
            w = 0
            for b in range(8):
                pos = i * 8 + b
                if pos < n:
                    w |= (<uint64_t>view[pos]) << (8 * b)
            acc += fmix(w + <uint64_t>(i + 1) * GOLDEN)
    return int(fmix(acc ^ (<uint64_t>n * SIZE_KEY)))


def integrate_hold(t_us, p_uw, int64_t t0, int64_t t1):
    cdef const int64_t[::1] t = _as_i64(t_us)
    cdef const int64_t[::1] p = _as_i64(p_uw)
    cdef Py_ssize_t n = t.shape[0]
    if p.shape[0] != n:
        raise ValueError("t_us and p_uw differ in length")
    if t1 <= t0 or n == 0:
        return 0
    cdef Py_ssize_t i
    cdef int64_t s, e, total = 0
    with nogil:
        for i in range(n):
            s = t[i] if t[i] > t0 else t0
            e = t[i + 1] if i + 1 < n else t1
            if e > t1:
                e = t1
            if e > s:
                total += (e - s) * p[i]
    return total


cdef _as_i64(x):
    import numpy as np
    return np.ascontiguousarray(x, dtype=np.int64)
