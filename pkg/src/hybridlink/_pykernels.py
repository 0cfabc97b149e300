"""Numpy implementations of the hot kernels.

These are the reference versions; ``_ckernels`` must agree with them bit for
bit. Both are selected through :mod:`hybridlink.kernels`.
"""
import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SIZE_KEY = np.uint64(0xD6E8FEB86659FD93)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


def _fmix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _u64(value):
    return np.array([value & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)


def _seed_word(frame_id, size):
    return _fmix(_u64(frame_id) * GOLDEN ^ (_u64(size) * _SIZE_KEY))


def synth_payload(frame_id, size):
    """Deterministic pseudo-random payload of ``size`` bytes for a frame."""
    if size < 0:
        raise ValueError("size must be >= 0")
    nwords = (size + 7) // 8
    idx = np.arange(1, nwords + 1, dtype=np.uint64)
    words = _fmix(_seed_word(frame_id, size)[0] + idx * GOLDEN)
    return words.astype("<u8").tobytes()[:size]


def digest64(data):
    """Position-keyed 64-bit digest of a bytes-like object."""
    buf = bytes(data)
    n = len(buf)
    pad = (-n) % 8
    if pad:
        buf += b"\x00" * pad
    words = np.frombuffer(buf, dtype="<u8").astype(np.uint64)
    idx = np.arange(1, len(words) + 1, dtype=np.uint64)
    acc = _u64(0) + np.sum(_fmix(words + idx * GOLDEN), dtype=np.uint64)
    out = _fmix(acc ^ (_u64(n) * _SIZE_KEY))
    return int(out[0])


def integrate_hold(t_us, p_uw, t0, t1):
    """Energy in picojoules of a sample-and-hold power trace over [t0, t1].

    Each sample ``p_uw[i]`` (integer microwatts) holds from ``t_us[i]`` until
    the next sample time. Integer arithmetic keeps the sum exact.
    """
    t = np.asarray(t_us, dtype=np.int64)
    p = np.asarray(p_uw, dtype=np.int64)
    if t1 <= t0 or len(t) == 0:
        return 0
    starts = np.maximum(t, t0)
    ends = np.empty_like(t)
    ends[:-1] = t[1:]
    ends[-1] = t1
    ends = np.minimum(ends, t1)
    width = np.clip(ends - starts, 0, None)
    return int(np.sum(width * p, dtype=np.int64))
