"""Frame source, chunked transfer over the active link, and receiver checks."""
from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from . import kernels
from .links import Protocol

KB = 1024
DEFAULT_FRAME_BYTES = 40 * KB
CHUNK_BYTES = {Protocol.BLE: 244, Protocol.WIFI: 1460}
# float slack when turning fractional microseconds into integer ticks
_EPS = 1e-6


class IntegrityError(RuntimeError):
    """A frame failed reassembly: missing bytes, bad checksum or mixed protocols."""

    def __init__(self, frame_id, reason):
        super().__init__(f"frame {frame_id}: {reason}")
        self.frame_id = frame_id
        self.reason = reason


@dataclass
class Frame:
    id: int
    size_bytes: int
    checksum: int
    payload: bytes = field(repr=False)

    @classmethod
    def synthesize(cls, frame_id: int, size_bytes: int) -> "Frame":
        payload = kernels.synth_payload(frame_id, size_bytes)
        return cls(frame_id, size_bytes, kernels.digest64(payload), payload)


class ChunkRecord(NamedTuple):
    frame_id: int
    offset_bytes: int
    len_bytes: int
    protocol: Protocol
    completed_at: int


class DeliveryRecord(NamedTuple):
    frame_id: int
    size_bytes: int
    protocol: Protocol
    started_at: int
    completed_at: int
    verified: bool


class FrameSource:
    """Emits gapless frame ids; size changes take effect at the next frame."""

    def __init__(self, sizes=((0, DEFAULT_FRAME_BYTES),)):
        sizes = sorted((int(t), int(s)) for t, s in sizes)
        if not sizes or sizes[0][0] != 0:
            raise ValueError("size schedule must start at t=0")
        if any(s <= 0 for _, s in sizes):
            raise ValueError("frame sizes must be positive")
        self._starts = [t for t, _ in sizes]
        self._sizes = [s for _, s in sizes]
        self.next_id = 0

    def size_at(self, t: int) -> int:
        return self._sizes[bisect.bisect_right(self._starts, t) - 1]

    def emit_frame(self, t: int) -> Frame:
        frame = Frame.synthesize(self.next_id, self.size_at(t))
        self.next_id += 1
        return frame


class Transfer:
    """Flow-level transfer of one frame at a piecewise-constant byte rate.

    Delivered bytes accumulate as a float; chunk boundaries crossed inside a
    rate segment get their completion instant by interpolation.
    """

    def __init__(self, frame: Frame, protocol: Protocol, t_start: int,
                 drop_chunk: int | None = None):
        self.frame = frame
        self.protocol = protocol
        self.started_at = t_start
        self.delivered = 0.0
        self.rate = 0.0  # bytes per microsecond
        self.t_last = t_start
        self.chunks: list[ChunkRecord] = []
        self._chunk_index = 0
        self._chunk_end = min(frame.size_bytes, CHUNK_BYTES[protocol])
        self._chunk_start = 0
        self._drop = drop_chunk
        self.protocols_seen = {protocol}

    @property
    def remaining(self) -> float:
        return max(self.frame.size_bytes - self.delivered, 0.0)

    def advance(self, dt_us: int) -> float:
        """Move ``dt_us`` forward at the current rate; returns bytes advanced."""
        if dt_us < 0:
            raise ValueError("dt must be >= 0")
        t0 = self.t_last
        before = self.delivered
        after = min(before + self.rate * dt_us, float(self.frame.size_bytes))
        while self._chunk_start < self.frame.size_bytes and after >= self._chunk_end - _EPS:
            lag = (self._chunk_end - before) / self.rate if self.rate > 0 else 0.0
            done_at = min(t0 + max(math.ceil(lag - _EPS), 0), t0 + dt_us)
            self._emit_chunk(done_at)
        self.delivered = after
        self.t_last = t0 + dt_us
        return after - before

    def advance_to(self, t: int) -> float:
        return self.advance(t - self.t_last)

    def set_rate(self, bytes_per_us: float) -> None:
        if bytes_per_us < 0:
            raise ValueError("rate must be >= 0")
        self.rate = bytes_per_us

    def switch_protocol(self, protocol: Protocol) -> None:
        """Change the carrying protocol mid-frame (only without boundary sync)."""
        self.protocol = protocol
        self.protocols_seen.add(protocol)

    def time_to_complete_us(self) -> int | None:
        if self.remaining <= 0:
            return 0
        if self.rate <= 0:
            return None
        return max(math.ceil(self.remaining / self.rate - _EPS), 0)

    def finish(self, t: int) -> None:
        """Close out the frame at ``t``; float residue is assigned to the last chunk."""
        self.advance_to(t)
        self.delivered = float(self.frame.size_bytes)
        while self._chunk_start < self.frame.size_bytes:
            self._emit_chunk(t)

    def _emit_chunk(self, t: int) -> None:
        length = self._chunk_end - self._chunk_start
        if self._chunk_index != self._drop:
            self.chunks.append(ChunkRecord(self.frame.id, self._chunk_start, length,
                                           self.protocol, t))
        self._chunk_index += 1
        self._chunk_start = self._chunk_end
        self._chunk_end = min(self.frame.size_bytes,
                              self._chunk_start + CHUNK_BYTES[self.protocol])


class Receiver:
    """Reassembles frames from chunk records and verifies them."""

    def __init__(self, corrupt: tuple[int, int] | None = None):
        self.records: list[DeliveryRecord] = []
        self._corrupt = corrupt

    def on_frame_complete(self, transfer: Transfer, t: int) -> DeliveryRecord:
        frame = transfer.frame
        chunks = transfer.chunks
        protocols = {c.protocol for c in chunks}
        if len(protocols) > 1 or len(transfer.protocols_seen) > 1:
            raise IntegrityError(frame.id, "protocol-mixed chunks")
        pos = 0
        for c in chunks:
            if c.offset_bytes != pos:
                raise IntegrityError(frame.id, f"missing bytes at offset {pos}")
            pos += c.len_bytes
        if pos != frame.size_bytes:
            raise IntegrityError(frame.id, f"received {pos} of {frame.size_bytes} bytes")
        data = b"".join(frame.payload[c.offset_bytes:c.offset_bytes + c.len_bytes]
                        for c in chunks)
        if self._corrupt is not None and self._corrupt[0] == frame.id:
            buf = bytearray(data)
            buf[self._corrupt[1] % len(buf)] ^= 0xFF
            data = bytes(buf)
        if kernels.digest64(data) != frame.checksum:
            raise IntegrityError(frame.id, "checksum mismatch")
        rec = DeliveryRecord(frame.id, frame.size_bytes, chunks[0].protocol,
                             transfer.started_at, t, True)
        self.records.append(rec)
        return rec


class FpsMeter:
    """Windowed frame rate at the receiver.

    With two or more completions in ``(t - window, t]`` the rate is measured
    between the first and last of them, which is exact in steady state; with
    fewer it falls back to count / window.
    """

    def __init__(self, window_us: int = 1_000_000):
        if window_us <= 0:
            raise ValueError("window must be positive")
        self.window_us = window_us
        self.completions: deque[int] = deque()

    def tick(self, t: int) -> None:
        self.completions.append(t)

    def fps(self, t: int) -> float:
        lo = t - self.window_us
        while self.completions and self.completions[0] <= lo:
            self.completions.popleft()
        inside = [c for c in self.completions if c <= t]
        return window_fps(inside, self.window_us)


def window_fps(completions: list[int], window_us: int) -> float:
    n = len(completions)
    if n >= 2 and completions[-1] > completions[0]:
        return (n - 1) * 1e6 / (completions[-1] - completions[0])
    return n * 1e6 / window_us
