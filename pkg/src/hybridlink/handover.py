"""Frame-boundary-synchronized protocol handover.

A switch request never interrupts a frame. It is parked as a pending
handover, the in-flight frame drains on the departing link, and the switch
executes at the frame boundary (plus a fixed per-direction overhead).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

from .links import CalibrationSet, Protocol
from .sim import ms
from .streaming import KB


@dataclass(frozen=True)
class Active:
    protocol: Protocol

    @property
    def label(self) -> str:
        return "active"


@dataclass(frozen=True)
class Pending:
    from_: Protocol
    to: Protocol
    requested_at: int

    def __post_init__(self):
        if self.from_ is self.to:
            raise ValueError("pending handover needs two different protocols")

    @property
    def protocol(self) -> Protocol:
        return self.from_

    @property
    def label(self) -> str:
        return "pending"


HandoverState = Union[Active, Pending]


class SwitchPlan(NamedTuple):
    from_: Protocol
    to: Protocol
    requested_at: int
    boundary_at: int
    completes_at: int


@dataclass(frozen=True)
class SwitchEvent:
    from_: Protocol
    to: Protocol
    requested_at: int
    completed_at: int
    residual_bytes_at_request: int
    deferred_us: int = 0

    @property
    def latency_ms(self) -> float:
        return (self.completed_at - self.requested_at) / 1000.0

    def as_dict(self) -> dict:
        return {
            "from": self.from_.value,
            "to": self.to.value,
            "requested_at_ms": self.requested_at / 1000.0,
            "completed_at_ms": self.completed_at / 1000.0,
            "latency_ms": self.latency_ms,
            "residual_bytes_at_request": self.residual_bytes_at_request,
            "deferred_ms": self.deferred_us / 1000.0,
        }


def request_switch(state: HandoverState, target: Protocol, t: int) -> HandoverState:
    """Register a request to stream on ``target``.

    A request for the active protocol cancels any pending handover; a repeat
    of the pending target keeps the original request time.
    """
    if isinstance(state, Active):
        if target is state.protocol:
            return state
        return Pending(state.protocol, target, t)
    if target is state.from_:
        return Active(state.from_)
    return state


def overhead_us(departing: Protocol, calibration: CalibrationSet) -> int:
    return ms(calibration.overhead_ms(departing))


def on_frame_boundary(state: HandoverState, t: int,
                      calibration: CalibrationSet) -> tuple[HandoverState, SwitchPlan | None]:
    """At a frame boundary a pending handover commits to its target."""
    if isinstance(state, Active):
        return state, None
    plan = SwitchPlan(state.from_, state.to, state.requested_at, t,
                      t + overhead_us(state.from_, calibration))
    return Active(state.to), plan


def predict_latency(size_kb: float, departing: Protocol, calibration: CalibrationSet) -> float:
    """Latency (ms) for a request issued at a frame start: full frame drain plus overhead."""
    drain_kbps = calibration.drain_rate_kbps(departing)
    return size_kb * KB * 8.0 / drain_kbps + calibration.overhead_ms(departing)


def latency_for_residual(residual_bytes: float, departing: Protocol,
                         calibration: CalibrationSet) -> float:
    return residual_bytes * 8.0 / calibration.drain_rate_kbps(departing) + \
        calibration.overhead_ms(departing)
