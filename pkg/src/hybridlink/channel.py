"""Tissue-mimicking channel: linear RSSI loss with immersion depth.

Water-tank measurements show RSSI falling linearly with depth, so each
protocol/band gets a fitted slope plus a baseline loss covering the 1 m air
gap to the receiver. The baselines are calibration constants.
"""
from __future__ import annotations

import bisect
import warnings
from dataclasses import dataclass, field

import numpy as np

CALIBRATED_MAX_DEPTH_CM = 10.0


class ExtrapolationWarning(UserWarning):
    """Depth outside the measured 0-10 cm range."""


@dataclass(frozen=True)
class ChannelProfile:
    label: str
    slope_db_per_cm: float
    baseline_loss_db: float
    noise_sigma_db: float = 0.0

    def __post_init__(self):
        if not self.slope_db_per_cm < 0:
            raise ValueError(f"{self.label}: slope_db_per_cm must be negative")
        if not self.baseline_loss_db > 0:
            raise ValueError(f"{self.label}: baseline_loss_db must be positive")
        if self.noise_sigma_db < 0:
            raise ValueError(f"{self.label}: noise_sigma_db must be >= 0")


def rssi_at(txp_dbm: float, depth_cm: float, profile: ChannelProfile,
            rng: np.random.Generator | None = None) -> float:
    """Received signal strength (dBm) for a transmitter at ``depth_cm``.

    Noise is drawn from ``rng`` only when the profile has a non-zero sigma,
    so noiseless runs never touch the random stream.
    """
    if depth_cm < 0:
        raise ValueError("depth_cm must be >= 0")
    rssi = txp_dbm - profile.baseline_loss_db + profile.slope_db_per_cm * depth_cm
    if profile.noise_sigma_db > 0:
        if rng is None:
            raise ValueError("a random stream is required when noise_sigma_db > 0")
        rssi += float(rng.normal(0.0, profile.noise_sigma_db))
    return rssi


@dataclass(frozen=True)
class DepthProfile:
    """Piecewise-constant depth schedule: ``(start_us, depth_cm)`` segments."""

    segments: tuple[tuple[int, float], ...] = field(default=((0, 0.0),))

    def __post_init__(self):
        segs = tuple((int(t), float(d)) for t, d in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError("depth profile needs at least one segment")
        if segs[0][0] != 0:
            raise ValueError("first depth segment must start at t=0")
        for (t_a, _), (t_b, _) in zip(segs, segs[1:]):
            if t_b <= t_a:
                raise ValueError("depth segment starts must be strictly increasing")
        for _, d in segs:
            if d < 0:
                raise ValueError("depth_cm must be >= 0")
        object.__setattr__(self, "_starts", [t for t, _ in segs])

    @property
    def extrapolated(self) -> bool:
        return any(d > CALIBRATED_MAX_DEPTH_CM for _, d in self.segments)

    def warn_if_extrapolated(self) -> None:
        if self.extrapolated:
            warnings.warn("depth profile leaves the calibrated 0-10 cm range",
                          ExtrapolationWarning, stacklevel=2)

    @classmethod
    def constant(cls, depth_cm: float) -> "DepthProfile":
        return cls(((0, depth_cm),))


def depth_at(t: int, profile: DepthProfile) -> float:
    """Depth held by the last segment starting at or before ``t``."""
    i = bisect.bisect_right(profile._starts, t) - 1
    return profile.segments[max(i, 0)][1]
