"""Dual-chip power traces and energy integration.

Power is stored in integer microwatts and time in integer microseconds, so
energies are exact integer picojoule sums and integration is exactly
additive over adjacent windows.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels

PHASES = ("ble_streaming", "wifi_streaming", "pending", "switch_gap")
PJ_PER_MJ = 1_000_000_000


def to_uw(mw: float) -> int:
    return int(round(mw * 1000.0))


def uw_to_mw_str(uw: int) -> str:
    sign = "-" if uw < 0 else ""
    uw = abs(uw)
    return f"{sign}{uw // 1000}.{uw % 1000:03d}"


class PowerSample(NamedTuple):
    t: int
    soc_mw: float
    companion_mw: float


@dataclass
class PowerTrace:
    """Append-only sample-and-hold trace for the SoC and the Wi-Fi companion.

    A sample at the same instant as the previous one replaces it, so the
    trace stays strictly increasing in time.
    """

    t_us: list = field(default_factory=list)
    soc_uw: list = field(default_factory=list)
    companion_uw: list = field(default_factory=list)
    phase: list = field(default_factory=list)
    end_us: int | None = None

    def sample(self, t: int, soc_mw: float, companion_mw: float, phase: str) -> PowerSample:
        if soc_mw < 0 or companion_mw < 0:
            raise ValueError("power must be >= 0")
        if phase not in PHASES:
            raise ValueError(f"unknown phase {phase!r}")
        s, c = to_uw(soc_mw), to_uw(companion_mw)
        if self.t_us and t < self.t_us[-1]:
            raise ValueError("power samples must not go back in time")
        if self.t_us and t == self.t_us[-1]:
            self.soc_uw[-1], self.companion_uw[-1], self.phase[-1] = s, c, phase
        else:
            self.t_us.append(t)
            self.soc_uw.append(s)
            self.companion_uw.append(c)
            self.phase.append(phase)
        return PowerSample(t, s / 1000.0, c / 1000.0)

    def __len__(self):
        return len(self.t_us)

    def samples(self) -> list[PowerSample]:
        return [PowerSample(t, s / 1000.0, c / 1000.0)
                for t, s, c in zip(self.t_us, self.soc_uw, self.companion_uw)]

    def _check_window(self, t0: int, t1: int) -> None:
        if not self.t_us:
            raise ValueError("empty power trace")
        if t0 > t1:
            raise ValueError("t0 must not exceed t1")
        if t0 < self.t_us[0] or t1 < self.t_us[0]:
            raise ValueError(f"window [{t0}, {t1}] starts before the trace")
        if self.end_us is not None and t1 > self.end_us:
            raise ValueError(f"window [{t0}, {t1}] ends after the trace")

    def integrate_pj(self, t0: int, t1: int) -> tuple[int, int]:
        self._check_window(t0, t1)
        t = np.asarray(self.t_us, dtype=np.int64)
        return (kernels.integrate_hold(t, np.asarray(self.soc_uw, dtype=np.int64), t0, t1),
                kernels.integrate_hold(t, np.asarray(self.companion_uw, dtype=np.int64), t0, t1))

    def integrate(self, t0: int, t1: int) -> tuple[float, float]:
        """Energy in mJ per chip (SoC, companion) over [t0, t1]."""
        soc, comp = self.integrate_pj(t0, t1)
        return soc / PJ_PER_MJ, comp / PJ_PER_MJ


@dataclass
class EnergyReport:
    phases_pj: dict
    soc_pj: int
    companion_pj: int

    def as_dict(self) -> dict:
        return {
            "soc": self.soc_pj / PJ_PER_MJ,
            "companion": self.companion_pj / PJ_PER_MJ,
            "total": (self.soc_pj + self.companion_pj) / PJ_PER_MJ,
            "phases": {k: v / PJ_PER_MJ for k, v in self.phases_pj.items()},
        }


def energy_report(t_us, soc_uw, companion_uw, phase, t_end: int) -> EnergyReport:
    """Split the energy of a trace into phases; the phases sum to the totals exactly."""
    t = np.asarray(t_us, dtype=np.int64)
    total = np.asarray(soc_uw, dtype=np.int64) + np.asarray(companion_uw, dtype=np.int64)
    soc = np.asarray(soc_uw, dtype=np.int64)
    comp = np.asarray(companion_uw, dtype=np.int64)
    phases = {}
    labels = np.asarray(phase)
    for name in PHASES:
        mask = labels == name
        phases[name] = kernels.integrate_hold(t, np.where(mask, total, 0), int(t[0]), t_end) \
            if len(t) else 0
    soc_pj = kernels.integrate_hold(t, soc, int(t[0]), t_end) if len(t) else 0
    comp_pj = kernels.integrate_hold(t, comp, int(t[0]), t_end) if len(t) else 0
    return EnergyReport(phases, soc_pj, comp_pj)
