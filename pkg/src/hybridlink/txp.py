"""Dead-band step controller for BLE transmit power.

The controller watches RSSI, not throughput: holding RSSI inside a narrow
band around the set-point is what keeps throughput near the 800 kbps
target. Throughput is checked afterwards with :func:`settle_check`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .calibration import TxpControllerConfig
from .channel import ChannelProfile, DepthProfile, depth_at, rssi_at
from .links import ThroughputCurve, throughput_from_rssi
from .sim import CONTROL_TICK, Simulator, ms


@dataclass
class TxpController:
    txp_dbm: float = 3.0
    txp_min_dbm: float = -20.0
    txp_max_dbm: float = 20.0
    step_db: float = 0.5
    rssi_lo_dbm: float = -55.25
    rssi_hi_dbm: float = -54.65
    target_kbps: float = 800.0
    update_period_us: int = 100_000
    saturated: bool = False

    def __post_init__(self):
        if not self.txp_min_dbm <= self.txp_max_dbm:
            raise ValueError("txp_min_dbm must not exceed txp_max_dbm")
        if not self.rssi_lo_dbm < self.rssi_hi_dbm:
            raise ValueError("rssi_lo_dbm must be below rssi_hi_dbm")
        if self.step_db <= 0:
            raise ValueError("step_db must be positive")
        if self.update_period_us <= 0:
            raise ValueError("update period must be positive")
        self.txp_dbm = min(max(self.txp_dbm, self.txp_min_dbm), self.txp_max_dbm)

    @classmethod
    def from_config(cls, cfg: TxpControllerConfig) -> "TxpController":
        return cls(txp_dbm=cfg.txp_init_dbm, txp_min_dbm=cfg.txp_min_dbm,
                   txp_max_dbm=cfg.txp_max_dbm, step_db=cfg.step_db,
                   rssi_lo_dbm=cfg.rssi_lo_dbm, rssi_hi_dbm=cfg.rssi_hi_dbm,
                   target_kbps=cfg.target_kbps, update_period_us=ms(cfg.update_period_ms))

    def update(self, measured_rssi_dbm: float) -> float:
        """One control step; returns the new TXP."""
        if measured_rssi_dbm < self.rssi_lo_dbm:
            wanted = self.txp_dbm + self.step_db
        elif measured_rssi_dbm > self.rssi_hi_dbm:
            wanted = self.txp_dbm - self.step_db
        else:
            self.saturated = False
            return self.txp_dbm
        clamped = min(max(wanted, self.txp_min_dbm), self.txp_max_dbm)
        self.saturated = clamped != wanted
        self.txp_dbm = clamped
        return self.txp_dbm


class TickRecord(NamedTuple):
    t_us: int
    depth_cm: float
    rssi_dbm: float
    txp_dbm: float
    kbps: float
    saturated: bool


def closed_loop(ctrl: TxpController, channel: ChannelProfile, curve: ThroughputCurve,
                depths: DepthProfile, duration_us: int,
                rng: np.random.Generator | None = None) -> list[TickRecord]:
    """Run the controller against a channel; one record per control period.

    Each record describes the interval starting at its tick: RSSI is
    measured with the TXP that holds for that interval, then the controller
    picks the TXP for the next one.
    """
    sim = Simulator()
    out: list[TickRecord] = []

    def tick(t):
        depth = depth_at(t, depths)
        rssi = rssi_at(ctrl.txp_dbm, depth, channel, rng)
        txp = ctrl.txp_dbm
        ctrl.update(rssi)
        out.append(TickRecord(t, depth, rssi, txp, throughput_from_rssi(curve, rssi),
                              ctrl.saturated))
        nxt = t + ctrl.update_period_us
        if nxt < duration_us:
            sim.schedule(nxt, CONTROL_TICK, tick)

    sim.schedule(0, CONTROL_TICK, tick)
    sim.run_until(duration_us)
    return out


class LevelResult(NamedTuple):
    depth_cm: float
    mean_kbps: float
    mean_rssi_dbm: float
    final_txp_dbm: float
    saturated: bool
    passed: bool


def settle_check(trace: Iterable[TickRecord], target_kbps: float = 800.0,
                 tolerance: float = 0.10, settle_us: int = 1_000_000) -> list[LevelResult]:
    """Per dwell level: mean throughput after settling within target +/- tolerance."""
    levels: list[list[TickRecord]] = []
    for rec in trace:
        if levels and levels[-1][0].depth_cm == rec.depth_cm:
            levels[-1].append(rec)
        else:
            levels.append([rec])
    results = []
    for recs in levels:
        start = recs[0].t_us
        settled = [r for r in recs if r.t_us - start >= settle_us] or recs[-1:]
        mean_kbps = float(np.mean([r.kbps for r in settled]))
        mean_rssi = float(np.mean([r.rssi_dbm for r in settled]))
        sat = any(r.saturated for r in settled)
        ok = abs(mean_kbps - target_kbps) <= tolerance * target_kbps
        results.append(LevelResult(recs[0].depth_cm, mean_kbps, mean_rssi,
                                   recs[-1].txp_dbm, sat, ok))
    return results


def staircase(depths: Iterable[float], dwell_us: int) -> DepthProfile:
    return DepthProfile(tuple((i * dwell_us, d) for i, d in enumerate(depths)))
