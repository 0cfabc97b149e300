"""Protocol link models for BLE and Wi-Fi.

Throughput follows a logistic curve in RSSI; power is a standby value or an
active base plus duty, FEM and transmit-power-control terms. The absolute
active-power numbers are calibration constants chosen to satisfy the
reported ratios, not measurements.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class Protocol(str, enum.Enum):
    BLE = "ble"
    WIFI = "wifi"

    @property
    def other(self) -> "Protocol":
        return Protocol.WIFI if self is Protocol.BLE else Protocol.BLE


class Band(str, enum.Enum):
    GHZ_2_4 = "2.4"
    GHZ_5 = "5"


class Role(str, enum.Enum):
    STA = "sta"
    AP = "ap"


class TxpPolicy(str, enum.Enum):
    FIXED = "fixed"
    ADAPTIVE = "adaptive"


class LinkState(str, enum.Enum):
    STANDBY = "standby"
    STREAMING = "streaming"


BLE_TXP_MIN_DBM = -20.0
BLE_TXP_MAX_DBM = 3.0
BLE_TXP_MAX_FEM_DBM = 20.0


@dataclass(frozen=True)
class RadioMode:
    protocol: Protocol
    ble_policy: TxpPolicy | None = None
    ble_txp_dbm: float | None = None
    fem: bool = False
    band: Band | None = None
    role: Role | None = None

    def __post_init__(self):
        if self.protocol is Protocol.BLE:
            if self.band is not None or self.role is not None:
                raise ValueError("band/role apply to Wi-Fi only")
            if self.ble_policy is None:
                raise ValueError("BLE mode needs a TXP policy")
            if self.ble_policy is TxpPolicy.ADAPTIVE and not self.fem:
                raise ValueError("adaptive TXP control runs with the FEM fitted")
            if self.ble_policy is TxpPolicy.FIXED:
                if self.ble_txp_dbm is None:
                    raise ValueError("fixed TXP policy needs ble_txp_dbm")
                hi = BLE_TXP_MAX_FEM_DBM if self.fem else BLE_TXP_MAX_DBM
                if not BLE_TXP_MIN_DBM <= self.ble_txp_dbm <= hi:
                    raise ValueError(
                        f"BLE TXP {self.ble_txp_dbm} dBm outside [{BLE_TXP_MIN_DBM}, {hi}]")
        else:
            if self.ble_policy is not None or self.ble_txp_dbm is not None:
                raise ValueError("TXP policy applies to BLE only")
            if self.band is None or self.role is None:
                raise ValueError("Wi-Fi mode needs band and role")

    @property
    def key(self) -> str:
        if self.protocol is Protocol.BLE:
            if self.ble_policy is TxpPolicy.ADAPTIVE:
                return "ble_adaptive"
            return f"ble_fixed_{self.ble_txp_dbm:g}dbm"
        return f"wifi_{self.band.value}_{self.role.value}"


@dataclass(frozen=True)
class ThroughputCurve:
    """Logistic throughput ``t_max / (1 + exp(-(rssi - r0) / k))`` in kbps."""

    t_max_kbps: float
    r0_dbm: float
    k_db: float

    def __post_init__(self):
        if self.t_max_kbps <= 0:
            raise ValueError("t_max_kbps must be positive")
        if self.k_db <= 0:
            raise ValueError("k_db must be positive")

    @classmethod
    def through(cls, t_max_kbps, point_a, point_b):
        """Fit r0 and k so the curve passes through two (rssi, kbps) points."""
        (ra, ta), (rb, tb) = point_a, point_b
        for t in (ta, tb):
            if not 0 < t < t_max_kbps:
                raise ValueError("anchor throughput must lie strictly inside (0, t_max)")
        # logit of the normalised throughput is linear in rssi
        la = math.log(ta / (t_max_kbps - ta))
        lb = math.log(tb / (t_max_kbps - tb))
        k = (ra - rb) / (la - lb)
        return cls(t_max_kbps, ra - k * la, k)

    def inverse(self, kbps: float) -> float:
        """RSSI at which the curve delivers ``kbps``."""
        if not 0 < kbps < self.t_max_kbps:
            raise ValueError("kbps must lie strictly inside (0, t_max)")
        return self.r0_dbm + self.k_db * math.log(kbps / (self.t_max_kbps - kbps))


def throughput_from_rssi(curve: ThroughputCurve, rssi_dbm: float) -> float:
    x = -(rssi_dbm - curve.r0_dbm) / curve.k_db
    if x > 700:  # exp overflow; the curve is numerically zero here
        return 0.0
    return curve.t_max_kbps / (1.0 + math.exp(x))


def steady_goodput(curve: ThroughputCurve, kbps: float) -> float:
    """Application goodput in bytes/s, capped at the curve's maximum."""
    if kbps < 0:
        raise ValueError("kbps must be >= 0")
    return min(kbps, curve.t_max_kbps) * 1000.0 / 8.0


def kbps_to_bytes_per_us(kbps: float) -> float:
    return kbps / 8000.0


def duty_cycle(achieved_kbps: float, t_max_kbps: float) -> float:
    """Radio-activity fraction: achieved over maximum throughput."""
    if t_max_kbps <= 0:
        raise ValueError("t_max_kbps must be positive")
    if not 0 <= achieved_kbps <= t_max_kbps * (1 + 1e-12):
        raise ValueError("achieved throughput must lie in [0, t_max]")
    return min(achieved_kbps / t_max_kbps, 1.0)


@dataclass(frozen=True)
class PowerModel:
    standby_mw: float
    companion_idle_mw: float = 0.0
    active_base_mw: float = 0.0
    active_tx_delta_mw: float = 0.0
    fem_mw_per_dbm: float = 0.0
    tpc_mw_per_db: float = 0.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if value < 0:
                raise ValueError(f"PowerModel.{name} must be >= 0, got {value}")


# FEM cost is charged above the bare SoC's ceiling.
FEM_REFERENCE_DBM = BLE_TXP_MAX_DBM


def power_draw(model: PowerModel, state: LinkState, duty: float = 0.0,
               txp_dbm: float = 0.0, compensated_db: float = 0.0) -> float:
    """Power in mW for one chip in the given link state."""
    if not 0.0 <= duty <= 1.0:
        raise ValueError(f"duty must lie in [0, 1], got {duty}")
    if state is LinkState.STANDBY:
        return model.standby_mw
    return (model.active_base_mw
            + duty * model.active_tx_delta_mw
            + model.fem_mw_per_dbm * max(0.0, txp_dbm - FEM_REFERENCE_DBM)
            + model.tpc_mw_per_db * max(0.0, compensated_db))


@dataclass(frozen=True)
class CalibrationSet:
    """Handover drain rates and per-direction switch overheads."""

    drain_rate_ble_kbps: float = 8192.0 / 9.29
    drain_rate_wifi_kbps: float = 8192.0 / 0.91
    switch_overhead_ble_to_wifi_ms: float = 0.0
    switch_overhead_wifi_to_ble_ms: float = 5.0

    def __post_init__(self):
        if self.drain_rate_ble_kbps <= 0 or self.drain_rate_wifi_kbps <= 0:
            raise ValueError("drain rates must be positive")
        if self.switch_overhead_ble_to_wifi_ms < 0 or self.switch_overhead_wifi_to_ble_ms < 0:
            raise ValueError("switch overheads must be >= 0")

    def drain_rate_kbps(self, departing: Protocol) -> float:
        if departing is Protocol.BLE:
            return self.drain_rate_ble_kbps
        return self.drain_rate_wifi_kbps

    def overhead_ms(self, departing: Protocol) -> float:
        if departing is Protocol.BLE:
            return self.switch_overhead_ble_to_wifi_ms
        return self.switch_overhead_wifi_to_ble_ms
