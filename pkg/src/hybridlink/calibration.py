"""The ``calibration.default`` library.

Values that come straight from the measurements (slopes, throughput
anchors, standby powers, companion idle power, latency slopes) are
marked ``measured``. Everything else is a calibration constant picked so the
model reproduces the measured ratios; reports label those as such.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .channel import ChannelProfile
from .links import (Band, CalibrationSet, LinkState, PowerModel, Protocol, RadioMode,
                    Role, ThroughputCurve, TxpPolicy, duty_cycle, power_draw,
                    throughput_from_rssi)
from .channel import rssi_at

# measured RSSI slopes, dB/cm
SLOPE_BLE = -1.89
SLOPE_WIFI_2_4 = -2.8
SLOPE_WIFI_5 = -4.1

# measured throughput anchors
BLE_SHALLOW_KBPS = 1000.0
BLE_SETPOINT = (-55.0, 800.0)
BLE_DEEP = (-58.9, 16.0)
WIFI_SHALLOW_KBPS = 8000.0

# measured standby power, mW
STANDBY_MW = {
    (Band.GHZ_2_4, Role.STA): 25.01,
    (Band.GHZ_5, Role.STA): 23.03,
    (Band.GHZ_2_4, Role.AP): 218.10,
    (Band.GHZ_5, Role.AP): 221.36,
}
COMPANION_IDLE_MW = 3.3

# calibration: baseline losses put fixed 3 dBm BLE at -40 dBm at depth 0.
# The FEM board carries extra loss so adaptive control stays inside its
# authority down to 10 cm (needs txp <= 20 dBm at -55 dBm).
BLE_BASELINE_DB = 43.0
BLE_FEM_BASELINE_DB = 55.5
WIFI_BASELINE_DB = 50.0
WIFI_NOMINAL_TXP_DBM = 10.0
WIFI_SENSITIVITY_SHIFT_DB = 20.0

BLE_FIXED_TXP_DBM = 3.0
BLE_POWER = PowerModel(standby_mw=5.0, active_base_mw=10.0, active_tx_delta_mw=20.0)
# solved so adaptive power at 6 cm is twice fixed 3 dBm power
BLE_FEM_POWER = replace(BLE_POWER, fem_mw_per_dbm=3.84)
WIFI_ACTIVE_BASE_MW = 68.0
WIFI_ACTIVE_TX_DELTA_MW = 200.0
WIFI_TPC_MW_PER_DB = 2.0
# SoC power while it feeds the Wi-Fi companion over QSPI
SOC_WIFI_HOST_MW = 32.0

# streaming power ratio Wi-Fi / BLE at depth 0 accepted at load time
POWER_RATIO_BAND = (8.0, 12.0)


@dataclass(frozen=True)
class TxpControllerConfig:
    txp_init_dbm: float = 3.0
    txp_min_dbm: float = -20.0
    txp_max_dbm: float = 20.0
    step_db: float = 0.5
    rssi_lo_dbm: float = -55.25
    rssi_hi_dbm: float = -54.65
    target_kbps: float = 800.0
    update_period_ms: float = 100.0


def _ble_curve() -> ThroughputCurve:
    return ThroughputCurve.through(BLE_SHALLOW_KBPS, BLE_SETPOINT, BLE_DEEP)


def _wifi_curve() -> ThroughputCurve:
    ble = _ble_curve()
    return ThroughputCurve(WIFI_SHALLOW_KBPS, ble.r0_dbm - WIFI_SENSITIVITY_SHIFT_DB, ble.k_db)


def _wifi_power(band: Band, role: Role) -> PowerModel:
    return PowerModel(standby_mw=STANDBY_MW[(band, role)],
                      companion_idle_mw=COMPANION_IDLE_MW,
                      active_base_mw=WIFI_ACTIVE_BASE_MW,
                      active_tx_delta_mw=WIFI_ACTIVE_TX_DELTA_MW,
                      tpc_mw_per_db=WIFI_TPC_MW_PER_DB)


@dataclass(frozen=True)
class Library:
    channels: dict = field(default_factory=lambda: {
        "ble": ChannelProfile("ble", SLOPE_BLE, BLE_BASELINE_DB),
        "ble_fem": ChannelProfile("ble_fem", SLOPE_BLE, BLE_FEM_BASELINE_DB),
        "wifi_2.4": ChannelProfile("wifi_2.4", SLOPE_WIFI_2_4, WIFI_BASELINE_DB),
        "wifi_5": ChannelProfile("wifi_5", SLOPE_WIFI_5, WIFI_BASELINE_DB),
    })
    curves: dict = field(default_factory=lambda: {
        "ble": _ble_curve(),
        "wifi_2.4": _wifi_curve(),
        "wifi_5": _wifi_curve(),
    })
    power: dict = field(default_factory=lambda: {
        "ble": BLE_POWER,
        "ble_fem": BLE_FEM_POWER,
        **{f"wifi_{b.value}_{r.value}": _wifi_power(b, r) for b in Band for r in Role},
    })
    soc_wifi_host_mw: float = SOC_WIFI_HOST_MW
    wifi_txp_dbm: float = WIFI_NOMINAL_TXP_DBM
    calibration: CalibrationSet = field(default_factory=CalibrationSet)
    controller: TxpControllerConfig = field(default_factory=TxpControllerConfig)

    # lookups by radio mode
    def channel_for(self, mode: RadioMode) -> ChannelProfile:
        if mode.protocol is Protocol.BLE:
            return self.channels["ble_fem" if mode.fem else "ble"]
        return self.channels[f"wifi_{mode.band.value}"]

    def curve_for(self, mode: RadioMode) -> ThroughputCurve:
        if mode.protocol is Protocol.BLE:
            return self.curves["ble"]
        return self.curves[f"wifi_{mode.band.value}"]

    def power_for(self, mode: RadioMode) -> PowerModel:
        if mode.protocol is Protocol.BLE:
            return self.power["ble_fem" if mode.fem else "ble"]
        return self.power[f"wifi_{mode.band.value}_{mode.role.value}"]

    def streaming_power_ratio(self, wifi: RadioMode, ble: RadioMode | None = None) -> float:
        """Wi-Fi (SoC + companion) over BLE-fixed SoC streaming power at depth 0."""
        ble = ble or RadioMode(Protocol.BLE, TxpPolicy.FIXED, BLE_FIXED_TXP_DBM)
        ble_kbps = throughput_from_rssi(self.curve_for(ble),
                                        rssi_at(ble.ble_txp_dbm, 0.0, _noiseless(self.channel_for(ble))))
        ble_mw = power_draw(self.power_for(ble), LinkState.STREAMING,
                            duty_cycle(ble_kbps, self.curve_for(ble).t_max_kbps),
                            ble.ble_txp_dbm, 0.0)
        wifi_mw = self.soc_wifi_host_mw + power_draw(self.power_for(wifi), LinkState.STREAMING,
                                                     1.0, self.wifi_txp_dbm, 0.0)
        return wifi_mw / ble_mw

    def check(self, wifi: RadioMode) -> None:
        lo, hi = POWER_RATIO_BAND
        ratio = self.streaming_power_ratio(wifi)
        if not lo <= ratio <= hi:
            raise ValueError(
                f"Wi-Fi/BLE streaming power ratio {ratio:.2f} outside [{lo}, {hi}]")


def _noiseless(profile: ChannelProfile) -> ChannelProfile:
    return replace(profile, noise_sigma_db=0.0)


DEFAULT = Library()

CALIBRATION_NOTE = ("active streaming power values are calibration constants; "
                    "only standby and companion idle power are measured")
