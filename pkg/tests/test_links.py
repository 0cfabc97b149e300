import math

import pytest
from hypothesis import assume, given, strategies as st

from hybridlink.calibration import DEFAULT
from hybridlink.channel import rssi_at
from hybridlink.links import (Band, CalibrationSet, Role, LinkState, PowerModel, Protocol, RadioMode,
                              ThroughputCurve, TxpPolicy, duty_cycle, power_draw,
                              steady_goodput, throughput_from_rssi)

BLE_CURVE = DEFAULT.curves["ble"]


def _bisect_curve(t_max, a, b):
    """Independent oracle: bisection on k with r0 pinned by the first anchor."""
    (ra, ta), (rb, tb) = a, b

    def r0(k):
        return ra + k * math.log(t_max / ta - 1)

    def miss(k):
        return t_max / (1 + math.exp(-(rb - r0(k)) / k)) - tb

    lo, hi = 0.1, 10.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if miss(lo) * miss(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return r0(lo), lo


def test_ble_curve_matches_bisection_oracle():
    r0, k = _bisect_curve(1000.0, (-55.0, 800.0), (-58.9, 16.0))
    assert BLE_CURVE.r0_dbm == pytest.approx(r0, abs=1e-9)
    assert BLE_CURVE.k_db == pytest.approx(k, abs=1e-9)
    # frozen from the oracle
    assert BLE_CURVE.r0_dbm == pytest.approx(-55.98206, abs=1e-5)
    assert BLE_CURVE.k_db == pytest.approx(0.708404, abs=1e-6)


def test_ble_curve_passes_anchors():
    assert throughput_from_rssi(BLE_CURVE, -55.0) == pytest.approx(800.0)
    assert throughput_from_rssi(BLE_CURVE, -58.9) == pytest.approx(16.0)


def test_wifi_curve_saturates_at_depth_zero():
    curve = DEFAULT.curves["wifi_2.4"]
    rssi = rssi_at(DEFAULT.wifi_txp_dbm, 0.0, DEFAULT.channels["wifi_2.4"])
    assert throughput_from_rssi(curve, rssi) == pytest.approx(8000.0, rel=1e-6)


# far from r0 the logistic rounds to equal floats; test where it resolves
@given(st.floats(-75, -40), st.floats(1e-3, 10))
def test_curve_strictly_monotone(r1, gap):
    r2 = r1 + gap
    assert throughput_from_rssi(BLE_CURVE, r1) < throughput_from_rssi(BLE_CURVE, r2)


def test_inverse_roundtrip():
    assert throughput_from_rssi(BLE_CURVE, BLE_CURVE.inverse(800.0)) == pytest.approx(800.0)
    with pytest.raises(ValueError):
        BLE_CURVE.inverse(1000.0)


def test_curve_validation():
    with pytest.raises(ValueError):
        ThroughputCurve(0, -50, 1)
    with pytest.raises(ValueError):
        ThroughputCurve.through(1000, (-55, 1200), (-58, 16))


def test_goodput_and_duty():
    assert steady_goodput(BLE_CURVE, 800.0) == 100_000.0
    assert steady_goodput(BLE_CURVE, 5000.0) == 125_000.0
    assert duty_cycle(500, 1000) == 0.5
    with pytest.raises(ValueError):
        duty_cycle(1500, 1000)


def test_power_draw_states():
    m = PowerModel(standby_mw=5, active_base_mw=10, active_tx_delta_mw=20, fem_mw_per_dbm=2)
    assert power_draw(m, LinkState.STANDBY, 0.7, 15) == 5
    assert power_draw(m, LinkState.STREAMING, 0.5, 3) == 20
    assert power_draw(m, LinkState.STREAMING, 0.5, 8) == 30
    with pytest.raises(ValueError):
        power_draw(m, LinkState.STREAMING, 1.5)
    with pytest.raises(ValueError):
        PowerModel(standby_mw=-1)


def _ble_power(mode, depth):
    curve = DEFAULT.curve_for(mode)
    kbps = throughput_from_rssi(curve, rssi_at(mode.ble_txp_dbm, depth,
                                               DEFAULT.channel_for(mode)))
    return power_draw(DEFAULT.power_for(mode), LinkState.STREAMING,
                      duty_cycle(kbps, curve.t_max_kbps), mode.ble_txp_dbm)


@given(st.floats(0, 10), st.floats(0, 10))
def test_fixed_ble_power_non_increasing_with_depth(d1, d2):
    assume(d1 < d2)
    mode = RadioMode(Protocol.BLE, TxpPolicy.FIXED, 3.0)
    assert _ble_power(mode, d2) <= _ble_power(mode, d1) + 1e-12


@given(st.floats(0, 10), st.floats(0, 10))
def test_adaptive_ble_power_non_decreasing_with_depth(d1, d2):
    assume(d1 < d2)
    lib = DEFAULT
    curve = lib.curves["ble"]
    ch = lib.channels["ble_fem"]
    model = lib.power["ble_fem"]

    def held(d):  # TXP that holds the set-point RSSI at depth d
        txp = curve.inverse(800.0) - ch.slope_db_per_cm * d + ch.baseline_loss_db
        return power_draw(model, LinkState.STREAMING, 0.8, txp)
    assert held(d2) >= held(d1)


@pytest.mark.parametrize("depth", [8.0, 9.0, 10.0])
def test_wifi_5ghz_costs_more_when_deep(depth):
    def total(band):
        mode = RadioMode(Protocol.WIFI, band=band, role=Role.STA)
        ch = DEFAULT.channel_for(mode)
        return power_draw(DEFAULT.power_for(mode), LinkState.STREAMING, 1.0,
                          DEFAULT.wifi_txp_dbm, -ch.slope_db_per_cm * depth)
    assert total(Band.GHZ_5) >= total(Band.GHZ_2_4)


def test_radio_mode_validation_and_key():
    assert RadioMode(Protocol.BLE, TxpPolicy.FIXED, 3.0).key == "ble_fixed_3dbm"
    with pytest.raises(ValueError):
        RadioMode(Protocol.BLE, TxpPolicy.FIXED, 9.0)


def test_calibration_set_defaults():
    cal = CalibrationSet()
    assert cal.drain_rate_kbps(Protocol.BLE) == pytest.approx(8192 / 9.29)
    assert cal.overhead_ms(Protocol.WIFI) == 5.0
    with pytest.raises(ValueError):
        CalibrationSet(drain_rate_ble_kbps=0)
