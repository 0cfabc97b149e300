import pytest

from hybridlink.calibration import (COMPANION_IDLE_MW, DEFAULT, STANDBY_MW, Library)
from hybridlink.channel import rssi_at
from hybridlink.links import (Band, LinkState, Protocol, RadioMode, Role, TxpPolicy,
                              duty_cycle, power_draw, throughput_from_rssi)

WIFI_STA = RadioMode(Protocol.WIFI, band=Band.GHZ_2_4, role=Role.STA)


def test_measured_standby_values_pass_through():
    for (band, role), mw in STANDBY_MW.items():
        model = DEFAULT.power_for(RadioMode(Protocol.WIFI, band=band, role=role))
        assert power_draw(model, LinkState.STANDBY) == mw
        assert model.companion_idle_mw == COMPANION_IDLE_MW == 3.3


def test_fem_coefficient_matches_doubling_oracle():
    """Solve for the FEM cost that makes adaptive power at 6 cm twice the fixed one."""
    lib = DEFAULT
    fixed = RadioMode(Protocol.BLE, TxpPolicy.FIXED, 3.0)
    curve = lib.curves["ble"]
    kbps = throughput_from_rssi(curve, rssi_at(3.0, 6.0, lib.channel_for(fixed)))
    p_fixed = power_draw(lib.power["ble"], LinkState.STREAMING, duty_cycle(kbps, 1000.0), 3.0)
    fem = lib.channels["ble_fem"]
    txp = curve.inverse(800.0) - fem.slope_db_per_cm * 6.0 + fem.baseline_loss_db
    base = lib.power["ble_fem"]
    no_fem = power_draw(base, LinkState.STREAMING, 0.8, 3.0)
    lo, hi = 0.0, 20.0
    for _ in range(100):
        mid = (lo + hi) / 2
        if no_fem + mid * (txp - 3.0) < 2 * p_fixed:
            lo = mid
        else:
            hi = mid
    assert lo == pytest.approx(3.8397, abs=1e-3)  # frozen oracle value
    assert base.fem_mw_per_dbm == pytest.approx(lo, abs=0.01)


def test_overhead_intercept_oracle():
    # aggregate 40 KB point minus the slope line gives the Wi-Fi -> BLE overhead
    overhead = 41.45 - 0.91 * 40
    assert overhead == pytest.approx(5.05, abs=1e-9)
    assert DEFAULT.calibration.overhead_ms(Protocol.WIFI) == pytest.approx(overhead, abs=0.1)
    assert DEFAULT.calibration.overhead_ms(Protocol.BLE) == 0.0


def test_streaming_power_ratio_in_band():
    for band in Band:
        for role in Role:
            ratio = DEFAULT.streaming_power_ratio(RadioMode(Protocol.WIFI, band=band, role=role))
            assert 8.0 <= ratio <= 12.0


def test_check_rejects_out_of_band_ratio():
    lib = Library(soc_wifi_host_mw=500.0)
    with pytest.raises(ValueError, match="ratio"):
        lib.check(WIFI_STA)
