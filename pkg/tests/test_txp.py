import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridlink.calibration import DEFAULT
from hybridlink.channel import ChannelProfile, DepthProfile, rssi_at
from hybridlink.txp import TxpController, closed_loop, settle_check, staircase

CURVE = DEFAULT.curves["ble"]
FEM = DEFAULT.channels["ble_fem"]


def fresh(**kw):
    return TxpController.from_config(DEFAULT.controller) if not kw else TxpController(**kw)


def test_defaults():
    c = fresh()
    assert (c.txp_dbm, c.step_db, c.update_period_us) == (3.0, 0.5, 100_000)


def test_dead_band_behaviour():
    c = fresh()
    assert c.update(-60.0) == 3.5
    assert c.update(-50.0) == 3.0
    assert c.update(-55.0) == 3.0


def test_saturation_flag():
    c = TxpController(txp_dbm=20.0)
    c.update(-90.0)
    assert c.txp_dbm == 20.0 and c.saturated


@pytest.mark.parametrize("kw", [{"txp_min_dbm": 5, "txp_max_dbm": 0},
                                {"rssi_lo_dbm": -50, "rssi_hi_dbm": -55},
                                {"step_db": 0}])
def test_validation(kw):
    with pytest.raises(ValueError):
        TxpController(**kw)


@given(st.lists(st.floats(-150, 50, allow_nan=False), max_size=200))
def test_txp_never_leaves_range(rssis):
    c = fresh()
    for r in rssis:
        c.update(r)
        assert c.txp_min_dbm <= c.txp_dbm <= c.txp_max_dbm


def _settle(depth, n=400):
    c = fresh()
    history = []
    for _ in range(n):
        r = rssi_at(c.txp_dbm, depth, FEM)
        history.append((r, c.txp_dbm))
        c.update(r)
    return history


@given(st.floats(0, 10))
def test_reaches_band_in_bounded_updates_and_stays(depth):
    c = fresh()
    r0 = rssi_at(c.txp_dbm, depth, FEM)
    if c.rssi_lo_dbm <= r0 <= c.rssi_hi_dbm:
        need = 0.0
    elif r0 < c.rssi_lo_dbm:
        need = c.rssi_lo_dbm - r0
    else:
        need = r0 - c.rssi_hi_dbm
    bound = math.ceil(need / c.step_db - 1e-9)
    history = _settle(depth)
    inside = [c.rssi_lo_dbm <= r <= c.rssi_hi_dbm for r, _ in history]
    first = inside.index(True)
    assert first <= bound
    assert all(inside[first:])


@given(st.floats(0, 10), st.floats(0.01, 5))
def test_deeper_never_settles_lower(depth, extra):
    deeper = min(depth + extra, 10.0)
    assert _settle(deeper)[-1][1] >= _settle(depth)[-1][1]


def test_closed_loop_staircase_holds_target():
    depths = staircase([0, 2, 4, 6, 8, 10], 8_000_000)
    trace = closed_loop(fresh(), FEM, CURVE, depths, 48_000_000)
    levels = settle_check(trace, settle_us=4_000_000)
    assert [lvl.depth_cm for lvl in levels] == [0, 2, 4, 6, 8, 10]
    assert all(lvl.passed for lvl in levels), levels
    assert not any(lvl.saturated for lvl in levels)


def test_closed_loop_with_noise_is_seeded():
    noisy = ChannelProfile("n", FEM.slope_db_per_cm, FEM.baseline_loss_db, 0.5)
    a = closed_loop(fresh(), noisy, CURVE, DepthProfile.constant(4), 2_000_000,
                    np.random.default_rng(2))
    b = closed_loop(fresh(), noisy, CURVE, DepthProfile.constant(4), 2_000_000,
                    np.random.default_rng(2))
    assert a == b


def test_settle_check_flags_unreachable_depth():
    trace = closed_loop(fresh(), FEM, CURVE, DepthProfile.constant(16.0), 10_000_000)
    (level,) = settle_check(trace)
    assert level.saturated and not level.passed
