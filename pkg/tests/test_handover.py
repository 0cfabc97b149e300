import pytest
from hypothesis import given, strategies as st

from hybridlink.handover import (Active, Pending, SwitchEvent, latency_for_residual,
                                 on_frame_boundary, overhead_us, predict_latency,
                                 request_switch)
from hybridlink.links import CalibrationSet, Protocol

BLE, WIFI = Protocol.BLE, Protocol.WIFI
CAL = CalibrationSet()


def test_request_creates_pending():
    assert request_switch(Active(BLE), WIFI, 7) == Pending(BLE, WIFI, 7)


def test_request_for_active_is_noop():
    assert request_switch(Active(BLE), BLE, 7) == Active(BLE)


def test_request_for_departing_cancels():
    assert request_switch(Pending(BLE, WIFI, 1), BLE, 9) == Active(BLE)


def test_repeat_request_keeps_original_time():
    assert request_switch(Pending(BLE, WIFI, 1), WIFI, 9) == Pending(BLE, WIFI, 1)


def test_pending_needs_two_protocols():
    with pytest.raises(ValueError):
        Pending(BLE, BLE, 0)


def test_boundary_commits_with_direction_overhead():
    state, plan = on_frame_boundary(Pending(WIFI, BLE, 100), 5_000, CAL)
    assert state == Active(BLE)
    assert plan.completes_at == 5_000 + overhead_us(WIFI, CAL) == 10_000
    assert on_frame_boundary(Active(BLE), 5, CAL) == (Active(BLE), None)


def test_predicted_latencies():
    assert predict_latency(40, BLE, CAL) == pytest.approx(371.6)
    assert predict_latency(10, BLE, CAL) == pytest.approx(92.9)
    assert predict_latency(40, WIFI, CAL) == pytest.approx(41.4)
    assert predict_latency(10, WIFI, CAL) == pytest.approx(14.1)


@given(st.sampled_from([BLE, WIFI]), st.floats(1, 64), st.floats(0.01, 10))
def test_latency_strictly_increasing_in_size(p, size, extra):
    assert predict_latency(size + extra, p, CAL) > predict_latency(size, p, CAL)


def test_slope_asymmetry():
    up = predict_latency(40, BLE, CAL) - predict_latency(10, BLE, CAL)
    down = predict_latency(40, WIFI, CAL) - predict_latency(10, WIFI, CAL)
    assert 9 <= up / down <= 11


def test_residual_latency_full_frame_equals_prediction():
    assert latency_for_residual(40960, BLE, CAL) == pytest.approx(predict_latency(40, BLE, CAL))


def test_switch_event_dict():
    ev = SwitchEvent(BLE, WIFI, 1000, 372_600, 40960, 0)
    d = ev.as_dict()
    assert d["latency_ms"] == 371.6 and d["from"] == "ble" and d["to"] == "wifi"
