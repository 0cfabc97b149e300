import pytest
from hypothesis import given, strategies as st

from hybridlink.energy import PowerTrace, energy_report, to_uw, uw_to_mw_str


def _trace(steps):
    tr = PowerTrace()
    t = 0
    for dt, soc, comp in steps:
        tr.sample(t, soc, comp, "ble_streaming")
        t += dt
    tr.end_us = t
    return tr


steps = st.lists(st.tuples(st.integers(1, 10_000), st.floats(0, 500), st.floats(0, 500)),
                 min_size=1, max_size=30)


@given(steps, st.data())
def test_integration_exactly_additive(s, data):
    tr = _trace(s)
    a, b, c = sorted(data.draw(st.lists(st.integers(0, tr.end_us), min_size=3, max_size=3)))
    ab, bc, ac = tr.integrate_pj(a, b), tr.integrate_pj(b, c), tr.integrate_pj(a, c)
    assert ac == (ab[0] + bc[0], ab[1] + bc[1])


def test_constant_power_energy():
    tr = _trace([(1_000_000, 10.0, 3.3)])
    assert tr.integrate(0, 1_000_000) == (10.0, 3.3)


def test_same_instant_replaces():
    tr = PowerTrace()
    tr.sample(0, 5, 1, "pending")
    tr.sample(0, 7, 2, "switch_gap")
    assert len(tr) == 1 and tr.samples()[0].soc_mw == 7


def test_validation():
    tr = PowerTrace()
    with pytest.raises(ValueError):
        tr.sample(0, -1, 0, "pending")
    with pytest.raises(ValueError):
        tr.sample(0, 1, 0, "dozing")
    tr.sample(10, 1, 0, "pending")
    with pytest.raises(ValueError):
        tr.sample(5, 1, 0, "pending")
    tr.end_us = 20
    with pytest.raises(ValueError):
        tr.integrate(0, 15)
    with pytest.raises(ValueError):
        tr.integrate(12, 25)


def test_phases_sum_to_total():
    rep = energy_report([0, 10, 20, 30], [1000, 2000, 3000, 4000], [10, 20, 30, 40],
                        ["ble_streaming", "pending", "switch_gap", "wifi_streaming"], 50)
    assert sum(rep.phases_pj.values()) == rep.soc_pj + rep.companion_pj
    assert rep.phases_pj["wifi_streaming"] == 4040 * 20


def test_unit_helpers():
    assert to_uw(3.3) == 3300
    assert uw_to_mw_str(218100) == "218.100"
