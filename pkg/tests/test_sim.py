import pytest
from hypothesis import given, strategies as st

from hybridlink.sim import CausalityError, Simulator, ms, seeded_rng, to_ms


def test_events_fire_in_time_then_schedule_order():
    sim = Simulator()
    seen = []
    sim.schedule(20, "b", lambda t: seen.append(("b", t)))
    sim.schedule(10, "a", lambda t: seen.append(("a", t)))
    sim.schedule(20, "c", lambda t: seen.append(("c", t)))
    assert sim.run_until(100) == 3
    assert seen == [("a", 10), ("b", 20), ("c", 20)]


def test_cancelled_event_never_fires():
    sim = Simulator()
    seen = []
    eid = sim.schedule(5, "x", lambda t: seen.append(t))
    sim.cancel(eid)
    sim.run_until(10)
    assert seen == []


def test_scheduling_in_the_past_is_rejected():
    sim = Simulator()
    sim.schedule(10, "x", lambda t: sim.schedule(5, "y"))
    with pytest.raises(CausalityError):
        sim.run_until(20)


def test_run_until_stops_at_horizon():
    sim = Simulator()
    seen = []
    sim.schedule(5, "x", seen.append)
    sim.schedule(50, "x", seen.append)
    sim.run_until(10)
    assert seen == [5]
    assert sim.now() == 10


def test_ms_conversion_roundtrip():
    assert ms(1.5) == 1500
    assert to_ms(371600) == 371.6


def test_seeded_rng_reproducible():
    assert seeded_rng(3).normal() == seeded_rng(3).normal()


def _replay(batch):
    sim = Simulator(log_events=True)
    times = []

    def spawn(t, depth=0):
        times.append(sim.now())
        if depth < 2:
            sim.schedule_in(3, "child", lambda t2: spawn(t2, depth + 1))

    for fire_at, kind in batch:
        sim.schedule(fire_at, kind, spawn)
    sim.run_until(10_000)
    return list(sim.log), times


@given(st.lists(st.tuples(st.integers(0, 1000), st.sampled_from("abc")), max_size=40))
def test_replay_is_deterministic_and_time_never_decreases(batch):
    log_a, times = _replay(batch)
    log_b, _ = _replay(batch)
    assert log_a == log_b
    assert times == sorted(times)
    assert [(t, s) for t, s, _ in log_a] == sorted((t, s) for t, s, _ in log_a)
