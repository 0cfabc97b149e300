import pytest

from hybridlink.experiments import fit_slope, sweep_depth, sweep_image_size


def test_fit_slope_exact_line():
    assert fit_slope([1, 2, 3], [5, 7, 9]) == pytest.approx(2.0)


def test_size_sweep_random_phase_below_full_frame():
    res = sweep_image_size(sizes_kb=(10, 40), repeats=6, seed=3)
    for row in res["rows"]:
        assert row["random_mean_ms"] <= row["frame_start_latency_ms"] + 1e-6
    again = sweep_image_size(sizes_kb=(10, 40), repeats=6, seed=3)
    assert again == res


def test_size_sweep_parallel_matches_serial():
    a = sweep_image_size(sizes_kb=(10, 20), repeats=2, jobs=1)
    b = sweep_image_size(sizes_kb=(10, 20), repeats=2, jobs=2)
    assert a == b


def test_depth_sweep_adaptive_residual_slope_small():
    res = sweep_depth()
    assert abs(res["rssi_slopes_db_per_cm"]["ble_adaptive"]) < 0.2


def test_sweeps_reject_empty_inputs():
    with pytest.raises(ValueError):
        sweep_image_size(sizes_kb=())
    with pytest.raises(ValueError):
        sweep_depth(depths=())
