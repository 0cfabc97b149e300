"""Scenario runner and the size / depth sweeps."""
from __future__ import annotations

import copy
import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .calibration import DEFAULT, Library
from .channel import DepthProfile, rssi_at
from .engine import TRACE_COLUMNS, RunResult, simulate
from .handover import predict_latency
from .links import (Band, LinkState, Protocol, RadioMode, Role, TxpPolicy, duty_cycle,
                    power_draw, steady_goodput, throughput_from_rssi)
from .scenario import SWITCHING_SCENARIO, Scenario
from .sim import US_PER_MS, seeded_rng
from .streaming import KB
from .txp import TxpController, closed_loop

DEFAULT_SIZES_KB = (10, 20, 30, 40)
DEFAULT_DEPTHS_CM = (0, 2, 4, 6, 8, 10)
DIRECTIONS = ((Protocol.BLE, Protocol.WIFI), (Protocol.WIFI, Protocol.BLE))


def direction_key(src: Protocol, dst: Protocol) -> str:
    return f"{src.value}_to_{dst.value}"


def write_trace(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        writer.writerows(rows)


def write_json(data, path) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2)
        fh.write("\n")


def run_scenario(scenario: Scenario, out_dir=None) -> tuple[RunResult, dict]:
    """Simulate, and when ``out_dir`` is given write trace.csv and summary.json."""
    result = simulate(scenario)
    summary = result.summary()
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if result.rows is not None:
            write_trace(result.rows, out / "trace.csv")
        write_json(summary, out / "summary.json")
    return result, summary


# image-size sweep ------------------------------------------------------------

WARMUP_MS = 1000.0


def _steady_frame_ms(lib: Library, mode: RadioMode, size_bytes: int, depth: float) -> float:
    kbps = throughput_from_rssi(lib.curve_for(mode),
                                rssi_at(_txp(lib, mode), depth, _quiet(lib.channel_for(mode))))
    if mode.ble_policy is TxpPolicy.ADAPTIVE:
        kbps = lib.controller.target_kbps
    return size_bytes / steady_goodput(lib.curve_for(mode), kbps) * 1000.0


def _quiet(profile):
    from dataclasses import replace
    return replace(profile, noise_sigma_db=0.0)


def _txp(lib: Library, mode: RadioMode) -> float:
    if mode.protocol is Protocol.WIFI:
        return lib.wifi_txp_dbm
    if mode.ble_policy is TxpPolicy.ADAPTIVE:
        return lib.controller.txp_init_dbm
    return mode.ble_txp_dbm


def _switch_run(config: dict, size_bytes: int, src: Protocol, dst: Protocol,
                request_ms: float, align: bool) -> float:
    base = Scenario.from_dict(config)
    lib = base.library
    modes = {Protocol.BLE: base.ble, Protocol.WIFI: base.wifi}
    depth = base.depth_profile.segments[0][1]
    frame_ms = max(_steady_frame_ms(lib, modes[p], size_bytes, depth) for p in Protocol)
    horizon = request_ms + 3 * frame_ms + predict_latency(size_bytes / KB, src, lib.calibration)
    data = copy.deepcopy(config)
    data.pop("auto", None)
    data.pop("image_size_schedule", None)
    data.update({
        "image_size_bytes": size_bytes,
        "initial_protocol": src.value,
        "duration_ms": horizon + 100.0,
        "trace": {"enabled": False},
        "switch_schedule": [{"t_ms": request_ms, "to": dst.value,
                             "align": "frame_start" if align else "none"}],
    })
    result = simulate(Scenario.from_dict(data))
    if result.failure:
        raise RuntimeError(f"sweep run failed integrity: {result.failure}")
    events = [e for e in result.switch_events if e.from_ is src and e.to is dst]
    if not events:
        raise RuntimeError(f"no {src.value}->{dst.value} switch completed for {size_bytes} B")
    return events[0].latency_ms


def _size_point(args):
    config, size_kb, d_idx, repeats, seed = args
    src, dst = DIRECTIONS[d_idx]
    size_bytes = int(round(size_kb * KB))
    base = Scenario.from_dict(config)
    modes = {Protocol.BLE: base.ble, Protocol.WIFI: base.wifi}
    depth = base.depth_profile.segments[0][1]
    frame_ms = _steady_frame_ms(base.library, modes[src], size_bytes, depth)
    aligned = _switch_run(config, size_bytes, src, dst, WARMUP_MS, True)
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(size_bytes, d_idx))
    rng = seeded_rng(ss.generate_state(1)[0])
    randomized = [_switch_run(config, size_bytes, src, dst,
                              WARMUP_MS + float(rng.uniform(0.0, frame_ms)), False)
                  for _ in range(repeats)]
    return {
        "size_kb": size_kb,
        "direction": direction_key(src, dst),
        "frame_start_latency_ms": aligned,
        "random_mean_ms": float(np.mean(randomized)) if randomized else None,
        "random_std_ms": float(np.std(randomized, ddof=1)) if len(randomized) > 1 else None,
        "repeats": repeats,
    }


def fit_slope(xs, ys) -> float:
    """Least-squares slope of ys against xs."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))


def sweep_image_size(config: dict | None = None, sizes_kb=DEFAULT_SIZES_KB, repeats: int = 20,
                     seed: int | None = None, jobs: int = 1) -> dict:
    """Switch latency per image size and direction, plus fitted ms/KB slopes."""
    if not sizes_kb:
        raise ValueError("sizes must be non-empty")
    config = copy.deepcopy(config if config is not None else SWITCHING_SCENARIO)
    seed = int(config.get("seed", 0) if seed is None else seed)
    points = [(config, float(s), d, int(repeats), seed)
              for s in sorted(sizes_kb) for d in range(len(DIRECTIONS))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_size_point, points))
    else:
        rows = [_size_point(p) for p in points]
    rows.sort(key=lambda r: (r["direction"], r["size_kb"]))
    slopes, random_slopes = {}, {}
    for src, dst in DIRECTIONS:
        key = direction_key(src, dst)
        mine = [r for r in rows if r["direction"] == key]
        xs = [r["size_kb"] for r in mine]
        if len(set(xs)) > 1:
            slopes[key] = fit_slope(xs, [r["frame_start_latency_ms"] for r in mine])
            if repeats > 0:
                random_slopes[key] = fit_slope(xs, [r["random_mean_ms"] for r in mine])
        else:
            slopes[key] = None
    return {"rows": rows, "slopes_ms_per_kb": slopes,
            "random_phase_slopes_ms_per_kb": random_slopes, "repeats": repeats, "seed": seed}


# depth sweep -----------------------------------------------------------------

# static adaptive runs start from the initial TXP; 40 dB of travel at
# 0.5 dB per 100 ms fits in the first half
ADAPTIVE_RUN_US = 10_000_000
ADAPTIVE_SETTLE_US = 5_000_000


def sweep_modes(lib: Library = DEFAULT, wifi_noise=None) -> list[RadioMode]:
    modes = [RadioMode(Protocol.BLE, TxpPolicy.FIXED, 3.0),
             RadioMode(Protocol.BLE, TxpPolicy.ADAPTIVE, fem=True)]
    for band in Band:
        for role in Role:
            modes.append(RadioMode(Protocol.WIFI, band=band, role=role))
    return modes


def depth_point(lib: Library, mode: RadioMode, depth: float, rng=None) -> dict:
    """Steady-state throughput, RSSI and power for one mode at one depth.

    BLE rows report SoC power only (the Wi-Fi chip is unpowered in BLE-only
    runs); Wi-Fi rows add the SoC host power to the companion.
    """
    channel = lib.channel_for(mode)
    curve = lib.curve_for(mode)
    power = lib.power_for(mode)
    if mode.protocol is Protocol.WIFI:
        rssi = rssi_at(lib.wifi_txp_dbm, depth, channel, rng)
        kbps = throughput_from_rssi(curve, rssi)
        comp = power_draw(power, LinkState.STREAMING, 1.0, lib.wifi_txp_dbm,
                          max(0.0, -channel.slope_db_per_cm * depth))
        soc = lib.soc_wifi_host_mw
        txp = lib.wifi_txp_dbm
    elif mode.ble_policy is TxpPolicy.FIXED:
        rssi = rssi_at(mode.ble_txp_dbm, depth, channel, rng)
        kbps = throughput_from_rssi(curve, rssi)
        soc = power_draw(power, LinkState.STREAMING, duty_cycle(kbps, curve.t_max_kbps),
                         mode.ble_txp_dbm, 0.0)
        comp = 0.0
        txp = mode.ble_txp_dbm
    else:
        ctrl = TxpController.from_config(lib.controller)
        recs = closed_loop(ctrl, channel, curve, DepthProfile.constant(depth),
                           ADAPTIVE_RUN_US, rng)
        settled = [r for r in recs if r.t_us >= ADAPTIVE_SETTLE_US]
        rssi = float(np.mean([r.rssi_dbm for r in settled]))
        kbps = float(np.mean([r.kbps for r in settled]))
        soc = float(np.mean([power_draw(power, LinkState.STREAMING,
                                        duty_cycle(r.kbps, curve.t_max_kbps), r.txp_dbm, 0.0)
                             for r in settled]))
        comp = 0.0
        txp = settled[-1].txp_dbm
    return {"mode": mode.key, "depth_cm": float(depth), "rssi_dbm": rssi, "txp_dbm": txp,
            "throughput_kbps": kbps, "soc_mw": soc, "companion_mw": comp,
            "power_mw": soc + comp}


def sweep_depth(config: dict | None = None, depths=DEFAULT_DEPTHS_CM) -> dict:
    if not depths:
        raise ValueError("depths must be non-empty")
    scenario = Scenario.from_dict(copy.deepcopy(config if config is not None else SWITCHING_SCENARIO))
    lib = scenario.library
    rng = seeded_rng(scenario.seed)
    rows = [depth_point(lib, mode, float(d), rng)
            for mode in sweep_modes(lib) for d in sorted(depths)]
    slopes = {}
    for mode in sweep_modes(lib):
        mine = [r for r in rows if r["mode"] == mode.key]
        if len(mine) > 1:
            slopes[mode.key] = fit_slope([r["depth_cm"] for r in mine],
                                         [r["rssi_dbm"] for r in mine])
    return {"rows": rows, "rssi_slopes_db_per_cm": slopes}


def write_table(rows, path) -> None:
    if not rows:
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def default_jobs() -> int:
    return max(1, min(4, os.cpu_count() or 1))
