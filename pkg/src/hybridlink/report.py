"""Trace verification and static plot/report rendering."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .energy import PHASES, PJ_PER_MJ
from .engine import TRACE_COLUMNS
from .links import Protocol
from .streaming import window_fps


class ReportError(OSError):
    """Missing or unreadable trace/summary files."""


def read_trace(path) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
                raise ReportError(f"{path}: unexpected trace columns {reader.fieldnames}")
            return list(reader)
    except FileNotFoundError as exc:
        raise ReportError(f"missing trace file {path}") from exc
    except (csv.Error, UnicodeDecodeError) as exc:
        raise ReportError(f"corrupt trace file {path}: {exc}") from exc


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ReportError(f"missing file {path}") from exc
    except json.JSONDecodeError as exc:
        raise ReportError(f"corrupt JSON in {path}: {exc}") from exc


def _us(t_ms: str) -> int:
    whole, _, frac = t_ms.partition(".")
    return int(whole) * 1000 + int((frac + "000")[:3])


def _uw(mw: str) -> int:
    return _us(mw)


def _phase(row) -> str:
    if row["handover_state"] == "switch_gap":
        return "switch_gap"
    if row["handover_state"] == "pending":
        return "pending"
    return f"{row['active_protocol']}_streaming"


def summary_from_trace(rows: list[dict], duration_ms: float) -> dict:
    """Recompute the verifiable summary fields from trace rows alone."""
    if not rows:
        raise ReportError("empty trace")
    end = _us(f"{duration_ms:.3f}")
    # energy: each row holds until the next one; integer uW x us
    ts = [_us(r["t_ms"]) for r in rows]
    soc = comp = 0
    phases = dict.fromkeys(PHASES, 0)
    for i, row in enumerate(rows):
        t_next = ts[i + 1] if i + 1 < len(rows) else end
        width = max(min(t_next, end) - ts[i], 0)
        s, c = _uw(row["soc_mw"]) * width, _uw(row["companion_mw"]) * width
        soc += s
        comp += c
        phases[_phase(row)] += s + c

    events, fps_frames = [], {p: [0, 0] for p in Protocol}
    requested = None
    prev_done = None  # (t, protocol)
    frame_start = None  # (t, touched)
    delivered = 0
    failed = False
    for row, t in zip(rows, ts):
        ev = row["event"]
        if not ev:
            continue
        kind, _, arg = ev.partition(":")
        if kind == "pending":
            requested = t
            if frame_start is not None:
                frame_start = (frame_start[0], True)
        elif kind == "cancel":
            requested = None
        elif kind == "switch_complete":
            src, dst = arg.split(">")
            req = requested if requested is not None else t
            events.append({"from": src, "to": dst, "requested_at_ms": req / 1000.0,
                           "completed_at_ms": t / 1000.0, "latency_ms": (t - req) / 1000.0})
            requested = None
            if frame_start is not None and row["frame_id"]:
                frame_start = (frame_start[0], True)
        elif kind == "frame_start":
            frame_start = (t, row["handover_state"] == "pending")
        elif kind == "frame_done":
            delivered += 1
            proto = Protocol(row["active_protocol"])
            touched = frame_start[1] if frame_start else True
            started = frame_start[0] if frame_start else None
            if (not touched and prev_done is not None and prev_done[1] is proto
                    and prev_done[0] == started):
                fps_frames[proto][0] += 1
                fps_frames[proto][1] += t - prev_done[0]
            prev_done = (t, proto)
        elif kind == "integrity_error":
            failed = True
    fps = {p.value: (n * 1e6 / span if n and span > 0 else None)
           for p, (n, span) in fps_frames.items()}
    return {
        "switch_events": events,
        "fps": fps,
        "energy_mj": {"soc": soc / PJ_PER_MJ, "companion": comp / PJ_PER_MJ,
                      "total": (soc + comp) / PJ_PER_MJ,
                      "phases": {k: v / PJ_PER_MJ for k, v in phases.items()}},
        "integrity": "FAIL" if failed else "PASS",
        "delivered": delivered,
    }


def _close(a, b, rel=1e-9) -> bool:
    if a is None or b is None:
        return a is b
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def verify(out_dir) -> list[str]:
    """Compare summary.json with values recomputed from trace.csv; returns mismatches."""
    out = Path(out_dir)
    summary = read_json(out / "summary.json")
    rows = read_trace(out / "trace.csv")
    again = summary_from_trace(rows, summary["duration_ms"])
    problems = []
    if len(again["switch_events"]) != len(summary["switch_events"]):
        problems.append(f"switch event count {len(summary['switch_events'])} != "
                        f"{len(again['switch_events'])} in trace")
    for i, (a, b) in enumerate(zip(summary["switch_events"], again["switch_events"])):
        for key in b:
            same = a[key] == b[key] if isinstance(b[key], str) else _close(a[key], b[key])
            if not same:
                problems.append(f"switch_events[{i}].{key}: {a[key]} != {b[key]}")
    for p in ("ble", "wifi"):
        if not _close(summary["fps"][p], again["fps"][p]):
            problems.append(f"fps.{p}: {summary['fps'][p]} != {again['fps'][p]}")
    for key in ("soc", "companion", "total"):
        if not _close(summary["energy_mj"][key], again["energy_mj"][key]):
            problems.append(f"energy_mj.{key}: {summary['energy_mj'][key]} != "
                            f"{again['energy_mj'][key]}")
    for key, val in again["energy_mj"]["phases"].items():
        if not _close(summary["energy_mj"]["phases"][key], val):
            problems.append(f"energy_mj.phases.{key} mismatch")
    if summary["integrity"] != again["integrity"]:
        problems.append(f"integrity: {summary['integrity']} != {again['integrity']}")
    if summary["frames"]["delivered"] != again["delivered"]:
        problems.append("delivered frame count mismatch")
    return problems


# plotting ------------------------------------------------------------------------

def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "hybridlink"
    return plt


def plot_switching(rows, summary, path) -> None:
    plt = _plt()
    t = np.array([_us(r["t_ms"]) / 1000.0 for r in rows])
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(8, 7))
    axes[0].step(t, [float(r["soc_mw"]) for r in rows], where="post", color="tab:blue")
    axes[0].set_ylabel("SoC power (mW)")
    axes[1].step(t, [float(r["companion_mw"]) for r in rows], where="post", color="tab:orange")
    axes[1].set_ylabel("Wi-Fi chip power (mW)")
    axes[2].plot(t, [float(r["fps"]) for r in rows], color="tab:green")
    axes[2].set_ylabel("receiver FPS")
    axes[2].set_xlabel("time (ms)")
    for ev in summary.get("switch_events", []):
        for ax in axes:
            ax.axvline(ev["requested_at_ms"], color="grey", ls=":", lw=0.8)
            ax.axvline(ev["completed_at_ms"], color="red", ls="--", lw=0.8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def plot_depth(sweep, path) -> None:
    plt = _plt()
    fig, axes = plt.subplots(1, 3, figsize=(12, 4))
    modes = sorted({r["mode"] for r in sweep["rows"]})
    for mode in modes:
        mine = [r for r in sweep["rows"] if r["mode"] == mode]
        d = [r["depth_cm"] for r in mine]
        axes[0].plot(d, [r["throughput_kbps"] for r in mine], marker="o", label=mode)
        axes[1].plot(d, [r["rssi_dbm"] for r in mine], marker="o", label=mode)
        axes[2].plot(d, [r["power_mw"] for r in mine], marker="o", label=mode)
    axes[0].set_yscale("log")
    for ax, label in zip(axes, ("throughput (kbps)", "RSSI (dBm)", "power (mW)")):
        ax.set_xlabel("depth (cm)")
        ax.set_ylabel(label)
    axes[2].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def plot_latency(sweep, path) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 4))
    for key, color in (("ble_to_wifi", "tab:blue"), ("wifi_to_ble", "tab:orange")):
        mine = [r for r in sweep["rows"] if r["direction"] == key]
        if not mine:
            continue
        x = np.array([r["size_kb"] for r in mine])
        y = np.array([r["frame_start_latency_ms"] for r in mine])
        ax.plot(x, y, "o", color=color, label=f"{key} (frame start)")
        if mine[0].get("random_mean_ms") is not None:
            ax.errorbar(x, [r["random_mean_ms"] for r in mine],
                        yerr=[r["random_std_ms"] or 0.0 for r in mine], fmt="s",
                        color=color, alpha=0.5, capsize=3, label=f"{key} (random phase)")
        slope = sweep["slopes_ms_per_kb"].get(key)
        if slope is not None:
            icpt = y.mean() - slope * x.mean()
            ax.plot(x, icpt + slope * x, color=color, lw=1, label=f"fit {slope:.2f} ms/KB")
    ax.set_xlabel("image size (KB)")
    ax.set_ylabel("switching latency (ms)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def render_report(out_dir) -> list[Path]:
    """Render whatever the output directory holds; returns the files written."""
    out = Path(out_dir)
    written = []
    lines = ["hybrid BLE / Wi-Fi link report", ""]
    have_any = False
    if (out / "summary.json").exists() or (out / "trace.csv").exists():
        summary = read_json(out / "summary.json")
        rows = read_trace(out / "trace.csv")
        have_any = True
        plot_switching(rows, summary, out / "switching.svg")
        written.append(out / "switching.svg")
        lines.append(f"integrity: {summary['integrity']}")
        fps = summary["fps"]
        lines.append("steady FPS: " + ", ".join(
            f"{k}={v:.3f}" if v is not None else f"{k}=n/a" for k, v in fps.items()))
        if summary["switch_events"]:
            lines += ["", "switch latencies:", "  from  to    requested_ms  latency_ms"]
            for ev in summary["switch_events"]:
                lines.append(f"  {ev['from']:<5} {ev['to']:<5} {ev['requested_at_ms']:>12.3f}"
                             f"  {ev['latency_ms']:>10.3f}")
        e = summary["energy_mj"]
        lines += ["", f"energy (mJ): soc={e['soc']:.3f} companion={e['companion']:.3f} "
                      f"total={e['total']:.3f}"]
        lines.append("  " + ", ".join(f"{k}={v:.3f}" for k, v in e["phases"].items()))
        lines.append(f"note: {summary.get('note', '')}")
    if (out / "sweep_size.json").exists():
        sweep = read_json(out / "sweep_size.json")
        have_any = True
        if sweep.get("rows"):
            plot_latency(sweep, out / "latency_vs_size.svg")
            written.append(out / "latency_vs_size.svg")
        lines += ["", "latency slopes (ms/KB): " + ", ".join(
            f"{k}={v:.3f}" for k, v in sweep["slopes_ms_per_kb"].items() if v is not None)]
    if (out / "sweep_depth.json").exists():
        sweep = read_json(out / "sweep_depth.json")
        have_any = True
        plot_depth(sweep, out / "depth_sweep.svg")
        written.append(out / "depth_sweep.svg")
        lines += ["", "RSSI slopes (dB/cm): " + ", ".join(
            f"{k}={v:.3f}" for k, v in sweep["rssi_slopes_db_per_cm"].items())]
    if not have_any:
        raise ReportError(f"nothing to report in {out}")
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    written.append(out / "report.txt")
    return written
