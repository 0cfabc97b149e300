"""Scenario configuration: JSON file, ``--set key=value`` overrides, validation."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, fields, replace
from typing import Any

from .calibration import DEFAULT, Library, TxpControllerConfig
from .channel import DepthProfile
from .links import Band, CalibrationSet, Protocol, RadioMode, Role, TxpPolicy
from .sim import ms
from .streaming import DEFAULT_FRAME_BYTES


class ConfigError(ValueError):
    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field = field_path


SWITCHING_SCENARIO: dict[str, Any] = {
    "seed": 0,
    "duration_ms": 3000.0,
    "image_size_bytes": DEFAULT_FRAME_BYTES,
    "depth_profile": [[0, 0.0]],
    "initial_protocol": "ble",
    "ble": {"policy": "fixed", "txp_dbm": 3.0, "fem": False},
    "wifi": {"band": "2.4", "role": "sta"},
    "switch_schedule": [
        {"t_ms": 1000.0, "to": "wifi", "align": "frame_start"},
        {"t_ms": 2000.0, "to": "ble", "align": "frame_start"},
    ],
}

_TOP_KEYS = {"seed", "duration_ms", "image_size_bytes", "image_size_schedule", "depth_profile",
             "initial_protocol", "ble", "wifi", "calibration", "switch_schedule", "auto",
             "boundary_sync", "trace", "fps_window_ms", "faults", "channels", "curves",
             "power", "soc_wifi_host_mw", "wifi_txp_dbm"}


@dataclass(frozen=True)
class SwitchCommand:
    t_us: int
    to: Protocol
    align_frame_start: bool = False


@dataclass(frozen=True)
class AutoPolicy:
    fps_demand: tuple[tuple[int, float], ...]
    up_fraction: float = 0.9
    down_fraction: float = 0.8


@dataclass(frozen=True)
class Scenario:
    seed: int
    duration_us: int
    sizes: tuple[tuple[int, int], ...]
    depth_profile: DepthProfile
    initial_protocol: Protocol
    ble: RadioMode
    wifi: RadioMode
    library: Library
    switch_schedule: tuple[SwitchCommand, ...] = ()
    auto: AutoPolicy | None = None
    boundary_sync: bool = True
    trace_enabled: bool = True
    sample_period_us: int = 1000
    fps_window_us: int = 1_000_000
    drop_chunk: tuple[int, int] | None = None
    corrupt: tuple[int, int] | None = None
    raw: dict | None = None

    @property
    def image_size_bytes(self) -> int:
        return self.sizes[0][1]

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        return _build(data)

    @classmethod
    def default(cls, **overrides) -> "Scenario":
        data = copy.deepcopy(SWITCHING_SCENARIO)
        data.update(overrides)
        return _build(data)


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("<file>", "top level must be an object")
    return data


def apply_overrides(data: dict, assignments: list[str]) -> dict:
    """Apply ``a.b.c=value`` assignments; values parse as JSON when possible."""
    data = copy.deepcopy(data)
    for item in assignments:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = data
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(key, f"'{part}' is not an object")
        node[parts[-1]] = value
    return data


def _num(data, key, path, default=None, lo=None, integer=False):
    value = data.get(key, default)
    if value is None:
        raise ConfigError(path, "required")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(path, f"must be >= {lo}, got {value}")
    return int(value) if integer else float(value)


def _enum(enum_cls, value, path):
    try:
        return enum_cls(str(value).lower())
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise ConfigError(path, f"expected one of {allowed}, got {value!r}") from None


def _pairs(value, path):
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "expected a non-empty list of [t_ms, value] pairs")
    out = []
    for i, pair in enumerate(value):
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError(f"{path}[{i}]", "expected [t_ms, value]")
        out.append((pair[0], pair[1]))
    return out


def _override_dataclass(obj, values: dict, path: str):
    if not isinstance(values, dict):
        raise ConfigError(path, "expected an object")
    names = {f.name for f in fields(obj)}
    for key in values:
        if key not in names:
            raise ConfigError(f"{path}.{key}", "unknown field")
    try:
        return replace(obj, **{k: float(v) if isinstance(v, (int, float)) and not isinstance(v, bool)
                               else v for k, v in values.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc


def _build_library(data: dict) -> Library:
    lib = DEFAULT
    for group in ("channels", "curves", "power"):
        if group in data:
            current = dict(getattr(lib, group))
            if not isinstance(data[group], dict):
                raise ConfigError(group, "expected an object")
            for name, values in data[group].items():
                if name not in current:
                    raise ConfigError(f"{group}.{name}", "unknown profile")
                current[name] = _override_dataclass(current[name], values, f"{group}.{name}")
            lib = replace(lib, **{group: current})
    for key in ("soc_wifi_host_mw", "wifi_txp_dbm"):
        if key in data:
            lib = replace(lib, **{key: _num(data, key, key)})
    if "calibration" in data:
        lib = replace(lib, calibration=_override_dataclass(lib.calibration, data["calibration"],
                                                           "calibration"))
    adaptive = data.get("ble", {}).get("adaptive")
    if adaptive is not None:
        lib = replace(lib, controller=_override_dataclass(lib.controller, adaptive, "ble.adaptive"))
    return lib


def _noise(lib: Library, channel: str, sigma, path) -> Library:
    if sigma is None:
        return lib
    if isinstance(sigma, bool) or not isinstance(sigma, (int, float)) or sigma < 0:
        raise ConfigError(path, "noise_sigma_db must be a number >= 0")
    chans = dict(lib.channels)
    chans[channel] = replace(chans[channel], noise_sigma_db=float(sigma))
    return replace(lib, channels=chans)


def _build(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "scenario must be an object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    seed = _num(data, "seed", "seed", 0, lo=0, integer=True)
    duration_ms = _num(data, "duration_ms", "duration_ms", 3000.0, lo=0)

    if "image_size_schedule" in data:
        sizes = [(ms(_num({"t": t}, "t", "image_size_schedule.t_ms", lo=0)),
                  _num({"s": s}, "s", "image_size_schedule.bytes", lo=1, integer=True))
                 for t, s in _pairs(data["image_size_schedule"], "image_size_schedule")]
    else:
        sizes = [(0, _num(data, "image_size_bytes", "image_size_bytes", DEFAULT_FRAME_BYTES,
                          lo=1, integer=True))]
    if sizes[0][0] != 0:
        raise ConfigError("image_size_schedule", "must start at t_ms=0")

    depth_raw = data.get("depth_profile", [[0, 0.0]])
    try:
        depth = DepthProfile(tuple((ms(float(t)), float(d))
                                   for t, d in _pairs(depth_raw, "depth_profile")))
    except (TypeError, ValueError) as exc:
        raise ConfigError("depth_profile", str(exc)) from exc

    initial = _enum(Protocol, data.get("initial_protocol", "ble"), "initial_protocol")

    ble_cfg = data.get("ble", {})
    if not isinstance(ble_cfg, dict):
        raise ConfigError("ble", "expected an object")
    policy = _enum(TxpPolicy, ble_cfg.get("policy", "fixed"), "ble.policy")
    fem = bool(ble_cfg.get("fem", policy is TxpPolicy.ADAPTIVE))
    try:
        if policy is TxpPolicy.FIXED:
            ble = RadioMode(Protocol.BLE, policy, _num(ble_cfg, "txp_dbm", "ble.txp_dbm", 3.0),
                            fem=fem)
        else:
            ble = RadioMode(Protocol.BLE, policy, fem=fem)
    except ValueError as exc:
        raise ConfigError("ble", str(exc)) from exc

    wifi_cfg = data.get("wifi", {})
    if not isinstance(wifi_cfg, dict):
        raise ConfigError("wifi", "expected an object")
    wifi = RadioMode(Protocol.WIFI, band=_enum(Band, wifi_cfg.get("band", "2.4"), "wifi.band"),
                     role=_enum(Role, wifi_cfg.get("role", "sta"), "wifi.role"))

    lib = _build_library(data)
    lib = _noise(lib, "ble_fem" if ble.fem else "ble", ble_cfg.get("noise_sigma_db"),
                 "ble.noise_sigma_db")
    lib = _noise(lib, f"wifi_{wifi.band.value}", wifi_cfg.get("noise_sigma_db"),
                 "wifi.noise_sigma_db")
    try:
        lib.check(wifi)
    except ValueError as exc:
        raise ConfigError("power", str(exc)) from exc
    try:
        TxpControllerConfig(**vars(lib.controller))
        if lib.controller.rssi_lo_dbm >= lib.controller.rssi_hi_dbm:
            raise ValueError("rssi_lo_dbm must be below rssi_hi_dbm")
    except (TypeError, ValueError) as exc:
        raise ConfigError("ble.adaptive", str(exc)) from exc

    schedule_raw = data.get("switch_schedule", [])
    auto_raw = data.get("auto")
    if auto_raw is not None and schedule_raw:
        raise ConfigError("auto", "use either switch_schedule or auto, not both")
    if not isinstance(schedule_raw, list):
        raise ConfigError("switch_schedule", "expected a list")
    schedule = []
    for i, cmd in enumerate(schedule_raw):
        path = f"switch_schedule[{i}]"
        if not isinstance(cmd, dict):
            raise ConfigError(path, "expected an object")
        align = cmd.get("align", "none")
        if align not in ("none", "frame_start"):
            raise ConfigError(f"{path}.align", "expected 'none' or 'frame_start'")
        schedule.append(SwitchCommand(ms(_num(cmd, "t_ms", f"{path}.t_ms", lo=0)),
                                      _enum(Protocol, cmd.get("to"), f"{path}.to"),
                                      align == "frame_start"))
    auto = None
    if auto_raw is not None:
        if not isinstance(auto_raw, dict):
            raise ConfigError("auto", "expected an object")
        demand = tuple((ms(float(t)), float(f))
                       for t, f in _pairs(auto_raw.get("fps_demand"), "auto.fps_demand"))
        up = _num(auto_raw, "up_fraction", "auto.up_fraction", 0.9, lo=0)
        down = _num(auto_raw, "down_fraction", "auto.down_fraction", 0.8, lo=0)
        if down >= up:
            raise ConfigError("auto.down_fraction", "must be below up_fraction")
        auto = AutoPolicy(demand, up, down)

    trace = data.get("trace", {})
    if not isinstance(trace, dict):
        raise ConfigError("trace", "expected an object")
    period = ms(_num(trace, "sample_period_ms", "trace.sample_period_ms", 1.0, lo=0.001))
    faults = data.get("faults", {})
    if not isinstance(faults, dict):
        raise ConfigError("faults", "expected an object")

    def _fault(key):
        v = faults.get(key)
        if v is None:
            return None
        if not isinstance(v, list) or len(v) != 2 or not all(isinstance(x, int) for x in v):
            raise ConfigError(f"faults.{key}", "expected [frame_id, index]")
        return (v[0], v[1])

    return Scenario(
        seed=seed, duration_us=ms(duration_ms), sizes=tuple(sizes), depth_profile=depth,
        initial_protocol=initial, ble=ble, wifi=wifi, library=lib,
        switch_schedule=tuple(schedule), auto=auto,
        boundary_sync=bool(data.get("boundary_sync", True)),
        trace_enabled=bool(trace.get("enabled", True)), sample_period_us=period,
        fps_window_us=ms(_num(data, "fps_window_ms", "fps_window_ms", 1000.0, lo=1)),
        drop_chunk=_fault("drop_chunk"), corrupt=_fault("corrupt"), raw=copy.deepcopy(data),
    )
