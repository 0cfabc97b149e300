"""Event-driven simulation of the hybrid BLE / Wi-Fi capsule link."""
from __future__ import annotations

from dataclasses import dataclass, field

from .calibration import CALIBRATION_NOTE
from .channel import depth_at, rssi_at
from .energy import PowerTrace, energy_report, uw_to_mw_str
from .handover import Active, Pending, SwitchEvent, on_frame_boundary, request_switch
from .links import (LinkState, Protocol, TxpPolicy, duty_cycle, power_draw,
                    steady_goodput, throughput_from_rssi)
from .scenario import Scenario
from .sim import (CHUNK_COMPLETION, CONTROL_TICK, DEPTH_CHANGE, SWITCH_COMMAND, TRACE_SAMPLE,
                  Simulator, seeded_rng)
from .streaming import FpsMeter, FrameSource, IntegrityError, Receiver, Transfer, window_fps
from .txp import TxpController

TRACE_COLUMNS = ("t_ms", "active_protocol", "handover_state", "depth_cm", "rssi_dbm",
                 "txp_dbm", "throughput_kbps", "fps", "soc_mw", "companion_mw", "frame_id",
                 "event")
SWITCH_COMPLETE = "switch-complete"
DEMAND_CHANGE = "demand-change"


def fmt_ms(t_us: int) -> str:
    return f"{t_us // 1000}.{t_us % 1000:03d}"


@dataclass
class _PendingMeta:
    residual: float | None = None
    deferred_us: int = 0


@dataclass
class Completion:
    t: int
    frame_id: int
    protocol: Protocol
    started_at: int
    steady: bool


@dataclass
class RunResult:
    scenario: Scenario
    switch_events: list
    deliveries: list
    completions: list
    emitted: int
    in_flight: int | None
    failure: str | None
    power: PowerTrace
    rows: list | None
    protocol_changes: list = field(default_factory=list)

    @property
    def integrity(self) -> str:
        return "PASS" if self.failure is None else "FAIL"

    def steady_fps(self, protocol: Protocol) -> float | None:
        return steady_fps_from(self.completions, protocol)

    def summary(self) -> dict:
        report = energy_report(self.power.t_us, self.power.soc_uw, self.power.companion_uw,
                               self.power.phase, self.scenario.duration_us)
        return {
            "switch_events": [ev.as_dict() for ev in self.switch_events],
            "fps": {p.value: self.steady_fps(p) for p in Protocol},
            "energy_mj": report.as_dict(),
            "slopes_ms_per_kb": {"ble_to_wifi": None, "wifi_to_ble": None},
            "integrity": self.integrity,
            "integrity_detail": self.failure,
            "frames": {"emitted": self.emitted, "delivered": len(self.deliveries),
                       "in_flight": self.in_flight},
            "seed": self.scenario.seed,
            "duration_ms": self.scenario.duration_us / 1000.0,
            "note": CALIBRATION_NOTE,
        }


def steady_fps_from(completions, protocol: Protocol) -> float | None:
    """Long-run frame rate over frames streamed back to back with no handover."""
    total = 0
    count = 0
    prev = None
    for c in completions:
        if (c.steady and prev is not None and prev.protocol is protocol
                and c.protocol is protocol):
            total += c.t - prev.t
            count += 1
        prev = c
    if count == 0 or total <= 0:
        return None
    return count * 1e6 / total


class LinkSimulation:
    """One scenario run. Build it, call :meth:`run`, read the result."""

    def __init__(self, scenario: Scenario, record_trace: bool | None = None):
        sc = scenario
        lib = sc.library
        self.sc = sc
        self.sim = Simulator()
        self.rng = seeded_rng(sc.seed)
        self.cal = lib.calibration
        self.modes = {Protocol.BLE: sc.ble, Protocol.WIFI: sc.wifi}
        self.channels = {p: lib.channel_for(m) for p, m in self.modes.items()}
        self.curves = {p: lib.curve_for(m) for p, m in self.modes.items()}
        self.ble_power = lib.power_for(sc.ble)
        self.wifi_power = lib.power_for(sc.wifi)
        self.wifi_txp = lib.wifi_txp_dbm
        self.soc_wifi_mw = lib.soc_wifi_host_mw
        self.ctrl = (TxpController.from_config(lib.controller)
                     if sc.ble.ble_policy is TxpPolicy.ADAPTIVE else None)
        self.tick_period = (self.ctrl.update_period_us if self.ctrl
                            else int(lib.controller.update_period_ms * 1000))

        self.state = Active(sc.initial_protocol)
        self.streaming: Protocol | None = sc.initial_protocol
        self.gap = None
        self.gap_meta: _PendingMeta | None = None
        self.meta: _PendingMeta | None = None
        self.depth = depth_at(0, sc.depth_profile)
        self.rssi = {p: 0.0 for p in Protocol}
        self.source = FrameSource(sc.sizes)
        self.receiver = Receiver(corrupt=sc.corrupt)
        self.meter = FpsMeter(sc.fps_window_us)
        self.transfer: Transfer | None = None
        self._completion_id = None
        self._touched = False
        self._armed = []
        self.demand = None
        self.switch_events: list[SwitchEvent] = []
        self.completions: list[Completion] = []
        self.protocol_changes: list[tuple[int, Protocol, Protocol]] = []
        self.power = PowerTrace()
        trace = sc.trace_enabled if record_trace is None else record_trace
        self.rows: list | None = [] if trace else None
        self.failure = None

    # link quantities ----------------------------------------------------

    def txp(self, p: Protocol) -> float:
        if p is Protocol.WIFI:
            return self.wifi_txp
        return self.ctrl.txp_dbm if self.ctrl else self.sc.ble.ble_txp_dbm

    def _measure(self) -> None:
        for p in (Protocol.BLE, Protocol.WIFI):
            self.rssi[p] = rssi_at(self.txp(p), self.depth, self.channels[p], self.rng)

    def steady_kbps(self, p: Protocol) -> float:
        return throughput_from_rssi(self.curves[p], self.rssi[p])

    def rate_kbps(self) -> float:
        if self.streaming is None or self.transfer is None:
            return 0.0
        if isinstance(self.state, Pending):
            return self.cal.drain_rate_kbps(self.state.from_)
        return self.steady_kbps(self.streaming)

    def _apply_rate(self, t: int) -> None:
        tr = self.transfer
        if tr is None:
            return
        tr.advance_to(t)
        tr.set_rate(self.rate_kbps() / 8000.0)
        if self._completion_id is not None:
            self.sim.cancel(self._completion_id)
            self._completion_id = None
        ttc = tr.time_to_complete_us()
        if ttc is not None:
            self._completion_id = self.sim.schedule(t + ttc, CHUNK_COMPLETION, self._on_complete)

    def chip_power(self) -> tuple[float, float, str]:
        p = self.streaming
        if p is None:
            return self.ble_power.standby_mw, self.wifi_power.standby_mw, "switch_gap"
        phase = "pending" if isinstance(self.state, Pending) else f"{p.value}_streaming"
        if p is Protocol.BLE:
            kbps = self.steady_kbps(p)
            t_max = self.curves[p].t_max_kbps
            soc = power_draw(self.ble_power, LinkState.STREAMING, duty_cycle(kbps, t_max),
                             self.txp(p), 0.0)
            return soc, self.wifi_power.companion_idle_mw, phase
        compensated = max(0.0, -self.channels[p].slope_db_per_cm * self.depth)
        comp = power_draw(self.wifi_power, LinkState.STREAMING, 1.0, self.wifi_txp, compensated)
        return self.soc_wifi_mw, comp, phase

    # trace ----------------------------------------------------------------

    def _record(self, t: int, event: str) -> None:
        soc, comp, phase = self.chip_power()
        sample = self.power.sample(t, soc, comp, phase)
        if self.rows is None:
            return
        p = self.streaming or (self.gap.to if self.gap else self.state.protocol)
        state = "switch_gap" if self.gap else self.state.label
        tr = self.transfer
        self.rows.append((
            fmt_ms(t), self.streaming.value if self.streaming else "none", state,
            f"{self.depth:.3f}", f"{self.rssi[p]:.4f}", f"{self.txp(p):.2f}",
            f"{self.rate_kbps():.3f}", f"{self.meter.fps(t):.4f}",
            uw_to_mw_str(round(sample.soc_mw * 1000)),
            uw_to_mw_str(round(sample.companion_mw * 1000)),
            str(tr.frame.id) if tr else "", event,
        ))

    # events ---------------------------------------------------------------

    def _start(self, t: int) -> None:
        self._control(t, initial=True)
        self._start_frame(t)

    def _control(self, t: int, initial: bool = False) -> None:
        before = (self.txp(Protocol.BLE), self.rssi[Protocol.BLE], self.rssi[Protocol.WIFI])
        self._measure()
        if self.ctrl is not None and self.streaming is Protocol.BLE:
            old = self.ctrl.txp_dbm
            self.ctrl.update(self.rssi[Protocol.BLE])
            self.rssi[Protocol.BLE] += self.ctrl.txp_dbm - old
        nxt = t + self.tick_period
        if nxt <= self.sc.duration_us:
            self.sim.schedule(nxt, CONTROL_TICK, self._control)
        if initial:
            return
        after = (self.txp(Protocol.BLE), self.rssi[Protocol.BLE], self.rssi[Protocol.WIFI])
        if after != before:
            self._apply_rate(t)
            self._record(t, "txp" if after[0] != before[0] else "channel")

    def _on_depth(self, depth: float):
        def handler(t):
            self.depth = depth
            self._measure()
            self._apply_rate(t)
            self._record(t, "depth")
        return handler

    def _start_frame(self, t: int) -> None:
        frame = self.source.emit_frame(t)
        drop = None
        if self.sc.drop_chunk and self.sc.drop_chunk[0] == frame.id:
            drop = self.sc.drop_chunk[1]
        self.transfer = Transfer(frame, self.streaming, t, drop_chunk=drop)
        self._touched = isinstance(self.state, Pending)
        if self._touched and self.meta.residual is None:
            self.meta.residual = float(frame.size_bytes)
            self.meta.deferred_us = t - self.state.requested_at
        self._apply_rate(t)
        self._record(t, f"frame_start:{frame.id}")
        if self._armed:
            cmds, self._armed = self._armed, []
            for cmd in cmds:
                self._request(cmd.to, t)

    def _on_complete(self, t: int) -> None:
        self._completion_id = None
        tr = self.transfer
        tr.finish(t)
        try:
            rec = self.receiver.on_frame_complete(tr, t)
        except IntegrityError:
            self._record(t, f"integrity_error:{tr.frame.id}")
            raise
        self.meter.tick(t)
        prev = self.completions[-1] if self.completions else None
        steady = (not self._touched and prev is not None and prev.protocol is rec.protocol
                  and prev.t == tr.started_at)
        self.completions.append(Completion(t, rec.frame_id, rec.protocol, tr.started_at, steady))
        self._record(t, f"frame_done:{rec.frame_id}")
        self.transfer = None
        state, plan = on_frame_boundary(self.state, t, self.cal)
        if plan is None:
            self._start_frame(t)
            return
        self.state = state
        self.gap = plan
        self.gap_meta, self.meta = self.meta, None
        self.streaming = None
        self._record(t, f"boundary:{plan.from_.value}>{plan.to.value}")
        if plan.completes_at == t:
            self._complete_switch(t)
        else:
            self.sim.schedule(plan.completes_at, SWITCH_COMPLETE, self._complete_switch)

    def _complete_switch(self, t: int) -> None:
        plan, self.gap = self.gap, None
        self.streaming = plan.to
        meta, self.gap_meta = self.gap_meta, None
        self.switch_events.append(SwitchEvent(plan.from_, plan.to, plan.requested_at, t,
                                              int(round(meta.residual)), meta.deferred_us))
        self.protocol_changes.append((t, plan.from_, plan.to))
        self._record(t, f"switch_complete:{plan.from_.value}>{plan.to.value}")
        # a request made during the gap keeps its own meta and waits for the next frame
        self._start_frame(t)

    def _request(self, target: Protocol, t: int) -> None:
        if not self.sc.boundary_sync:
            self._force_switch(target, t)
            return
        old = self.state
        new = request_switch(old, target, t)
        self.state = new
        if new == old:
            self._record(t, f"request:{target.value}")
            return
        if isinstance(new, Pending):
            self.meta = _PendingMeta()
            if self.transfer is not None:
                self.transfer.advance_to(t)
                self.meta.residual = self.transfer.remaining
                self._touched = True
            self._apply_rate(t)
            self._record(t, f"pending:{new.from_.value}>{new.to.value}")
        else:
            self.meta = None
            self._apply_rate(t)
            self._record(t, "cancel")

    def _force_switch(self, target: Protocol, t: int) -> None:
        """Switch immediately, mid-frame; only reachable with boundary sync off."""
        if self.streaming is target:
            self._record(t, f"request:{target.value}")
            return
        old = self.streaming
        if self.transfer is not None:
            self.transfer.advance_to(t)
            self.transfer.switch_protocol(target)
            self._touched = True
        self.streaming = target
        self.state = Active(target)
        self.switch_events.append(SwitchEvent(old, target, t, t, 0))
        self.protocol_changes.append((t, old, target))
        self._apply_rate(t)
        self._record(t, f"switch_complete:{old.value}>{target.value}")

    def _on_command(self, cmd):
        def handler(t):
            if cmd.align_frame_start:
                self._armed.append(cmd)
            else:
                self._request(cmd.to, t)
        return handler

    def ble_capacity_fps(self, t: int) -> float:
        mode = self.sc.ble
        curve = self.curves[Protocol.BLE]
        nominal = self.ctrl.target_kbps if self.ctrl else curve.t_max_kbps
        return steady_goodput(curve, nominal) / self.source.size_at(t)

    def _on_demand(self, fps: float):
        def handler(t):
            self.demand = fps
            auto = self.sc.auto
            cap = self.ble_capacity_fps(t)
            intended = self.state.to if isinstance(self.state, Pending) else self.state.protocol
            if intended is Protocol.BLE and fps > auto.up_fraction * cap:
                self._request(Protocol.WIFI, t)
            elif intended is Protocol.WIFI and fps < auto.down_fraction * cap:
                self._request(Protocol.BLE, t)
        return handler

    def _sample(self, t: int) -> None:
        self._record(t, "")
        nxt = t + self.sc.sample_period_us
        if nxt <= self.sc.duration_us:
            self.sim.schedule(nxt, TRACE_SAMPLE, self._sample)

    # driver -----------------------------------------------------------------

    def run(self) -> RunResult:
        sc = self.sc
        end = sc.duration_us
        self.sim.schedule(0, CONTROL_TICK, self._start)
        if self.rows is not None:
            self.sim.schedule(0, TRACE_SAMPLE, self._sample)
        for start, depth in sc.depth_profile.segments[1:]:
            if start <= end:
                self.sim.schedule(start, DEPTH_CHANGE, self._on_depth(depth))
        for cmd in sc.switch_schedule:
            if cmd.t_us <= end:
                self.sim.schedule(cmd.t_us, SWITCH_COMMAND, self._on_command(cmd))
        if sc.auto is not None:
            for start, fps in sc.auto.fps_demand:
                if start <= end:
                    self.sim.schedule(start, DEMAND_CHANGE, self._on_demand(fps))
        try:
            self.sim.run_until(end)
        except IntegrityError as exc:
            self.failure = str(exc)
        else:
            self._record(end, "end")
        self.power.end_us = self.power.t_us[-1] if self.failure else end
        in_flight = self.transfer.frame.id if self.transfer and not self.failure else None
        return RunResult(sc, self.switch_events, list(self.receiver.records), self.completions,
                         self.source.next_id, in_flight, self.failure, self.power, self.rows,
                         self.protocol_changes)


def simulate(scenario: Scenario, record_trace: bool | None = None) -> RunResult:
    return LinkSimulation(scenario, record_trace).run()
