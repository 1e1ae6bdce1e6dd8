"""Deterministic discrete-event simulation of handovers on the road grid.

One mobile (or an independent fleet) drives the street grid; zone-boundary
crossings trigger handovers executed by the selected scheme's timed message
chain; downlink packets flow per active prefix and are delivered, buffered
or dropped according to tunnel and attachment state at each instant.

Determinism: all randomness comes from two seeded generators (trajectory
and network), events are totally ordered by (time, insertion sequence), and
identical inputs reproduce the report bit for bit.

Timing per scheme, anchored at the trigger instant t0 (the cell-boundary
crossing where the serving zone's signal is below the handover threshold
and a stronger zone exists):

* plain (ddmm): the old link drops at t0; the mobile re-attaches (layer 2 +
  authentication), solicits, and the binding update runs through the
  binding server before the advertisement returns.
* reactive: the old link drops at t0; after re-attach the new zone pulls
  context from the previous zone (initiate/acknowledge, wired only).
* predictive: the mobile reports at t0 and the old link drops at t0 + phi;
  meanwhile report -> initiate -> acknowledge -> switch command run. The
  handover is predictive if the acknowledge reaches the old zone before
  link-down, otherwise it falls back to reactive. Predictive data is
  diverted into the pre-established tunnel at link-down and buffered at the
  target until re-attachment.

Recorded times and durations are quantized to 1 ns.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterator

from . import model
from .model import Scheme
from .params import SystemParameters
from .topology import MixZoneTopology, build_topology
from .trajectory import distance_at_rss, iter_epochs

__all__ = ["EventQueue", "HandoverRecord", "PacketCounters", "SimReport",
           "run", "RoadSimulation", "analytic_expectations"]

_QUANTUM_DIGITS = 9  # durations rounded to 1 ns
_MAX_CHAIN = 64      # transit forwarding safety bound


def _q(x: float) -> float:
    return round(x, _QUANTUM_DIGITS)


class EventQueue:
    """Time-ordered callback queue; ties dequeue in insertion order."""

    def __init__(self) -> None:
        self._heap: list[tuple[float, int, Callable[[float], None]]] = []
        self._seq = 0

    def push(self, time: float, fn: Callable[[float], None]) -> None:
        heapq.heappush(self._heap, (time, self._seq, fn))
        self._seq += 1

    def pop(self) -> tuple[float, Callable[[float], None]]:
        time, _, fn = heapq.heappop(self._heap)
        return time, fn

    def __len__(self) -> int:
        return len(self._heap)


@dataclass
class HandoverRecord:
    index: int
    scheme: Scheme
    mode: str                 # "predictive" | "reactive" | "ddmm"
    from_zone: int
    to_zone: int
    trigger_time: float
    link_down_time: float = 0.0
    complete_time: float = 0.0
    latency: float = 0.0
    active_prefixes: int = 1
    lattice_step: int = 1     # lattice distance old -> new zone
    hack_before_link_down: bool | None = None
    session_recovery: float | None = None
    bytes_lost: int = 0
    packets_lost: int = 0
    control_bytes: int = 0
    hop_bytes: int = 0
    failed: bool = False
    last_delivery_before: float | None = None


@dataclass
class PacketCounters:
    generated: int = 0
    delivered: int = 0
    dropped: int = 0
    buffered_at_end: int = 0
    in_flight_at_end: int = 0

    def conserved(self) -> bool:
        return self.generated == (self.delivered + self.dropped
                                  + self.buffered_at_end
                                  + self.in_flight_at_end)


@dataclass
class SimReport:
    """Per-run empirical metrics plus the matching analytic predictions."""

    scheme: Scheme
    seed: int
    duration: float
    records: list[HandoverRecord]
    counters: PacketCounters
    crossings: int
    failures: int
    total_control_bytes: int
    total_hop_bytes: int
    mean_active_prefixes: float
    analytic: dict[str, float] = field(default_factory=dict)

    @property
    def handovers(self) -> int:
        return len(self.records)

    @property
    def failure_fraction(self) -> float:
        return self.failures / len(self.records) if self.records else 0.0

    @property
    def crossing_rate(self) -> float:
        return self.crossings / self.duration if self.duration > 0 else 0.0

    def mean(self, attr: str) -> float | None:
        values = [getattr(r, attr) for r in self.records
                  if getattr(r, attr) is not None]
        return sum(values) / len(values) if values else None

    def merged_with(self, other: "SimReport") -> "SimReport":
        assert self.scheme == other.scheme
        counters = PacketCounters(*(
            getattr(self.counters, f.name) + getattr(other.counters, f.name)
            for f in self.counters.__dataclass_fields__.values()))
        total_t = self.duration + other.duration
        mean_pfx = (self.mean_active_prefixes * self.duration
                    + other.mean_active_prefixes * other.duration) / total_t
        return SimReport(
            scheme=self.scheme, seed=self.seed, duration=total_t,
            records=self.records + other.records, counters=counters,
            crossings=self.crossings + other.crossings,
            failures=self.failures + other.failures,
            total_control_bytes=(self.total_control_bytes
                                 + other.total_control_bytes),
            total_hop_bytes=self.total_hop_bytes + other.total_hop_bytes,
            mean_active_prefixes=mean_pfx, analytic=self.analytic)


@dataclass
class _Leg:
    t0: float
    t1: float
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def moving(self) -> bool:
        return self.t1 > self.t0 and (self.x1 != self.x0 or self.y1 != self.y0)

    def pos(self, t: float) -> tuple[float, float]:
        if self.t1 <= self.t0 or math.isinf(self.t1):
            return (self.x0, self.y0)
        f = min(max((t - self.t0) / (self.t1 - self.t0), 0.0), 1.0)
        return (self.x0 + f * (self.x1 - self.x0),
                self.y0 + f * (self.y1 - self.y0))


class _Flow:
    """Downlink packet stream bound to one prefix, entering at its anchor."""

    __slots__ = ("prefix", "anchor", "alive")

    def __init__(self, prefix: str, anchor: int) -> None:
        self.prefix = prefix
        self.anchor = anchor
        self.alive = True


class _Handover:
    def __init__(self, record: HandoverRecord, old_zone: int, new_zone: int,
                 old_flow: _Flow | None):
        self.record = record
        self.old_zone = old_zone
        self.new_zone = new_zone
        self.old_flow = old_flow
        self.buffering = False
        self.buffer: list[int] = []   # packet sizes, FIFO
        self.buffer_bytes = 0


class RoadSimulation:
    """One mobile on the grid under one scheme. Use :func:`run` normally."""

    def __init__(self, p: SystemParameters, scheme: Scheme, seed: int,
                 duration: float, trace_path: str | None = None):
        if duration <= 0:
            raise ValueError("duration must be positive")
        self.p = p
        self.scheme = scheme
        self.seed = seed
        self.duration = duration
        self.topology: MixZoneTopology = build_topology(p, seed)
        self.queue = EventQueue()
        self.rng = random.Random(f"{seed}:net")
        self._trace_file = open(trace_path, "w") if trace_path else None

        self._epoch_iter: Iterator = iter_epochs(p, seed)
        self._legs: list[_Leg] = []
        self._threshold_dist = distance_at_rss(p, p.rss_handover_threshold)
        self._min_rss_dist = distance_at_rss(p, p.rss_min)
        self._extend_legs(0.0)

        x, y = self._legs[0].x0, self._legs[0].y0
        self.serving = self.topology.zone_of(x, y)
        self.attached = True
        self.active: _Handover | None = None
        self.pending_recovery: HandoverRecord | None = None
        self.last_delivery: float | None = None

        # Per-prefix delivery target (where the anchor tunnels it) and
        # transit forwarding left behind by predictive handovers.
        self.flows: list[_Flow] = []
        self.route: dict[str, int] = {}
        self.forward: dict[int, int] = {}
        self._prefix_counter: dict[int, int] = {}
        self._pfx_count = 0
        self._pfx_area = 0.0
        self._pfx_last_t = 0.0
        self.serving_flow: _Flow | None = None
        self._spawn_flow(0.0, self.serving)

        self.counters = PacketCounters()
        self.in_flight = 0
        self.records: list[HandoverRecord] = []
        self.crossings = 0
        self.failures = 0
        self.control_bytes = 0
        self.hop_bytes = 0

    # -- infrastructure -----------------------------------------------------

    def _trace(self, t: float, node: str, event: str, msg: str = "-",
               flags: str = "-", nbytes: int = 0) -> None:
        if self._trace_file:
            self._trace_file.write(
                f"{t:.9f}\t{node}\t{event}\t{msg}\t{flags}\t{nbytes}\n")

    def _extend_legs(self, until: float) -> None:
        p = self.p
        while not self._legs or self._legs[-1].t1 <= until:
            if p.mean_speed == 0:
                if not self._legs:
                    epoch = next(self._epoch_iter)
                    x, y = epoch.src
                    self._legs.append(_Leg(0.0, math.inf, x, y, x, y))
                return
            epoch = next(self._epoch_iter)
            t = self._legs[-1].t1 if self._legs else 0.0
            for (x0, y0), (x1, y1) in zip(epoch.path, epoch.path[1:]):
                seg_len = abs(x1 - x0) + abs(y1 - y0)
                t1 = t + seg_len / p.mean_speed
                self._legs.append(_Leg(t, t1, x0, y0, x1, y1))
                t = t1
            dx, dy = epoch.dst
            self._legs.append(_Leg(t, t + epoch.pause, dx, dy, dx, dy))

    def _leg_index(self, t: float) -> int:
        self._extend_legs(t)
        lo, hi = 0, len(self._legs) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._legs[mid].t0 <= t:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def position(self, t: float) -> tuple[float, float]:
        return self._legs[self._leg_index(t)].pos(t)

    # -- delays --------------------------------------------------------------

    def _wireless_delay(self, size: int) -> float:
        """Sampled mobile<->zone delay; resend until success, per hop."""
        p = self.p
        per_attempt = 8 * size / p.wireless_bandwidth + p.wireless_prop_delay
        total = 0.0
        for _ in range(p.hops_mu_mz):
            attempts = 1
            while self.rng.random() < p.wireless_fail_prob:
                attempts += 1
            total += attempts * per_attempt
        return total

    def _zone_delay(self, size: int, hops: int) -> float:
        p = self.p
        return (8 * size / p.wired_bandwidth + p.wired_prop_delay) * hops

    def _lbs_delay(self, size: int) -> float:
        return self._zone_delay(size, self.p.hops_lbs_mz)

    # -- flows and packets -----------------------------------------------------

    def _count_prefixes(self, t: float, delta: int) -> None:
        t_eff = min(t, self.duration)
        if t_eff > self._pfx_last_t:
            self._pfx_area += self._pfx_count * (t_eff - self._pfx_last_t)
            self._pfx_last_t = t_eff
        self._pfx_count += delta

    def _new_prefix(self, zone: int) -> str:
        n = self._prefix_counter.get(zone, 0)
        self._prefix_counter[zone] = n + 1
        return f"Z{zone}:P{n}"

    def _spawn_flow(self, t: float, zone: int) -> _Flow:
        flow = _Flow(self._new_prefix(zone), zone)
        self.flows.append(flow)
        self.route[flow.prefix] = zone
        self.serving_flow = flow
        self._count_prefixes(t, +1)
        spacing = 1.0 / self.p.session_packet_rate
        first = t + self.rng.random() * spacing
        self.queue.push(first, lambda now, f=flow: self._on_arrival(now, f))
        return flow

    def _anchored_flows(self) -> list[_Flow]:
        return [f for f in self.flows
                if f.alive and f is not self.serving_flow]

    def _schedule_expiry(self, t: float, flow: _Flow) -> None:
        delay = self.rng.expovariate(self.p.foreign_prefix_decay_rate)
        self.queue.push(t + delay, lambda now, f=flow: self._on_expiry(now, f))

    def _on_expiry(self, now: float, flow: _Flow) -> None:
        if flow.alive:
            flow.alive = False
            self.route.pop(flow.prefix, None)
            self._count_prefixes(now, -1)
            self._trace(now, f"Z{flow.anchor}", "prefix-expired", flow.prefix)

    def _on_arrival(self, now: float, flow: _Flow) -> None:
        """A downlink packet for ``flow`` enters the network at its anchor."""
        if not flow.alive:
            return
        self.queue.push(now + 1.0 / self.p.session_packet_rate,
                        lambda t, f=flow: self._on_arrival(t, f))
        if now > self.duration:
            return
        self.counters.generated += 1
        self.in_flight += 1
        endpoint = self.route.get(flow.prefix, flow.anchor)
        if endpoint == flow.anchor:
            self._at_endpoint(now, endpoint)
        else:
            transit = self._zone_delay(
                self.p.data_packet_size,
                self.topology.hops_between_zones(flow.anchor, endpoint))
            self.queue.push(now + transit,
                            lambda t, e=endpoint: self._at_endpoint(t, e))

    def _at_endpoint(self, now: float, zone: int, chain: int = 0) -> None:
        """Packet reached the zone its route (or forwarding) sent it to."""
        if zone == self.serving and self.attached:
            delay = self._wireless_delay(self.p.data_packet_size)
            self.queue.push(now + delay, lambda t: self._deliver(t))
            return
        ho = self.active
        if ho is not None and ho.buffering and zone == ho.new_zone:
            size = self.p.data_packet_size
            if ho.buffer_bytes + size <= self.p.buffer_size:
                ho.buffer.append(size)
                ho.buffer_bytes += size
            else:
                self._drop(now, ho)
            return
        nxt = self.forward.get(zone)
        if nxt is not None and chain < _MAX_CHAIN:
            transit = self._zone_delay(
                self.p.data_packet_size,
                self.topology.hops_between_zones(zone, nxt))
            self.queue.push(now + transit,
                            lambda t, z=nxt, c=chain + 1:
                            self._at_endpoint(t, z, c))
            return
        self._drop(now, ho)

    def _deliver(self, now: float) -> None:
        if not self.attached:
            self._drop(now, self.active)
            return
        self.counters.delivered += 1
        self.in_flight -= 1
        self.last_delivery = now
        rec = self.pending_recovery
        if rec is not None and now > rec.complete_time:
            if rec.last_delivery_before is not None:
                rec.session_recovery = _q(now - rec.last_delivery_before)
            self.pending_recovery = None

    def _drop(self, now: float, ho: _Handover | None) -> None:
        self.counters.dropped += 1
        self.in_flight -= 1
        rec = ho.record if ho else (self.records[-1] if self.records else None)
        if rec is not None:
            rec.bytes_lost += self.p.data_packet_size
            rec.packets_lost += 1

    def _drain_buffer(self, now: float, ho: _Handover) -> None:
        delay = self._wireless_delay(self.p.data_packet_size)
        for _ in ho.buffer:
            self.queue.push(now + delay, lambda t: self._deliver(t))
        ho.buffer.clear()
        ho.buffer_bytes = 0
        ho.buffering = False

    # -- control message accounting --------------------------------------------

    def _count_msg(self, rec: HandoverRecord, hops: int,
                   at: float | None = None, node: str = "-",
                   kind: str = "-", flags: str = "-") -> None:
        size = self.p.control_packet_size
        rec.control_bytes += size
        rec.hop_bytes += size * hops
        self.control_bytes += size
        self.hop_bytes += size * hops
        if self._trace_file is not None and at is not None:
            self.queue.push(at, lambda t: self._trace(t, node, "recv",
                                                      kind, flags, size))

    # -- handover chains ---------------------------------------------------------

    def _start_handover(self, t0: float, target: int) -> None:
        self.crossings += 1
        rec = HandoverRecord(
            index=len(self.records), scheme=self.scheme, mode="",
            from_zone=self.serving, to_zone=target, trigger_time=_q(t0),
            active_prefixes=sum(1 for f in self.flows if f.alive),
            lattice_step=self.topology.lattice_distance(self.serving, target),
        )
        rec.last_delivery_before = self.last_delivery
        self.records.append(rec)
        ho = _Handover(rec, self.serving, target, self.serving_flow)
        self.active = ho
        self._trace(t0, "MU", "trigger", f"Z{self.serving}->Z{target}")
        if self.scheme is Scheme.DDMM:
            self._chain_ddmm(t0, ho)
        elif self.scheme is Scheme.RE_FDMM:
            rec.mode = "reactive"
            rec.link_down_time = _q(t0)
            self._chain_reactive(t0, ho)
        else:
            self._chain_predictive(t0, ho)

    def _chain_ddmm(self, t0: float, ho: _Handover) -> None:
        p, rec = self.p, ho.record
        rec.mode = "ddmm"
        rec.link_down_time = _q(t0)
        anchors = self._anchored_flows()
        t_attach_l2 = t0 + p.l2_latency + p.auth_latency
        t_rs = t_attach_l2 + self._wireless_delay(p.control_packet_size)
        t_pbu = t_rs + p.proc_time_mz + self._lbs_delay(p.control_packet_size)
        t_dispatch = t_pbu + p.proc_time_lbs
        t_pba = t_dispatch + self._lbs_delay(p.control_packet_size)
        t_repoint = t_pba + p.proc_time_mz
        t_done = t_repoint + self._wireless_delay(p.control_packet_size)

        new = f"Z{ho.new_zone}"
        self._count_msg(rec, p.hops_mu_mz, t_rs, new, "RS")
        self._count_msg(rec, p.hops_lbs_mz, t_pbu, "LBS", "PBU")
        self._count_msg(rec, p.hops_lbs_mz, t_pba, new, "PBA")
        self._count_msg(rec, p.hops_mu_mz, t_done, "MU", "RA")
        for f in anchors:
            self._count_msg(rec, p.hops_lbs_mz, t_repoint,
                            f"Z{f.anchor}", "PBU")
            self._count_msg(rec, p.hops_lbs_mz, t_repoint
                            + self._lbs_delay(p.control_packet_size),
                            "LBS", "PBA")

        self.queue.push(t0, lambda t: self._on_link_down(t, ho))
        self.queue.push(t_repoint, lambda t: self._on_repoint(t, ho, anchors))
        self.queue.push(t_done, lambda t: self._on_complete(t, ho))

    def _chain_reactive(self, t0: float, ho: _Handover) -> None:
        p, rec = self.p, ho.record
        anchors = self._anchored_flows()
        hops_ctx = self.topology.hops_between_zones(ho.old_zone, ho.new_zone)
        t_attach_l2 = t0 + p.l2_latency + p.auth_latency
        t_hi = t_attach_l2 + self._zone_delay(p.control_packet_size, hops_ctx)
        t_hack_sent = t_hi + p.proc_time_mz
        t_hack = t_hack_sent + self._zone_delay(p.control_packet_size, hops_ctx)

        old, new = f"Z{ho.old_zone}", f"Z{ho.new_zone}"
        self._count_msg(rec, hops_ctx, t_hi, old, "HI", "D=1,T=2")
        self._count_msg(rec, hops_ctx, t_hack, new, "HACK", "D=1,T=2")
        self.queue.push(t0, lambda t: self._on_link_down(t, ho))
        self.queue.push(t_attach_l2, lambda t: self._on_reattach_l2(t, ho))
        self.queue.push(t_hack_sent, lambda t: self._on_divert(t, ho))
        for f in anchors:
            hops = self.topology.hops_between_zones(ho.new_zone, f.anchor)
            hop_delay = self._zone_delay(p.control_packet_size, hops)
            t_refresh = t_hack + hop_delay + p.proc_time_mz
            self._count_msg(rec, hops, t_hack + hop_delay,
                            f"Z{f.anchor}", "HI", "D=1,T=1")
            self._count_msg(rec, hops, t_refresh + hop_delay,
                            new, "HACK", "D=1,T=1")
            self.queue.push(t_refresh,
                            lambda t, fl=f: self._repoint_flow(t, fl,
                                                               ho.new_zone))
        t_pbu = t_hack + self._lbs_delay(p.control_packet_size)
        self._count_msg(rec, p.hops_lbs_mz, t_pbu, "LBS", "PBU")
        self._count_msg(rec, p.hops_lbs_mz, t_pbu + p.proc_time_lbs
                        + self._lbs_delay(p.control_packet_size), new, "PBA")
        self.queue.push(t_hack, lambda t: self._on_complete(t, ho))

    def _chain_predictive(self, t0: float, ho: _Handover) -> None:
        p, rec = self.p, ho.record
        t_down = t0 + p.phi
        rec.link_down_time = _q(t_down)
        x, y = self.position(t0)
        hears_old = self.topology.distance_to_center(ho.old_zone, x, y) \
            <= self._min_rss_dist
        if not hears_old:
            # Old zone inaudible: no pre-signaling is possible.
            rec.mode = "reactive"
            rec.hack_before_link_down = False
            self.queue.push(t_down, lambda t: self._chain_reactive(t, ho))
            return
        hops_hi = self.topology.hops_between_zones(ho.old_zone, ho.new_zone)
        t_report = t0 + self._wireless_delay(p.control_packet_size)
        t_hi = t_report + self._zone_delay(p.control_packet_size, hops_hi)
        t_hack_sent = t_hi + p.proc_time_mz
        t_hack = t_hack_sent + self._zone_delay(p.control_packet_size, hops_hi)
        old, new = f"Z{ho.old_zone}", f"Z{ho.new_zone}"
        self._count_msg(rec, p.hops_mu_mz, t_report, old, "L2_REPORT")
        self._count_msg(rec, hops_hi, t_hi, new, "HI", "D=1,T=0")
        self._count_msg(rec, hops_hi, t_hack, old, "HACK", "D=1,T=0")
        rec.hack_before_link_down = t_hack <= t_down
        if not rec.hack_before_link_down:
            # Tunnel not ready before link-down: execute reactively.
            rec.mode = "reactive"
            self.queue.push(t_down, lambda t: self._chain_reactive(t, ho))
            return
        rec.mode = "predictive"
        t_cmd = t_hack + self._wireless_delay(p.control_packet_size)
        self._count_msg(rec, p.hops_mu_mz, t_cmd, "MU", "HANDOVER_COMMAND")
        anchors = self._anchored_flows()
        t_attach = max(t_down, t_cmd) + (p.l2_latency - p.scan_time) \
            + p.auth_latency
        t_pbu = t_attach + self._lbs_delay(p.control_packet_size)
        t_repoint = t_pbu + p.proc_time_lbs \
            + self._lbs_delay(p.control_packet_size) + p.proc_time_mz
        self._count_msg(rec, p.hops_lbs_mz, t_pbu, "LBS", "PBU")
        self._count_msg(rec, p.hops_lbs_mz, t_repoint - p.proc_time_mz,
                        new, "PBA")
        for f in anchors:
            self._count_msg(rec, p.hops_lbs_mz, t_repoint - p.proc_time_mz,
                            f"Z{f.anchor}", "PBU")
            self._count_msg(rec, p.hops_lbs_mz, t_repoint
                            + self._lbs_delay(p.control_packet_size) - p.proc_time_mz,
                            "LBS", "PBA")
        ho.buffering = True  # tunnel is up; packets start arriving at link-down
        self.queue.push(t_down, lambda t: self._on_link_down(t, ho))
        self.queue.push(t_attach, lambda t: self._on_complete(t, ho))
        self.queue.push(t_repoint, lambda t: self._on_repoint(t, ho, anchors))

    # -- handover event handlers ---------------------------------------------

    def _on_link_down(self, now: float, ho: _Handover) -> None:
        self.attached = False
        self._trace(now, "MU", "link-down", f"Z{ho.old_zone}")
        if ho.record.mode == "predictive":
            # Old zone diverts the traffic it anchors into the tunnel and
            # chain-forwards transit from not-yet-updated anchors.
            self._divert_local_flows(ho.old_zone, ho.new_zone)
            self.forward[ho.old_zone] = ho.new_zone

    def _divert_local_flows(self, old_zone: int, new_zone: int) -> None:
        for f in self.flows:
            if f.alive and f.anchor == old_zone \
                    and self.route.get(f.prefix) == old_zone:
                self.route[f.prefix] = new_zone

    def _on_reattach_l2(self, now: float, ho: _Handover) -> None:
        # Reactive: the mobile sits on the new zone before the context pull.
        self.serving = ho.new_zone
        self.attached = True
        self._trace(now, "MU", "attach-l2", f"Z{ho.new_zone}")

    def _on_divert(self, now: float, ho: _Handover) -> None:
        # Reactive: the previous zone forwards into the fresh tunnel.
        self._divert_local_flows(ho.old_zone, ho.new_zone)

    def _on_repoint(self, now: float, ho: _Handover,
                    anchors: list[_Flow]) -> None:
        for f in anchors:
            self._repoint_flow(now, f, ho.new_zone)
        self._divert_local_flows(ho.old_zone, ho.new_zone)
        self._trace(now, "LBS", "anchors-repointed", f"Z{ho.new_zone}")

    def _repoint_flow(self, now: float, flow: _Flow, zone: int) -> None:
        if flow.alive:
            self.route[flow.prefix] = zone

    def _on_complete(self, now: float, ho: _Handover) -> None:
        rec = ho.record
        rec.complete_time = _q(now)
        rec.latency = _q(now - rec.link_down_time)
        self.serving = ho.new_zone
        self.attached = True
        # The prefix served by the old zone becomes anchored with an
        # exponential remaining lifetime; a fresh flow starts on the new one.
        if ho.old_flow is not None and ho.old_flow.alive:
            self._schedule_expiry(now, ho.old_flow)
        self._spawn_flow(now, ho.new_zone)
        if rec.mode == "predictive":
            self._drain_buffer(now, ho)
        self.pending_recovery = rec
        self._trace(now, "MU", "handover-complete", rec.mode, "-",
                    rec.control_bytes)
        x, y = self.position(now)
        if self.topology.zone_of(x, y) != ho.new_zone:
            # Residence in the new zone ended before the handover finished.
            rec.failed = True
            self.failures += 1
        self.active = None
        self._plan_next_trigger(now)

    # -- trigger planning ------------------------------------------------------

    def _condition(self, x: float, y: float) -> int | None:
        """Target zone if the handover condition holds at (x, y), else None."""
        nearest = self.topology.zone_of(x, y)
        if nearest == self.serving:
            return None
        if self.topology.distance_to_center(self.serving, x, y) \
                < self._threshold_dist:
            return None  # serving signal still above the trigger threshold
        return nearest

    def _leg_breakpoints(self, leg: _Leg, t_from: float) -> list[float]:
        top = self.topology
        times = {max(t_from, leg.t0), leg.t1}
        duration = leg.t1 - leg.t0
        cx, cy = top.center(self.serving)
        if leg.x1 != leg.x0:  # horizontal movement
            lo, hi = sorted((leg.x0, leg.x1))
            speed = (leg.x1 - leg.x0) / duration
            first = math.floor((lo - top.origin_x) / top.pitch_x - 0.5)
            last = math.ceil((hi - top.origin_x) / top.pitch_x + 0.5)
            for k in range(first, last + 1):
                mid = top.origin_x + (k + 0.5) * top.pitch_x
                if lo < mid < hi:
                    times.add(leg.t0 + (mid - leg.x0) / speed)
            gap = self._threshold_dist ** 2 - (leg.y0 - cy) ** 2
            if gap > 0:
                root = math.sqrt(gap)
                for xc in (cx - root, cx + root):
                    if lo < xc < hi:
                        times.add(leg.t0 + (xc - leg.x0) / speed)
        else:  # vertical movement
            lo, hi = sorted((leg.y0, leg.y1))
            speed = (leg.y1 - leg.y0) / duration
            first = math.floor((lo - top.origin_y) / top.pitch_y - 0.5)
            last = math.ceil((hi - top.origin_y) / top.pitch_y + 0.5)
            for k in range(first, last + 1):
                mid = top.origin_y + (k + 0.5) * top.pitch_y
                if lo < mid < hi:
                    times.add(leg.t0 + (mid - leg.y0) / speed)
            gap = self._threshold_dist ** 2 - (leg.x0 - cx) ** 2
            if gap > 0:
                root = math.sqrt(gap)
                for yc in (cy - root, cy + root):
                    if lo < yc < hi:
                        times.add(leg.t0 + (yc - leg.y0) / speed)
        return sorted(t for t in times if t_from <= t <= leg.t1)

    def _first_trigger_in_leg(self, leg: _Leg,
                              t_from: float) -> tuple[float, int] | None:
        if leg.t1 <= t_from:
            return None
        if not leg.moving:
            target = self._condition(leg.x0, leg.y0)
            return (max(t_from, leg.t0), target) if target is not None else None
        points = self._leg_breakpoints(leg, t_from)
        for a, b in zip(points, points[1:]):
            mx, my = leg.pos((a + b) / 2)
            target = self._condition(mx, my)
            if target is not None:
                return a, target
        return None

    def _plan_next_trigger(self, t_from: float) -> None:
        i = self._leg_index(t_from)
        t = t_from
        while True:
            leg = self._legs[i]
            if leg.t0 > self.duration:
                return
            found = self._first_trigger_in_leg(leg, t)
            if found is not None:
                t_trig, target = found
                if t_trig <= self.duration:
                    self.queue.push(
                        t_trig, lambda now, g=target: self._on_trigger(now, g))
                return
            t = leg.t1
            if math.isinf(t):
                return
            i += 1
            self._extend_legs(t)

    def _on_trigger(self, now: float, target: int) -> None:
        # Planned triggers cannot go stale: the serving zone changes only at
        # handover completion, which re-plans. The trigger time sits exactly
        # on the condition boundary, so the target comes from the planner
        # (which evaluated the open interval just past it), not from a
        # re-evaluation at the boundary point.
        if self.active is not None or target == self.serving:
            return
        self._start_handover(now, target)

    # -- main loop -----------------------------------------------------------

    def run(self) -> SimReport:
        self._plan_next_trigger(0.0)
        while len(self.queue):
            t, fn = self.queue.pop()
            if t > self.duration and self.active is None:
                break
            fn(t)
        buffered = len(self.active.buffer) if self.active else 0
        self.counters.buffered_at_end = buffered
        self.counters.in_flight_at_end = self.in_flight - buffered
        self._count_prefixes(self.duration, 0)
        if self._trace_file:
            self._trace_file.close()
        return SimReport(
            scheme=self.scheme, seed=self.seed, duration=self.duration,
            records=self.records, counters=self.counters,
            crossings=self.crossings, failures=self.failures,
            total_control_bytes=self.control_bytes,
            total_hop_bytes=self.hop_bytes,
            mean_active_prefixes=self._pfx_area / self.duration,
            analytic=analytic_expectations(self.p, self.scheme))


def analytic_expectations(p: SystemParameters, scheme: Scheme) -> dict[str, float]:
    """Closed-form values the simulator is expected to approach."""
    out = {
        "latency": model.handover_latency(scheme, p),
        "session_recovery": model.session_recovery(scheme, p),
    }
    try:
        mob = model.mobility_stats(p)
    except model.ModelDomainError:
        return out
    prefixes = model.prefix_stats(p, mob.crossing_rate)
    out.update({
        "failure_prob": model.handover_failure_prob(mob.crossing_rate,
                                                    out["latency"]),
        "packet_loss": model.packet_loss(scheme, p,
                                         prefixes.mean_active_prefixes),
        "signaling_cost": model.signaling_cost(
            scheme, p, mob.crossing_rate, prefixes.mean_active_prefixes),
        "crossing_rate": mob.crossing_rate,
        "mean_active_prefixes": prefixes.mean_active_prefixes,
    })
    return out


def run(p: SystemParameters, scheme: Scheme, seed: int, duration: float,
        fleet: int = 1, trace_path: str | None = None) -> SimReport:
    """Simulate ``duration`` seconds and return the metric report.

    ``fleet`` > 1 runs that many independent mobiles (shared topology, no
    contention between them) and merges the reports; per-mobile seeds derive
    deterministically from ``seed``.
    """
    if fleet < 1:
        raise ValueError("fleet must be >= 1")
    report = RoadSimulation(p, scheme, seed, duration, trace_path).run()
    for k in range(1, fleet):
        sub = random.Random(f"{seed}:fleet:{k}").randrange(2 ** 31)
        report = report.merged_with(RoadSimulation(p, scheme, sub,
                                                   duration).run())
    return report
