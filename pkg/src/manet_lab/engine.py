"""Wires the clock, radio, mobility traces, traffic, and per-node protocols.

One Engine owns one run. All node state lives inside the single-threaded
event loop; runs with identical scenario and seed produce identical results,
so replications may execute in parallel processes but never share state.
"""

import itertools

from .aodv import AodvNode
from .core import EventKind, SimTime, Simulator, rng_stream, us
from .crp import CrpNode
from .geometry import Position
from .gpsr import GpsrNode
from .metrics import DropCause, MetricsRow, RunMetrics
from .mobility import WaypointTrace, position_at, random_waypoint_trace
from .packets import Packet, PacketKind
from .radio import Radio, RadioConfig, TxOutcome
from .scenario import Scenario
from .traffic import CbrStream, make_streams


def build_traces(sc: Scenario) -> list[WaypointTrace]:
    rng = rng_stream(sc.seed, "mobility")
    return [
        random_waypoint_trace(sc.area_width, sc.area_height, sc.speed_mps,
                              sc.pause_s, sc.duration_s, rng, node=i)
        for i in range(sc.n_nodes)
    ]


def build_streams(sc: Scenario) -> list[CbrStream]:
    return make_streams(
        sc.n_streams, sc.n_nodes, sc.packet_size_bytes,
        1.0 / sc.rate_pps, sc.duration_s,
        pair_rng=rng_stream(sc.seed, "pairs"),
        start_rng=rng_stream(sc.seed, "traffic"),
        start_window_s=sc.traffic_start_window_s,
    )


class Engine:
    def __init__(self, scenario: Scenario, *, traces: list[WaypointTrace] | None = None,
                 streams: list[CbrStream] | None = None, record_hops: bool = False,
                 record_log: bool = False, checkpoint_interval_s: float | None = None):
        self.scenario = scenario
        self.sim = Simulator()
        self.sim.handler = self._dispatch
        self.metrics = RunMetrics(record_log=record_log)
        self.rng_jitter = rng_stream(scenario.seed, "jitter")
        self.rng_beacon = rng_stream(scenario.seed, "beacon")
        self.rng_hello = rng_stream(scenario.seed, "hello")
        self.duration: SimTime = us(scenario.duration_s)
        if self.duration == 0:  # empty run: nothing moves, nothing is sent
            traces = traces if traces is not None else []
            streams = streams if streams is not None else []
        self.traces = traces if traces is not None else build_traces(scenario)
        self.streams = streams if streams is not None else build_streams(scenario)
        self.radio = Radio(
            RadioConfig(scenario.radio_range, scenario.bandwidth_bps,
                        scenario.processing_delay_s, scenario.jitter_max_s),
            self.position_at_time, self.sim, self.metrics, self.rng_jitter,
            scenario.n_nodes)
        self._uids = itertools.count()
        self.protocols = [self._make_protocol(i) for i in range(scenario.n_nodes)]
        self.flood_log: list[tuple[int, int, SimTime]] = []
        self.hop_log: dict[int, list[tuple[int, SimTime, str]]] | None = \
            {} if record_hops else None
        self._checkpoint_gap = (us(checkpoint_interval_s)
                                if checkpoint_interval_s else None)
        self.position_samples: list[tuple[int, float, float, float]] = []
        self._pos_cache_t: SimTime = -1
        self._pos_cache: dict[int, Position] = {}

    def _make_protocol(self, node: int):
        proto = self.scenario.protocol
        if proto == "aodv":
            return AodvNode(self, node)
        if proto == "gpsr":
            return GpsrNode(self, node, perimeter_enabled=self.scenario.perimeter_enabled)
        if proto == "gpsr_greedy_only":
            return GpsrNode(self, node, perimeter_enabled=False)
        if proto == "crp":
            return CrpNode(self, node)
        raise ValueError(f"unknown protocol {proto!r}")

    # -- services used by protocol state machines ------------------------

    @property
    def now(self) -> SimTime:
        return self.sim.now

    def position_at_time(self, node: int, t: SimTime) -> Position:
        # Sends cluster at identical instants (flood waves share delays), so
        # memoizing the current instant saves most trace interpolation.
        if t != self._pos_cache_t:
            self._pos_cache_t = t
            self._pos_cache = {}
        pos = self._pos_cache.get(node)
        if pos is None:
            pos = position_at(self.traces[node], t)
            self._pos_cache[node] = pos
        return pos

    def position(self, node: int) -> Position:
        return self.position_at_time(node, self.sim.now)

    def dst_position(self, node: int) -> Position:
        """Omniscient location service, consulted only at origination time."""
        return self.position(node)

    def next_uid(self) -> int:
        return next(self._uids)

    def broadcast(self, node: int, pkt: Packet) -> list[tuple[int, SimTime]]:
        return self.radio.broadcast(node, pkt)

    def unicast(self, node: int, next_hop: int, pkt: Packet) -> TxOutcome:
        return self.radio.unicast(node, next_hop, pkt)

    def deliver(self, node: int, pkt: Packet) -> None:
        self.metrics.record_delivery(pkt.uid, pkt.created_at, self.sim.now)
        self.note_hop(pkt, node, "delivered")

    def drop(self, pkt: Packet, cause: DropCause) -> None:
        if pkt.kind is PacketKind.DATA:
            self.metrics.record_drop(pkt.uid, cause)
            self.note_hop(pkt, -1, f"dropped:{cause.value}")
        else:
            self.metrics.note_diagnostic(f"drop_{pkt.kind.value}")

    def schedule_timer(self, node: int, delay_us: SimTime, payload):
        return self.sim.schedule(self.sim.now + delay_us, EventKind.TIMER_EXPIRY,
                                 node, payload)

    def cancel_timer(self, handle) -> None:
        self.sim.cancel(handle)

    def schedule_beacon(self, node: int, at: SimTime) -> None:
        self.sim.schedule(at, EventKind.BEACON_TICK, node)

    def note_flood(self, origin: int, dst: int) -> None:
        self.flood_log.append((origin, dst, self.sim.now))

    def note_hop(self, pkt: Packet, node: int, tag: str) -> None:
        if self.hop_log is not None and pkt.kind is PacketKind.DATA:
            self.hop_log.setdefault(pkt.uid, []).append((node, self.sim.now, tag))

    # -- event dispatch ----------------------------------------------------

    def _dispatch(self, ev) -> None:
        kind = ev.kind
        if kind is EventKind.PACKET_ARRIVAL:
            pkt, sender = ev.payload
            self.protocols[ev.target].on_packet(pkt, sender)
        elif kind is EventKind.TIMER_EXPIRY:
            self.protocols[ev.target].on_timer(ev.payload)
        elif kind is EventKind.TRAFFIC_EMIT:
            self._emit(ev.payload)
        elif kind is EventKind.BEACON_TICK:
            self.protocols[ev.target].on_beacon_tick()
        elif kind is EventKind.MOBILITY_CHECKPOINT:
            self._checkpoint()

    def _emit(self, stream_idx: int) -> None:
        s = self.streams[stream_idx]
        now = self.sim.now
        pkt = Packet(
            uid=self.next_uid(), kind=PacketKind.DATA, origin=s.src,
            final_dst=s.dst, created_at=now, ttl=self.scenario.data_ttl,
            size_bytes=s.packet_size,
        )
        self.metrics.record_origination(pkt.uid, now)
        self.note_hop(pkt, s.src, "originated")
        self.protocols[s.src].originate(pkt)
        nxt = now + s.interval
        if nxt <= s.stop_at:
            self.sim.schedule(nxt, EventKind.TRAFFIC_EMIT, s.src, stream_idx)

    def _checkpoint(self) -> None:
        t = self.sim.now
        for node in range(self.scenario.n_nodes):
            pos = self.position_at_time(node, t)
            self.position_samples.append((node, t / 1e6, pos.x, pos.y))
        nxt = t + self._checkpoint_gap
        if nxt <= self.duration:
            self.sim.schedule(nxt, EventKind.MOBILITY_CHECKPOINT, None)

    # -- run ----------------------------------------------------------------

    def run(self) -> MetricsRow:
        if self.duration > 0:
            for proto in self.protocols:
                proto.start()
            for idx, s in enumerate(self.streams):
                if s.start_at <= self.duration:
                    self.sim.schedule(s.start_at, EventKind.TRAFFIC_EMIT,
                                      s.src, idx)
            if self._checkpoint_gap:
                self.sim.schedule(0, EventKind.MOBILITY_CHECKPOINT, None)
        self.sim.run_until(self.duration)
        sc = self.scenario
        return self.metrics.finalize(
            protocol=sc.protocol, scenario_id=sc.name, seed=sc.seed,
            n_nodes=sc.n_nodes, pause_s=sc.pause_s, rate_pps=sc.rate_pps)


def run_one(scenario: Scenario) -> MetricsRow:
    """Build the world, run the loop to the scenario horizon, report one row.

    Identical (scenario, seed) pairs give byte-identical rows.
    """
    return Engine(scenario).run()
