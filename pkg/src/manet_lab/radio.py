"""Unit-disk radio with deterministic delays and send-time link verdicts.

The channel is ideal: no collisions, no interference, no queueing loss. The
only loss mechanisms in the model are route breakage and TTL expiry, so a
unicast either schedules exactly one arrival or reports a link failure
synchronously to the sender (the MAC-level callback the hybrid protocol
relies on). The verdict is decided by node positions at send time.
"""

from dataclasses import dataclass
from enum import Enum

from .core import EventKind, RngStream, SimTime, Simulator, us
from .geometry import dist
from .packets import Packet, clone


@dataclass
class RadioConfig:
    range_m: float = 250.0
    bandwidth_bps: float = 2_000_000.0
    processing_delay_s: float = 0.001
    jitter_max_s: float = 0.0  # per-receiver uniform jitter in [0, jitter_max]


class TxStatus(Enum):
    DELIVERED = "delivered"
    LINK_FAILURE = "link_failure"


@dataclass
class TxOutcome:
    status: TxStatus
    receive_time: SimTime | None = None


class Radio:
    """Broadcast/unicast primitives over the instantaneous connectivity graph."""

    def __init__(self, config: RadioConfig, position_fn, sim: Simulator,
                 metrics, jitter_rng: RngStream, n_nodes: int):
        self.config = config
        self._position = position_fn
        self._sim = sim
        self._metrics = metrics
        self._jitter = jitter_rng
        self._n_nodes = n_nodes
        self._proc_us = us(config.processing_delay_s)
        self._jitter_us = us(config.jitter_max_s)
        self._delay_cache: dict[int, int] = {}

    def tx_delay(self, size_bytes: int) -> float:
        """Serialization delay in seconds: size * 8 / bandwidth."""
        return size_bytes * 8 / self.config.bandwidth_bps

    def tx_delay_us(self, size_bytes: int) -> SimTime:
        cached = self._delay_cache.get(size_bytes)
        if cached is None:
            cached = us(self.tx_delay(size_bytes))
            self._delay_cache[size_bytes] = cached
        return cached

    def neighbors(self, node: int, t: SimTime) -> list[int]:
        """Node ids within radio range at time t, boundary inclusive, sorted."""
        here = self._position(node, t)
        rng = self.config.range_m
        out = []
        for other in range(self._n_nodes):
            if other == node:
                continue
            if dist(here, self._position(other, t)) <= rng:
                out.append(other)
        return out

    def _receive_time(self, t: SimTime, size_bytes: int) -> SimTime:
        rt = t + self.tx_delay_us(size_bytes) + self._proc_us
        if self._jitter_us > 0:
            rt += us(self._jitter.uniform(0.0, self.config.jitter_max_s))
        return rt

    def broadcast(self, sender: int, pkt: Packet) -> list[tuple[int, SimTime]]:
        """Deliver a copy to every current neighbor; one transmission regardless."""
        t = self._sim.now
        self._metrics.record_transmission(pkt.kind, is_broadcast=True)
        deliveries = []
        for receiver in self.neighbors(sender, t):
            rt = self._receive_time(t, pkt.size_bytes)
            self._sim.schedule(rt, EventKind.PACKET_ARRIVAL, receiver, (clone(pkt), sender))
            deliveries.append((receiver, rt))
        return deliveries

    def unicast(self, sender: int, next_hop: int, pkt: Packet) -> TxOutcome:
        """Send to one neighbor; out-of-range reports LinkFailure synchronously."""
        t = self._sim.now
        self._metrics.record_transmission(pkt.kind, is_broadcast=False)
        here = self._position(sender, t)
        there = self._position(next_hop, t)
        if dist(here, there) > self.config.range_m:
            return TxOutcome(TxStatus.LINK_FAILURE)
        rt = self._receive_time(t, pkt.size_bytes)
        self._sim.schedule(rt, EventKind.PACKET_ARRIVAL, next_hop, (clone(pkt), sender))
        return TxOutcome(TxStatus.DELIVERED, rt)
