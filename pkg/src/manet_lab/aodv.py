"""On-demand route discovery with sequence-numbered hop-by-hop tables.

A node that needs a route floods a route request; relays install reverse-path
entries toward the requester as the flood passes, and the destination (or a
relay holding a sufficiently fresh route) answers with a route reply that
walks back along the reverse path installing forward entries. Broken links
invalidate entries and are announced with route-error packets so affected
sources can rediscover.

`ReactiveCore` holds the table and flood state for one node. The standalone
protocol (`AodvNode`) drives it directly; the hybrid protocol reuses it for
escape-route discoveries anchored at stuck nodes.
"""

from collections import deque
from dataclasses import dataclass

from .core import SimTime, us
from .metrics import DropCause
from .packets import AodvHeader, Packet, PacketKind
from .radio import TxStatus

DISCOVERY_TIMEOUT_FLOOR_S = 0.1


@dataclass
class RouteEntry:
    dst: int
    next_hop: int
    hop_count: int
    dst_seq: int
    expires_at: SimTime
    active: bool = True


class RouteTable:
    """Per-destination next-hop entries guarded by the freshness rule:
    an entry is replaced only by a strictly greater sequence number, or an
    equal one with strictly fewer hops."""

    def __init__(self, lifetime_us: SimTime):
        self.lifetime_us = lifetime_us
        self.entries: dict[int, RouteEntry] = {}

    def get(self, dst: int) -> RouteEntry | None:
        return self.entries.get(dst)

    def lookup_active(self, dst: int, now: SimTime) -> RouteEntry | None:
        e = self.entries.get(dst)
        if e is None or not e.active:
            return None
        if now >= e.expires_at:
            # Lazy expiry. Bumping the sequence number here keeps stale
            # caches elsewhere from answering the rediscovery this triggers.
            e.active = False
            e.dst_seq += 1
            return None
        return e

    def accept(self, dst: int, next_hop: int, hop_count: int, dst_seq: int,
               now: SimTime) -> bool:
        e = self.entries.get(dst)
        if e is not None:
            better = dst_seq > e.dst_seq or (dst_seq == e.dst_seq
                                             and hop_count < e.hop_count)
            if not better:
                if (e.active and dst_seq == e.dst_seq
                        and hop_count == e.hop_count and next_hop == e.next_hop):
                    self.refresh(e, now)  # same route re-learned
                return False
        self.entries[dst] = RouteEntry(dst, next_hop, hop_count, dst_seq,
                                       now + self.lifetime_us)
        return True

    def refresh(self, entry: RouteEntry, now: SimTime) -> None:
        entry.expires_at = max(entry.expires_at, now + self.lifetime_us)

    def invalidate_via(self, next_hop: int, now: SimTime) -> list[tuple[int, int]]:
        """Deactivate every active entry using next_hop; returns the affected
        (dst, bumped_seq) pairs for route-error reporting."""
        affected = []
        for e in self.entries.values():
            if e.active and e.next_hop == next_hop:
                e.active = False
                e.dst_seq += 1
                affected.append((e.dst, e.dst_seq))
        return affected


class _Discovery:
    __slots__ = ("buffer", "retries_left", "timer")

    def __init__(self, retries: int):
        self.buffer: deque[Packet] = deque()
        self.retries_left = retries
        self.timer = None


class ReactiveCore:
    """Flood/reply machinery bound to one node.

    The owner supplies two hooks: `send_buffered(pkt, entry)` to launch each
    buffered packet once a route is ready, and `on_control_link_failure(
    next_hop, pkt)` when forwarding a route reply hits a dead link.
    """

    def __init__(self, engine, node: int, owner):
        self.engine = engine
        self.node = node
        self.owner = owner
        cfg = engine.scenario
        self.table = RouteTable(us(cfg.route_lifetime_s))
        self.seq = 0
        self.next_rreq_id = 0
        self.seen: dict[tuple[int, int], SimTime] = {}
        self.pending: dict[int, _Discovery] = {}
        self._rreq_ttl = cfg.rreq_ttl
        self._control_size = cfg.control_size_bytes
        self._retries = cfg.discovery_retries
        self._buffer_cap = cfg.buffer_cap

    # -- discovery -----------------------------------------------------

    def buffer_and_discover(self, dst: int, pkt: Packet) -> None:
        d = self.pending.get(dst)
        if d is None:
            d = _Discovery(self._retries)
            self.pending[dst] = d
            d.buffer.append(pkt)
            self._flood(dst, d)
            return
        d.buffer.append(pkt)
        if len(d.buffer) > self._buffer_cap:
            oldest = d.buffer.popleft()
            self.engine.drop(oldest, DropCause.BUFFER)

    def _timeout_us(self) -> SimTime:
        per_hop = self.engine.radio.tx_delay_us(self._control_size) \
            + us(self.engine.scenario.processing_delay_s)
        return max(us(DISCOVERY_TIMEOUT_FLOOR_S), 2 * self._rreq_ttl * per_hop)

    def _flood(self, dst: int, d: _Discovery) -> None:
        now = self.engine.now
        self.seq += 1
        self.next_rreq_id += 1
        known = self.table.get(dst)
        pkt = Packet(
            uid=self.engine.next_uid(), kind=PacketKind.RREQ,
            origin=self.node, final_dst=dst, created_at=now,
            ttl=self._rreq_ttl, size_bytes=self._control_size,
            aodv=AodvHeader(rreq_id=self.next_rreq_id, origin_seq=self.seq,
                            dst_seq=known.dst_seq if known else 0, hop_count=0),
        )
        self.seen[(self.node, self.next_rreq_id)] = now
        self.engine.note_flood(self.node, dst)
        self.engine.broadcast(self.node, pkt)
        d.timer = self.engine.schedule_timer(self.node, self._timeout_us(),
                                             ("discovery", dst))

    def on_discovery_timeout(self, dst: int) -> None:
        d = self.pending.get(dst)
        if d is None:
            return
        if self.table.lookup_active(dst, self.engine.now) is not None:
            self._flush(dst, d)  # route showed up from another reply
            return
        if d.retries_left > 0:
            d.retries_left -= 1
            self._flood(dst, d)
            return
        del self.pending[dst]
        for pkt in d.buffer:
            self.engine.drop(pkt, DropCause.DISCOVERY_TIMEOUT)

    def _flush(self, dst: int, d: _Discovery) -> None:
        if d.timer is not None:
            self.engine.cancel_timer(d.timer)
        del self.pending[dst]
        while d.buffer:
            pkt = d.buffer.popleft()
            entry = self.table.lookup_active(dst, self.engine.now)
            if entry is None:  # route died while flushing
                self.buffer_and_discover(dst, pkt)
                continue
            self.owner.send_buffered(pkt, entry)

    # -- flood handling ------------------------------------------------

    def handle_rreq(self, pkt: Packet, sender: int) -> None:
        hdr = pkt.aodv
        key = (pkt.origin, hdr.rreq_id)
        if pkt.origin == self.node or key in self.seen:
            return
        now = self.engine.now
        self.seen[key] = now
        # reverse path toward the flood's origin
        self.table.accept(pkt.origin, sender, hdr.hop_count + 1, hdr.origin_seq, now)
        if self.node == pkt.final_dst:
            self.seq = max(self.seq, hdr.dst_seq) + 1
            self._send_rrep(subject=self.node, discovery_origin=pkt.origin,
                            to=sender, hop_count=0, dst_seq=self.seq)
            return
        cached = self.table.lookup_active(pkt.final_dst, now)
        if cached is not None and cached.dst_seq >= hdr.dst_seq:
            self._send_rrep(subject=pkt.final_dst, discovery_origin=pkt.origin,
                            to=sender, hop_count=cached.hop_count,
                            dst_seq=cached.dst_seq)
            return
        pkt.ttl -= 1
        if pkt.ttl >= 1:
            hdr.hop_count += 1
            self.engine.broadcast(self.node, pkt)

    def _send_rrep(self, subject: int, discovery_origin: int, to: int,
                   hop_count: int, dst_seq: int) -> None:
        pkt = Packet(
            uid=self.engine.next_uid(), kind=PacketKind.RREP,
            origin=subject, final_dst=discovery_origin,
            created_at=self.engine.now, ttl=self._rreq_ttl,
            size_bytes=self._control_size,
            aodv=AodvHeader(rreq_id=0, origin_seq=0, dst_seq=dst_seq,
                            hop_count=hop_count),
        )
        outcome = self.engine.unicast(self.node, to, pkt)
        if outcome.status is TxStatus.LINK_FAILURE:
            self.owner.on_control_link_failure(to, pkt)

    def handle_rrep(self, pkt: Packet, sender: int) -> None:
        hdr = pkt.aodv
        subject = pkt.origin            # the node the route leads to
        discovery_origin = pkt.final_dst
        now = self.engine.now
        self.table.accept(subject, sender, hdr.hop_count + 1, hdr.dst_seq, now)
        if self.node == discovery_origin:
            d = self.pending.get(subject)
            if d is not None and self.table.lookup_active(subject, now) is not None:
                self._flush(subject, d)
            return
        back = self.table.lookup_active(discovery_origin, now)
        if back is None:
            self.engine.metrics.note_diagnostic("rrep_no_reverse_path")
            return
        pkt.ttl -= 1
        if pkt.ttl < 1:
            self.engine.metrics.note_diagnostic("rrep_ttl_expired")
            return
        hdr.hop_count += 1
        self.table.refresh(back, now)
        outcome = self.engine.unicast(self.node, back.next_hop, pkt)
        if outcome.status is TxStatus.LINK_FAILURE:
            self.owner.on_control_link_failure(back.next_hop, pkt)


class AodvNode:
    """Full reactive protocol state machine for one node.

    Link liveness comes from the MAC-level unicast callback by default; the
    optional hello mode broadcasts periodic hellos instead and declares a
    link dead after two silent intervals.
    """

    def __init__(self, engine, node: int):
        self.engine = engine
        self.node = node
        self.core = ReactiveCore(engine, node, owner=self)
        cfg = engine.scenario
        self._hello_enabled = cfg.aodv_hello
        self._hello_interval = us(cfg.hello_interval_s)
        self._hello_size = cfg.hello_size_bytes
        self._hello_heard: dict[int, SimTime] = {}

    # -- lifecycle -------------------------------------------------------

    def start(self) -> None:
        if self._hello_enabled:
            first = round(self.engine.rng_hello.uniform(0, self._hello_interval))
            self.engine.schedule_timer(self.node, first, ("hello",))

    def on_timer(self, payload) -> None:
        if payload[0] == "discovery":
            self.core.on_discovery_timeout(payload[1])
        elif payload[0] == "hello":
            self._hello_tick()

    # -- data plane --------------------------------------------------------

    def originate(self, pkt: Packet) -> None:
        if pkt.final_dst == self.node:
            self.engine.deliver(self.node, pkt)
            return
        entry = self.core.table.lookup_active(pkt.final_dst, self.engine.now)
        if entry is not None:
            self._send_data(pkt, entry)
        else:
            self.core.buffer_and_discover(pkt.final_dst, pkt)

    def send_buffered(self, pkt: Packet, entry: RouteEntry) -> None:
        self._send_data(pkt, entry)

    def _send_data(self, pkt: Packet, entry: RouteEntry) -> None:
        if pkt.ttl < 1:
            self.engine.drop(pkt, DropCause.TTL)
            return
        pkt.ttl -= 1
        self.core.table.refresh(entry, self.engine.now)
        outcome = self.engine.unicast(self.node, entry.next_hop, pkt)
        if outcome.status is TxStatus.LINK_FAILURE:
            self.on_link_failure(entry.next_hop, pkt)
        else:
            self.engine.note_hop(pkt, self.node, "aodv")

    def on_packet(self, pkt: Packet, sender: int) -> None:
        kind = pkt.kind
        if kind is PacketKind.DATA:
            self._handle_data(pkt, sender)
        elif kind is PacketKind.RREQ:
            self.core.handle_rreq(pkt, sender)
        elif kind is PacketKind.RREP:
            self.core.handle_rrep(pkt, sender)
        elif kind is PacketKind.RERR:
            self._handle_rerr(pkt, sender)
        elif kind is PacketKind.HELLO:
            self._hello_heard[sender] = self.engine.now

    def _handle_data(self, pkt: Packet, sender: int) -> None:
        if pkt.final_dst == self.node:
            self.engine.deliver(self.node, pkt)
            return
        entry = self.core.table.lookup_active(pkt.final_dst, self.engine.now)
        if entry is None:
            # Transit packet with no live route: report the break upstream.
            e = self.core.table.get(pkt.final_dst)
            self._emit_rerr([(pkt.final_dst, e.dst_seq if e else 0)])
            self.engine.drop(pkt, DropCause.LINK_FAILURE)
            return
        self._send_data(pkt, entry)

    # -- failure handling ----------------------------------------------

    def on_link_failure(self, next_hop: int, pkt: Packet) -> None:
        affected = self.core.table.invalidate_via(next_hop, self.engine.now)
        if affected:
            self._emit_rerr(affected)
        if pkt.kind is PacketKind.DATA:
            if pkt.origin == self.node:
                # The source re-enters discovery with the packet re-buffered.
                self.core.buffer_and_discover(pkt.final_dst, pkt)
            else:
                self.engine.drop(pkt, DropCause.LINK_FAILURE)
        else:
            self.engine.metrics.note_diagnostic("control_link_failure")

    def on_control_link_failure(self, next_hop: int, pkt: Packet) -> None:
        self.on_link_failure(next_hop, pkt)

    def _emit_rerr(self, affected: list[tuple[int, int]], ttl: int | None = None) -> None:
        pkt = Packet(
            uid=self.engine.next_uid(), kind=PacketKind.RERR,
            origin=self.node, final_dst=-1, created_at=self.engine.now,
            ttl=self.engine.scenario.rreq_ttl if ttl is None else ttl,
            size_bytes=self.engine.scenario.control_size_bytes,
            rerr_dsts=tuple(affected),
        )
        self.engine.broadcast(self.node, pkt)

    def _handle_rerr(self, pkt: Packet, sender: int) -> None:
        hit = []
        for dst, seq in pkt.rerr_dsts:
            e = self.core.table.get(dst)
            if e is not None and e.active and e.next_hop == sender:
                e.active = False
                e.dst_seq = max(e.dst_seq + 1, seq)
                hit.append((dst, e.dst_seq))
        if hit and pkt.ttl - 1 >= 1:
            self._emit_rerr(hit, ttl=pkt.ttl - 1)

    # -- optional hello mode ---------------------------------------------

    def _hello_tick(self) -> None:
        now = self.engine.now
        lost = [nbr for nbr, heard in self._hello_heard.items()
                if now - heard > 2 * self._hello_interval]
        for nbr in lost:
            del self._hello_heard[nbr]
            affected = self.core.table.invalidate_via(nbr, now)
            if affected:
                self._emit_rerr(affected)
        pkt = Packet(
            uid=self.engine.next_uid(), kind=PacketKind.HELLO,
            origin=self.node, final_dst=-1, created_at=now,
            ttl=1, size_bytes=self._hello_size,
        )
        self.engine.broadcast(self.node, pkt)
        self.engine.schedule_timer(self.node, self._hello_interval, ("hello",))
