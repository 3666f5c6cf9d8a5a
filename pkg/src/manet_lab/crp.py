"""Combined routing: greedy geographic forwarding with reactive escape routes.

Packets travel greedily toward the destination's coordinates whenever a
closer neighbor exists. A node with no closer neighbor does not walk the
void's perimeter; instead it runs a cut-down reactive discovery anchored at
itself (not at the packet's original source) and pushes the packet along the
discovered route. Once a packet rides a discovered route it never returns to
greedy mode. The cut-down discovery differs from the standalone reactive
protocol in two ways: a broken route is never repaired (the in-flight packet
is lost, no error packets are sent, and later packets simply re-anchor a new
discovery where they get stuck), and link liveness comes purely from the
MAC-level unicast callback, with no hello traffic. Position beacons stay on
because greedy mode cannot work without neighbor coordinates.
"""

from .aodv import ReactiveCore, RouteEntry
from .gpsr import BeaconMixin, greedy_next_hop
from .metrics import DropCause
from .packets import AodvHeader, CrpHeader, CrpMode, Packet, PacketKind
from .radio import TxStatus


class CrpNode(BeaconMixin):
    def __init__(self, engine, node: int):
        self.engine = engine
        self.node = node
        self.core = ReactiveCore(engine, node, owner=self)
        cfg = engine.scenario
        self.escape_cache_enabled = cfg.escape_cache
        self.reanchor_on_route_loss = cfg.reanchor_on_route_loss
        self._init_beacons(engine, node)

    def start(self) -> None:
        self._start_beacons()

    def on_timer(self, payload) -> None:
        if payload[0] == "discovery":
            self.core.on_discovery_timeout(payload[1])

    # -- data plane ------------------------------------------------------

    def originate(self, pkt: Packet) -> None:
        if pkt.final_dst == self.node:
            self.engine.deliver(self.node, pkt)
            return
        pkt.crp = CrpHeader(mode=CrpMode.GEO_GREEDY,
                            dst_pos=self.engine.dst_position(pkt.final_dst))
        self.forward(pkt)

    def on_packet(self, pkt: Packet, sender: int) -> None:
        kind = pkt.kind
        if kind is PacketKind.BEACON:
            self._on_beacon(pkt, sender)
        elif kind is PacketKind.DATA:
            self.forward(pkt)
        elif kind is PacketKind.RREQ:
            self.core.handle_rreq(pkt, sender)
        elif kind is PacketKind.RREP:
            self.core.handle_rrep(pkt, sender)
        # RERR is never generated in this protocol; ignore strays.

    def forward(self, pkt: Packet) -> None:
        engine = self.engine
        if pkt.final_dst == self.node:
            engine.deliver(self.node, pkt)
            return
        if pkt.ttl < 1:
            engine.drop(pkt, DropCause.TTL)
            return
        h = pkt.crp
        if h.mode is CrpMode.GEO_GREEDY:
            self._forward_greedy(pkt)
        else:
            entry = self.core.table.lookup_active(pkt.final_dst, engine.now)
            if entry is None:
                # Route evaporated mid-path: this node becomes the new
                # discovery anchor (or the packet dies if re-anchoring is off).
                if self.reanchor_on_route_loss:
                    self.on_local_maximum(pkt)
                else:
                    engine.drop(pkt, DropCause.LINK_FAILURE)
            else:
                self._forward_on_route(pkt, entry)

    def _forward_greedy(self, pkt: Packet) -> None:
        engine = self.engine
        self_pos = engine.position(self.node)
        dst_pos = pkt.crp.dst_pos
        for attempt in (0, 1):  # one retry after a link failure
            neighbors = self.nbrs.fresh(engine.now)
            nh = greedy_next_hop(self_pos, neighbors, dst_pos)
            if nh is None:
                self.on_local_maximum(pkt)
                return
            pkt.ttl -= 1
            outcome = engine.unicast(self.node, nh, pkt)
            if outcome.status is TxStatus.DELIVERED:
                engine.note_hop(pkt, self.node, "geo_greedy")
                return
            pkt.ttl += 1  # the hop did not happen
            self.nbrs.evict(nh)
            self.core.table.invalidate_via(nh, engine.now)
        engine.drop(pkt, DropCause.LINK_FAILURE)

    def _forward_on_route(self, pkt: Packet, entry: RouteEntry) -> None:
        engine = self.engine
        pkt.ttl -= 1
        if pkt.crp.aodv is not None:
            pkt.crp.aodv.hop_count += 1
        self.core.table.refresh(entry, engine.now)
        outcome = engine.unicast(self.node, entry.next_hop, pkt)
        if outcome.status is TxStatus.DELIVERED:
            engine.note_hop(pkt, self.node, "aodv_route")
            return
        # No recovery: lose this packet, invalidate quietly, send no RERR.
        self.nbrs.evict(entry.next_hop)
        self.core.table.invalidate_via(entry.next_hop, engine.now)
        engine.drop(pkt, DropCause.LINK_FAILURE)

    def on_local_maximum(self, pkt: Packet) -> None:
        """Greedy has no closer neighbor here: ride a cached escape route if
        one is fresh, otherwise buffer and flood a discovery from this node."""
        engine = self.engine
        if self.escape_cache_enabled:
            entry = self.core.table.lookup_active(pkt.final_dst, engine.now)
            if entry is not None:
                self._switch_to_route(pkt, entry)
                self._forward_on_route(pkt, entry)
                return
        self.core.buffer_and_discover(pkt.final_dst, pkt)

    def _switch_to_route(self, pkt: Packet, entry: RouteEntry) -> None:
        h = pkt.crp
        h.mode = CrpMode.AODV_ROUTE
        h.aodv = AodvHeader(rreq_id=0, origin_seq=self.core.seq,
                            dst_seq=entry.dst_seq, hop_count=0)

    # -- ReactiveCore owner hooks ----------------------------------------

    def send_buffered(self, pkt: Packet, entry: RouteEntry) -> None:
        self._switch_to_route(pkt, entry)
        self._forward_on_route(pkt, entry)

    def on_control_link_failure(self, next_hop: int, pkt: Packet) -> None:
        # Reply forwarding hit a dead link; invalidate quietly, no RERR.
        self.nbrs.evict(next_hop)
        self.core.table.invalidate_via(next_hop, self.engine.now)
        self.engine.metrics.note_diagnostic("control_link_failure")
