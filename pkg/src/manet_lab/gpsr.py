"""Greedy geographic forwarding with perimeter bypass around voids.

Nodes learn neighbor positions from periodic beacons and forward each data
packet to the neighbor closest to the destination coordinates carried in the
header. At a local maximum (no neighbor strictly closer), the packet walks
the boundary of the void by the right-hand rule over a locally planarized
(Gabriel) subgraph until it reaches a node closer to the destination than
where the walk began, then goes greedy again.
"""

from dataclasses import dataclass

from .core import SimTime, us
from .geometry import TWO_PI, Position, dist, dist_sq, sweep_from_ray
from .metrics import DropCause
from .packets import GeoHeader, GeoMode, Packet, PacketKind
from .radio import TxStatus


@dataclass
class NeighborEntry:
    neighbor: int
    pos: Position
    last_heard: SimTime


class NeighborTable:
    def __init__(self, timeout_us: SimTime):
        self.timeout_us = timeout_us
        self.entries: dict[int, NeighborEntry] = {}

    def update(self, neighbor: int, pos: Position, now: SimTime) -> None:
        e = self.entries.get(neighbor)
        if e is None:
            self.entries[neighbor] = NeighborEntry(neighbor, pos, now)
        else:
            e.pos = pos
            e.last_heard = now

    def evict(self, neighbor: int) -> None:
        self.entries.pop(neighbor, None)

    def fresh(self, now: SimTime) -> list[NeighborEntry]:
        """Drop timed-out entries, then return the survivors sorted by id."""
        horizon = now - self.timeout_us
        stale = [n for n, e in self.entries.items() if e.last_heard < horizon]
        for n in stale:
            del self.entries[n]
        return [self.entries[n] for n in sorted(self.entries)]


def greedy_next_hop(self_pos: Position, neighbors: list[NeighborEntry],
                    dst_pos: Position) -> int | None:
    """Neighbor closest to the destination among those strictly closer than
    self; None marks a local maximum. Distance ties go to the lower id."""
    own = dist(self_pos, dst_pos)
    best = None
    best_key = None
    for e in neighbors:
        d = dist(e.pos, dst_pos)
        if d < own:
            key = (d, e.neighbor)
            if best_key is None or key < best_key:
                best_key = key
                best = e.neighbor
    return best


def planarize_gg(self_pos: Position,
                 neighbors: list[NeighborEntry]) -> list[NeighborEntry]:
    """Gabriel rule over the local view: keep the edge to v unless some other
    neighbor sits strictly inside the circle whose diameter is (self, v)."""
    kept = []
    for v in neighbors:
        sv = dist_sq(self_pos, v.pos)
        ok = True
        for w in neighbors:
            if w.neighbor == v.neighbor:
                continue
            if dist_sq(self_pos, w.pos) + dist_sq(w.pos, v.pos) < sv:
                ok = False
                break
        if ok:
            kept.append(v)
    return kept


def perimeter_next_hop(self_pos: Position, planar: list[NeighborEntry],
                       ref_pos: Position, arrived_from: int | None) -> int | None:
    """Right-hand-rule choice: first planar edge counterclockwise about self
    from the ray toward ref_pos (the previous hop, or the destination when
    the walk starts here). The arrival edge itself is the last resort, which
    handles degenerate single-edge faces by sending the packet back."""
    degenerate_ref = ref_pos == self_pos  # coincident points define no ray
    best = None
    best_key = None
    for e in planar:
        if e.pos == self_pos:
            continue
        if e.neighbor == arrived_from:
            sweep = TWO_PI
        elif degenerate_ref:
            sweep = 0.0
        else:
            sweep = sweep_from_ray(self_pos, ref_pos, e.pos)
        key = (sweep, e.neighbor)
        if best_key is None or key < best_key:
            best_key = key
            best = e.neighbor
    return best


class BeaconMixin:
    """Periodic position beaconing shared by the geographic protocols."""

    def _init_beacons(self, engine, node):
        cfg = engine.scenario
        self._beacon_interval = us(cfg.beacon_interval_s)
        self._beacon_jitter = us(cfg.beacon_jitter_s)
        self._beacon_size = cfg.beacon_size_bytes
        self.nbrs = NeighborTable(us(cfg.neighbor_timeout_s))

    def _start_beacons(self):
        first = round(self.engine.rng_beacon.uniform(0, self._beacon_interval))
        self.engine.schedule_beacon(self.node, self.engine.now + first)

    def on_beacon_tick(self):
        engine = self.engine
        pkt = Packet(
            uid=engine.next_uid(), kind=PacketKind.BEACON,
            origin=self.node, final_dst=-1, created_at=engine.now,
            ttl=1, size_bytes=self._beacon_size,
            src_pos=engine.position(self.node),
        )
        engine.broadcast(self.node, pkt)
        gap = self._beacon_interval
        if self._beacon_jitter > 0:
            gap += round(engine.rng_beacon.uniform(-self._beacon_jitter,
                                                   self._beacon_jitter))
        engine.schedule_beacon(self.node, engine.now + max(1, gap))

    def _on_beacon(self, pkt: Packet, sender: int):
        self.nbrs.update(sender, pkt.src_pos, self.engine.now)


class GpsrNode(BeaconMixin):
    """Per-node forwarding state: just the beacon-fed neighbor table."""

    def __init__(self, engine, node: int, perimeter_enabled: bool = True):
        self.engine = engine
        self.node = node
        self.perimeter_enabled = perimeter_enabled
        self._init_beacons(engine, node)

    def start(self) -> None:
        self._start_beacons()

    def on_timer(self, payload) -> None:  # no protocol timers beyond beacons
        pass

    def originate(self, pkt: Packet) -> None:
        if pkt.final_dst == self.node:
            self.engine.deliver(self.node, pkt)
            return
        pkt.geo = GeoHeader(dst_pos=self.engine.dst_position(pkt.final_dst))
        self.forward(pkt, arrived_from=None)

    def on_packet(self, pkt: Packet, sender: int) -> None:
        if pkt.kind is PacketKind.BEACON:
            self._on_beacon(pkt, sender)
        elif pkt.kind is PacketKind.DATA:
            self.forward(pkt, arrived_from=sender)

    def forward(self, pkt: Packet, arrived_from: int | None) -> None:
        engine = self.engine
        if pkt.final_dst == self.node:
            engine.deliver(self.node, pkt)
            return
        g = pkt.geo
        now = engine.now
        self_pos = engine.position(self.node)
        if (g.mode is GeoMode.PERIMETER
                and dist(self_pos, g.dst_pos) < dist(g.loc_entry, g.dst_pos)):
            # strictly closer than where the walk began: back to greedy
            g.mode = GeoMode.GREEDY
            g.loc_entry = None
            g.first_edge = None
        if pkt.ttl < 1:
            engine.drop(pkt, DropCause.TTL)
            return
        pkt.ttl -= 1
        for attempt in (0, 1):  # one retry after a link failure
            neighbors = self.nbrs.fresh(now)
            entered_here = False
            if g.mode is GeoMode.GREEDY:
                nh = greedy_next_hop(self_pos, neighbors, g.dst_pos)
                if nh is None:
                    if not self.perimeter_enabled:
                        engine.drop(pkt, DropCause.PERIMETER)
                        return
                    planar = planarize_gg(self_pos, neighbors)
                    nh = perimeter_next_hop(self_pos, planar, g.dst_pos, None)
                    if nh is None:
                        engine.drop(pkt, DropCause.PERIMETER)
                        return
                    g.mode = GeoMode.PERIMETER
                    g.loc_entry = self_pos
                    g.first_edge = (self.node, nh)
                    entered_here = True
            else:
                planar = planarize_gg(self_pos, neighbors)
                ref = g.dst_pos
                if arrived_from is not None:
                    e = self.nbrs.entries.get(arrived_from)
                    if e is not None:
                        ref = e.pos
                nh = perimeter_next_hop(self_pos, planar, ref, arrived_from)
                if nh is None:
                    engine.drop(pkt, DropCause.PERIMETER)
                    return
                if (self.node, nh) == g.first_edge:
                    # about to retrace the first perimeter edge: the face
                    # walk is exhausted and the destination unreachable
                    engine.drop(pkt, DropCause.PERIMETER)
                    return
            outcome = engine.unicast(self.node, nh, pkt)
            if outcome.status is TxStatus.DELIVERED:
                engine.note_hop(pkt, self.node, g.mode.value)
                return
            self.nbrs.evict(nh)
            if entered_here:  # failed on the entry edge: re-decide from greedy
                g.mode = GeoMode.GREEDY
                g.loc_entry = None
                g.first_edge = None
        engine.drop(pkt, DropCause.LINK_FAILURE)
