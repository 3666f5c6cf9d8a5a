"""Wire-level packet and routing-header records shared by all protocols."""

from dataclasses import dataclass
from enum import Enum

from .core import SimTime
from .geometry import Position


class PacketKind(Enum):
    DATA = "data"
    RREQ = "rreq"
    RREP = "rrep"
    RERR = "rerr"
    BEACON = "beacon"
    HELLO = "hello"


class GeoMode(Enum):
    GREEDY = "greedy"
    PERIMETER = "perimeter"


class CrpMode(Enum):
    GEO_GREEDY = "geo_greedy"
    AODV_ROUTE = "aodv_route"


@dataclass
class AodvHeader:
    rreq_id: int      # per-origin flood identifier
    origin_seq: int
    dst_seq: int      # last known destination sequence number, 0 = unknown
    hop_count: int


@dataclass
class GeoHeader:
    dst_pos: Position             # frozen at origination, never updated en route
    mode: GeoMode = GeoMode.GREEDY
    loc_entry: Position | None = None          # where perimeter mode began
    first_edge: tuple[int, int] | None = None  # first perimeter edge taken


@dataclass
class CrpHeader:
    mode: CrpMode
    dst_pos: Position
    aodv: AodvHeader | None = None  # set while the packet rides a discovered route


@dataclass
class Packet:
    uid: int
    kind: PacketKind
    origin: int
    final_dst: int
    created_at: SimTime
    ttl: int
    size_bytes: int
    aodv: AodvHeader | None = None
    geo: GeoHeader | None = None
    crp: CrpHeader | None = None
    src_pos: Position | None = None  # beacon payload: advertised sender position
    rerr_dsts: tuple[tuple[int, int], ...] | None = None  # (dst, seq) pairs


def clone(pkt: Packet) -> Packet:
    """Per-receiver copy; headers are duplicated so receivers never alias.

    Built by hand rather than dataclasses.replace: this sits on the hot path
    (one call per delivered copy of every transmission).
    """
    a = pkt.aodv
    g = pkt.geo
    c = pkt.crp
    if a is not None:
        a = AodvHeader(a.rreq_id, a.origin_seq, a.dst_seq, a.hop_count)
    if g is not None:
        g = GeoHeader(g.dst_pos, g.mode, g.loc_entry, g.first_edge)
    if c is not None:
        ca = c.aodv
        if ca is not None:
            ca = AodvHeader(ca.rreq_id, ca.origin_seq, ca.dst_seq, ca.hop_count)
        c = CrpHeader(c.mode, c.dst_pos, ca)
    return Packet(pkt.uid, pkt.kind, pkt.origin, pkt.final_dst, pkt.created_at,
                  pkt.ttl, pkt.size_bytes, a, g, c, pkt.src_pos, pkt.rerr_dsts)
