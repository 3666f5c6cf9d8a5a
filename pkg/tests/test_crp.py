"""Hybrid protocol: greedy phase, anchored discovery, and the no-recovery rule."""

import re

from manet_lab.core import us
from manet_lab.engine import Engine
from manet_lab.geometry import Position
from manet_lab.scenario import Scenario

from conftest import (VOID_D, VOID_POSITIONS, VOID_S, VOID_X, cbr,
                      one_shot_stream, static_engine, trace_from_waypoints)


def test_dense_path_stays_greedy_with_zero_floods():
    positions = {0: Position(0, 0), 1: Position(200, 0), 2: Position(400, 0),
                 3: Position(600, 0)}
    engine = static_engine(positions, "crp", duration_s=10.0,
                           streams=[cbr(0, 3, start_s=5.0, interval_s=0.5,
                                        stop_s=8.0)])
    row = engine.run()
    assert row.delivered == row.sent == 7
    assert engine.metrics.transmissions_by_kind["rreq"] == 0
    assert engine.flood_log == []
    for hops in engine.hop_log.values():
        tags = {tag for (_, _, tag) in hops}
        assert "aodv_route" not in tags


def test_void_triggers_anchored_discovery_and_delivers(void_positions):
    engine = static_engine(void_positions, "crp", duration_s=15.0,
                           streams=[one_shot_stream(VOID_S, VOID_D, at_s=5.0)])
    row = engine.run()
    assert row.delivered == 1
    # the flood is anchored at the stuck node, not at the packet's source
    assert [(o, d) for (o, d, _t) in engine.flood_log] == [(VOID_X, VOID_D)]
    assert engine.metrics.transmissions_by_kind["rreq"] > 0
    assert engine.metrics.transmissions_by_kind["rerr"] == 0
    (uid, hops), = engine.hop_log.items()
    visited = [n for (n, _, tag) in hops if tag != "originated"]
    assert visited == [0, 1, 2, 3, 4, 5, 6, 7]


def test_mode_sequence_never_returns_to_greedy(void_positions):
    engine = static_engine(void_positions, "crp", duration_s=20.0,
                           streams=[cbr(VOID_S, VOID_D, start_s=5.0,
                                        interval_s=0.5, stop_s=12.0)])
    engine.run()
    assert engine.hop_log
    for uid, hops in engine.hop_log.items():
        tags = [tag for (_, _, tag) in hops
                if tag in ("geo_greedy", "aodv_route")]
        pattern = "".join("g" if t == "geo_greedy" else "a" for t in tags)
        assert re.fullmatch("g*a*", pattern), \
            f"uid {uid}: mode sequence {pattern} returned to greedy"


def test_escape_cache_amortizes_floods(void_positions):
    streams = [cbr(VOID_S, VOID_D, start_s=5.0, interval_s=0.5, stop_s=9.0)]
    cached = static_engine(void_positions, "crp", duration_s=15.0,
                           streams=streams)
    row = cached.run()
    assert row.delivered == row.sent == 9
    assert len(cached.flood_log) == 1, "later packets ride the cached route"

    uncached = static_engine(void_positions, "crp", duration_s=15.0,
                             streams=streams, escape_cache=False)
    row2 = uncached.run()
    assert row2.delivered == row2.sent == 9
    assert len(uncached.flood_log) == 9, "every packet refloods without the cache"


def test_beacon_overhead_identical_to_gpsr():
    # Same scenario and seed: beacon scheduling draws from the same stream,
    # so beacon counts agree between the two geographic protocols.
    gpsr_sc = Scenario(n_nodes=12, protocol="gpsr", duration_s=30.0, seed=77,
                       n_streams=2)
    crp_sc = Scenario(n_nodes=12, protocol="crp", duration_s=30.0, seed=77,
                      n_streams=2)
    gpsr_run = Engine(gpsr_sc)
    gpsr_run.run()
    crp_run = Engine(crp_sc)
    crp_run.run()
    assert gpsr_run.metrics.transmissions_by_kind["beacon"] == \
        crp_run.metrics.transmissions_by_kind["beacon"] > 0
    assert crp_run.metrics.transmissions_by_kind["hello"] == 0


def test_route_break_drops_exactly_one_packet_then_reanchors():
    # Two escape chains around a void; the first discovered relay leaves and
    # takes the active route with it. The in-flight packet is the only loss,
    # no error packets appear, and the next packet floods a fresh discovery
    # from the same anchor.
    positions = dict(VOID_POSITIONS)
    mirror = {3: Position(460.0, 290.0), 4: Position(600.0, 150.0),
              5: Position(800.0, 200.0), 6: Position(870.0, 350.0)}
    extra = {14: mirror[3], 15: mirror[4], 16: mirror[5], 17: mirror[6]}
    positions.update(extra)
    duration = 20.0
    traces = [trace_from_waypoints(n, duration, [(0.0, positions[n])])
              for n in sorted(positions)]
    # u1 (id 3) carries the first escape route, then leaves abruptly
    traces[3] = trace_from_waypoints(
        3, duration, [(0.0, positions[3]), (6.2, positions[3]),
                      (6.3, Position(100.0, 900.0))])
    sc = Scenario(n_nodes=len(positions), protocol="crp", duration_s=duration,
                  seed=11, pause_s=duration, n_streams=1)
    engine = Engine(sc, traces=traces,
                    streams=[cbr(VOID_S, VOID_D, start_s=5.0, interval_s=0.5,
                                 stop_s=12.0)],
                    record_hops=True)
    row = engine.run()
    assert row.sent == 15
    assert row.drops["link_failure"] == 1, "no-recovery loses only the in-flight packet"
    assert row.delivered == 14
    assert engine.metrics.transmissions_by_kind["rerr"] == 0
    anchors = [o for (o, _d, _t) in engine.flood_log]
    assert anchors == [VOID_X, VOID_X], "rediscovery re-anchors at the stuck node"


def test_greedy_mode_break_follows_retry_rule_not_drop():
    # In the greedy phase a dead link is a neighbor eviction plus one retry,
    # exactly like plain geographic forwarding.
    positions = {0: Position(0, 0), 1: Position(200, 0), 2: Position(400, 0),
                 3: Position(400, 150), 4: Position(600, 0)}
    duration = 20.0
    traces = [trace_from_waypoints(n, duration, [(0.0, positions[n])])
              for n in range(5)]
    traces[2] = trace_from_waypoints(2, duration,
                                     [(0.0, positions[2]), (6.2, positions[2]),
                                      (6.3, Position(400, 900))])
    sc = Scenario(n_nodes=5, protocol="crp", duration_s=duration, seed=13,
                  pause_s=duration, n_streams=1)
    engine = Engine(sc, traces=traces,
                    streams=[cbr(0, 4, start_s=5.0, interval_s=0.5, stop_s=12.0)],
                    record_hops=True)
    row = engine.run()
    assert row.delivered == row.sent
    assert row.drops["link_failure"] == 0
    assert engine.metrics.transmissions_by_kind["rerr"] == 0
    assert engine.metrics.transmissions_by_kind["rreq"] == 0


def test_partitioned_destination_times_out_with_bounded_floods():
    positions = {0: Position(0, 0), 1: Position(200, 0), 2: Position(350, 0),
                 3: Position(900, 900)}
    engine = static_engine(positions, "crp", duration_s=10.0,
                           streams=[one_shot_stream(0, 3, at_s=2.0)])
    row = engine.run()
    assert row.delivered == 0
    assert row.drops["discovery_timeout"] == 1
    assert len(engine.flood_log) == 3  # initial + two retries
    assert engine.metrics.transmissions_by_kind["rerr"] == 0


def test_source_at_local_maximum_floods_from_itself(void_positions):
    # A packet originated at the stuck node itself anchors the flood there.
    engine = static_engine(void_positions, "crp", duration_s=12.0,
                           streams=[one_shot_stream(VOID_X, VOID_D, at_s=5.0)])
    row = engine.run()
    assert row.delivered == 1
    assert [(o, d) for (o, d, _t) in engine.flood_log] == [(VOID_X, VOID_D)]


def test_reanchor_toggle_controls_route_loss_behavior(void_positions):
    # A packet in route mode reaching a node with no live entry either
    # re-anchors a discovery there (default) or dies (toggle off).
    from manet_lab.packets import CrpHeader, CrpMode, Packet, PacketKind

    def routeless_packet(engine, uid):
        pkt = Packet(uid=uid, kind=PacketKind.DATA, origin=VOID_S,
                     final_dst=VOID_D, created_at=0, ttl=32, size_bytes=512)
        pkt.crp = CrpHeader(mode=CrpMode.AODV_ROUTE,
                            dst_pos=void_positions[VOID_D])
        engine.metrics.record_origination(uid, 0)
        return pkt

    on = static_engine(void_positions, "crp", duration_s=5.0, streams=[])
    on.protocols[VOID_X].forward(routeless_packet(on, 0))
    assert [(o, d) for (o, d, _t) in on.flood_log] == [(VOID_X, VOID_D)]
    assert on.metrics.drops.get("link_failure", 0) == 0

    off = static_engine(void_positions, "crp", duration_s=5.0, streams=[],
                        reanchor_on_route_loss=False)
    off.protocols[VOID_X].forward(routeless_packet(off, 0))
    assert off.flood_log == []
    assert off.metrics.drops["link_failure"] == 1
