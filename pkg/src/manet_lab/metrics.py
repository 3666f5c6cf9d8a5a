"""Run-level counters and the per-run results row.

Counting conventions: a broadcast is one transmission no matter how many
receivers it reaches, every forwarding hop is another transmission, and a
failed unicast still counts (the attempt consumed the channel). `sent` counts
originated data packets only; control traffic shows up solely in
transmissions_total. Every originated uid ends in exactly one bucket:
delivered, dropped with a cause, or in flight when the run ends.
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .core import SimTime
from .errors import AccountingError, DuplicateDelivery
from .packets import PacketKind


class DropCause(Enum):
    TTL = "ttl"
    LINK_FAILURE = "link_failure"
    DISCOVERY_TIMEOUT = "discovery_timeout"
    BUFFER = "buffer"
    PERIMETER = "perimeter_exhausted"


DROP_KEYS = [c.value for c in DropCause]

# Exact emission order of the results schema. delivery_ratio is the count
# ratio sometimes reported as "throughput".
CSV_COLUMNS = [
    "protocol", "scenario_id", "seed", "n_nodes", "pause_s", "rate_pps",
    "sent", "delivered", "delivery_ratio", "mean_delay_ms",
    "transmissions_total",
    "drop_ttl", "drop_link", "drop_timeout", "drop_buffer", "drop_perimeter",
]

_DROP_COLUMN_TO_CAUSE = {
    "drop_ttl": DropCause.TTL.value,
    "drop_link": DropCause.LINK_FAILURE.value,
    "drop_timeout": DropCause.DISCOVERY_TIMEOUT.value,
    "drop_buffer": DropCause.BUFFER.value,
    "drop_perimeter": DropCause.PERIMETER.value,
}


@dataclass
class MetricsRow:
    protocol: str
    scenario_id: str
    seed: int
    n_nodes: int
    pause_s: float
    rate_pps: float
    sent: int
    delivered: int
    delivery_ratio: float
    mean_delay_ms: float | None
    transmissions_total: int
    drops: dict[str, int]
    in_flight: int = 0

    def to_csv_row(self) -> str:
        delay = "" if self.mean_delay_ms is None else repr(self.mean_delay_ms)
        fields = [
            self.protocol, self.scenario_id, str(self.seed), str(self.n_nodes),
            repr(self.pause_s), repr(self.rate_pps),
            str(self.sent), str(self.delivered), repr(self.delivery_ratio), delay,
            str(self.transmissions_total),
        ]
        fields += [str(self.drops[_DROP_COLUMN_TO_CAUSE[col]]) for col in CSV_COLUMNS[11:]]
        return ",".join(fields)

    @staticmethod
    def csv_header() -> str:
        return ",".join(CSV_COLUMNS)

    @staticmethod
    def from_csv_row(line: str) -> "MetricsRow":
        parts = line.rstrip("\n").split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(f"expected {len(CSV_COLUMNS)} fields, got {len(parts)}")
        drops = {_DROP_COLUMN_TO_CAUSE[col]: int(v)
                 for col, v in zip(CSV_COLUMNS[11:], parts[11:])}
        sent = int(parts[6])
        delivered = int(parts[7])
        row = MetricsRow(
            protocol=parts[0], scenario_id=parts[1], seed=int(parts[2]),
            n_nodes=int(parts[3]), pause_s=float(parts[4]), rate_pps=float(parts[5]),
            sent=sent, delivered=delivered, delivery_ratio=float(parts[8]),
            mean_delay_ms=None if parts[9] == "" else float(parts[9]),
            transmissions_total=int(parts[10]), drops=drops,
        )
        row.in_flight = sent - delivered - sum(drops.values())
        return row


class RunMetrics:
    """Counters owned by one run's event loop.

    With record_log=True every call is also appended to a flat event log;
    feeding that log through `RunMetrics.from_log` reproduces the counters
    exactly, which is how the replay tests pin the accounting down.
    """

    def __init__(self, record_log: bool = False):
        self.sent = 0
        self.delivered = 0
        self.transmissions_total = 0
        self.transmissions_by_kind: Counter = Counter()
        self.drops: Counter = Counter()
        self.diagnostics: Counter = Counter()
        self._delay_sum_us = 0
        self._outstanding: set[int] = set()
        self._delivered_uids: set[int] = set()
        self.log: list[tuple] | None = [] if record_log else None

    def record_origination(self, uid: int, now: SimTime) -> None:
        self.sent += 1
        self._outstanding.add(uid)
        if self.log is not None:
            self.log.append(("orig", uid, now))

    def record_transmission(self, kind: PacketKind, is_broadcast: bool) -> None:
        self.transmissions_total += 1
        self.transmissions_by_kind[kind.value] += 1
        if self.log is not None:
            self.log.append(("tx", kind.value, is_broadcast))

    def record_delivery(self, uid: int, created_at: SimTime, now: SimTime) -> None:
        if uid in self._delivered_uids:
            raise DuplicateDelivery(f"uid {uid} delivered twice")
        if uid not in self._outstanding:
            raise AccountingError(f"delivery of unknown or already-terminal uid {uid}")
        self._outstanding.discard(uid)
        self._delivered_uids.add(uid)
        self.delivered += 1
        self._delay_sum_us += now - created_at
        if self.log is not None:
            self.log.append(("dlv", uid, created_at, now))

    def record_drop(self, uid: int, cause: DropCause) -> None:
        if uid not in self._outstanding:
            raise AccountingError(f"drop of unknown or already-terminal uid {uid}")
        self._outstanding.discard(uid)
        self.drops[cause.value] += 1
        if self.log is not None:
            self.log.append(("drop", uid, cause.value))

    def note_diagnostic(self, label: str) -> None:
        """Control-plane oddities (dropped RREPs, failed control unicasts)."""
        self.diagnostics[label] += 1
        if self.log is not None:
            self.log.append(("diag", label))

    @property
    def in_flight(self) -> int:
        return len(self._outstanding)

    def mean_delay_ms(self) -> float | None:
        if self.delivered == 0:
            return None
        return self._delay_sum_us / self.delivered / 1000.0

    @classmethod
    def from_log(cls, log: list[tuple]) -> "RunMetrics":
        m = cls()
        for entry in log:
            tag = entry[0]
            if tag == "orig":
                m.record_origination(entry[1], entry[2])
            elif tag == "tx":
                m.record_transmission(PacketKind(entry[1]), entry[2])
            elif tag == "dlv":
                m.record_delivery(entry[1], entry[2], entry[3])
            elif tag == "drop":
                m.record_drop(entry[1], DropCause(entry[2]))
            elif tag == "diag":
                m.note_diagnostic(entry[1])
            else:
                raise AccountingError(f"unknown log entry {entry!r}")
        return m

    def finalize(self, protocol: str, scenario_id: str, seed: int,
                 n_nodes: int, pause_s: float, rate_pps: float) -> MetricsRow:
        ratio = self.delivered / self.sent if self.sent else 0.0
        drops = {key: self.drops.get(key, 0) for key in DROP_KEYS}
        return MetricsRow(
            protocol=protocol, scenario_id=scenario_id, seed=seed,
            n_nodes=n_nodes, pause_s=pause_s, rate_pps=rate_pps,
            sent=self.sent, delivered=self.delivered, delivery_ratio=ratio,
            mean_delay_ms=self.mean_delay_ms(),
            transmissions_total=self.transmissions_total,
            drops=drops, in_flight=self.in_flight,
        )
