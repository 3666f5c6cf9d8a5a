"""Flat `key = value` scenario files and their validated in-memory form."""

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, ValidationError

PROTOCOLS = ("aodv", "gpsr", "crp", "gpsr_greedy_only")

_TRUE = {"on", "true", "yes", "1"}
_FALSE = {"off", "false", "no", "0"}


@dataclass
class Scenario:
    """One experiment description; every field has a documented default."""

    name: str = "scenario"
    n_nodes: int = 30
    area_width: float = 1000.0
    area_height: float = 1000.0
    protocol: str = "aodv"
    duration_s: float = 500.0
    seed: int = 1
    # radio
    radio_range: float = 250.0
    bandwidth_bps: float = 2_000_000.0
    processing_delay_s: float = 0.001
    jitter_max_s: float = 0.0
    # mobility (random waypoint)
    speed_mps: float = 20.0
    pause_s: float = 40.0
    # traffic
    n_streams: int = 20
    rate_pps: float = 4.0
    packet_size_bytes: int = 512
    traffic_start_window_s: float = 10.0
    # shared protocol knobs
    data_ttl: int = 32
    rreq_ttl: int = 32
    route_lifetime_s: float = 10.0
    discovery_retries: int = 2
    buffer_cap: int = 64
    control_size_bytes: int = 64
    hello_size_bytes: int = 32
    beacon_size_bytes: int = 32
    # protocol-specific toggles
    aodv_hello: bool = False
    hello_interval_s: float = 1.0
    beacon_interval_s: float = 1.0
    beacon_jitter_s: float = 0.25
    neighbor_timeout_s: float = 4.5
    perimeter_enabled: bool = True
    escape_cache: bool = True
    reanchor_on_route_loss: bool = True


_FIELDS = {f.name: f for f in dataclasses.fields(Scenario)}

_POSITIVE = [
    "n_nodes", "area_width", "area_height", "radio_range",
    "bandwidth_bps", "speed_mps", "n_streams", "rate_pps",
    "packet_size_bytes", "data_ttl", "rreq_ttl", "route_lifetime_s",
    "buffer_cap", "control_size_bytes", "hello_size_bytes",
    "beacon_size_bytes", "hello_interval_s", "beacon_interval_s",
    "neighbor_timeout_s",
]
_NON_NEGATIVE = [
    "seed", "duration_s", "processing_delay_s", "jitter_max_s", "pause_s",
    "traffic_start_window_s", "discovery_retries", "beacon_jitter_s",
]


def _convert(field_name: str, raw: str, line: int):
    ftype = _FIELDS[field_name].type
    raw = raw.strip()
    try:
        if ftype in (bool, "bool"):
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if ftype in (int, "int"):
            return int(raw)
        if ftype in (float, "float"):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ParseError(str(exc), line=line) from None


def parse_scenario(text: str, name: str | None = None) -> Scenario:
    """Parse and validate; unknown keys and malformed lines are rejected
    with their line number, bad values with the field name."""
    values = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw_line!r}", line=lineno)
        key, _, raw_value = line.partition("=")
        key = key.strip()
        if key not in _FIELDS:
            raise ParseError(f"unknown key {key!r}", line=lineno)
        values[key] = _convert(key, raw_value, lineno)
    if name is not None and "name" not in values:
        values["name"] = name
    scenario = Scenario(**values)
    validate_scenario(scenario)
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), name=path.stem)


def validate_scenario(sc: Scenario) -> None:
    if sc.protocol not in PROTOCOLS:
        raise ValidationError(
            f"unsupported protocol {sc.protocol!r}; choose one of {', '.join(PROTOCOLS)}",
            field="protocol")
    for fname in _POSITIVE:
        if getattr(sc, fname) <= 0:
            raise ValidationError("must be positive", field=fname)
    for fname in _NON_NEGATIVE:
        if getattr(sc, fname) < 0:
            raise ValidationError("must not be negative", field=fname)
    if sc.n_nodes < 2:
        raise ValidationError("need at least two nodes", field="n_nodes")


def format_scenario(sc: Scenario, comment: bool = False) -> str:
    """Render every resolved field as `key = value` lines (the output header
    echo); with comment=True each line is prefixed with '# '."""
    prefix = "# " if comment else ""
    lines = []
    for f in dataclasses.fields(Scenario):
        value = getattr(sc, f.name)
        if isinstance(value, bool):
            value = "on" if value else "off"
        lines.append(f"{prefix}{f.name} = {value}")
    return "\n".join(lines)
