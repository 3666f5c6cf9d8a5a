"""Replication sweeps over one scenario axis, with CSV and table emission."""

import dataclasses
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .engine import run_one
from .errors import ValidationError
from .metrics import MetricsRow
from .scenario import PROTOCOLS, Scenario, validate_scenario

AXIS_FIELDS = {
    "rate": "rate_pps",
    "pause": "pause_s",
    "n_nodes": "n_nodes",
    "protocol": "protocol",
}


@dataclass
class SweepPlan:
    base: Scenario
    axis: str
    values: list
    replications: int
    protocols: list[str] | None = None  # defaults to [base.protocol]

    def __post_init__(self):
        if self.axis not in AXIS_FIELDS:
            raise ValidationError(
                f"unknown axis {self.axis!r}; one of {', '.join(AXIS_FIELDS)}",
                field="axis")
        if self.replications < 1:
            raise ValidationError("need at least one replication",
                                  field="replications")
        if not self.values:
            raise ValidationError("need at least one value", field="values")


def plan_cells(plan: SweepPlan) -> list[Scenario]:
    """Expand the plan into concrete scenarios: every axis value, protocol,
    and replication; replication k runs with seed base.seed + k so all
    protocols in a cell share mobility and traffic."""
    field = AXIS_FIELDS[plan.axis]
    ftype = {f.name: f.type for f in dataclasses.fields(Scenario)}[field]
    protocols = plan.protocols or [plan.base.protocol]
    if plan.axis == "protocol":
        protocols = [None]
    cells = []
    for value in plan.values:
        if ftype in (int, "int"):
            value = int(value)
        elif ftype in (float, "float"):
            value = float(value)
        for proto in protocols:
            for rep in range(plan.replications):
                overrides = {
                    field: value,
                    "seed": plan.base.seed + rep,
                    "name": f"{plan.axis}={value}",
                }
                if proto is not None:
                    overrides["protocol"] = proto
                sc = dataclasses.replace(plan.base, **overrides)
                validate_scenario(sc)
                cells.append(sc)
    return cells


def _run_cell(sc: Scenario):
    try:
        return run_one(sc), None
    except Exception as exc:  # failed cell is recorded, not fatal
        return None, f"{sc.name} protocol={sc.protocol} seed={sc.seed}: {exc!r}"


def resolve_jobs(jobs: int | None) -> int:
    if jobs is not None:
        return max(1, jobs)
    env = os.environ.get("MANET_LAB_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def run_sweep(plan: SweepPlan, jobs: int | None = None
              ) -> tuple[list[MetricsRow], list[str]]:
    """Run every cell; returns (rows, failure messages). Rows come back in
    plan order regardless of worker scheduling."""
    cells = plan_cells(plan)
    jobs = resolve_jobs(jobs)
    rows: list[MetricsRow] = []
    failures: list[str] = []
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(sc) for sc in cells]
    for row, err in results:
        if err is not None:
            failures.append(err)
        else:
            rows.append(row)
    return rows, failures


def write_csv(rows: list[MetricsRow], path: str | Path) -> None:
    lines = [MetricsRow.csv_header()]
    lines += [row.to_csv_row() for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path: str | Path) -> list[MetricsRow]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != MetricsRow.csv_header():
        raise ValueError("unrecognized results header")
    return [MetricsRow.from_csv_row(line) for line in lines[1:] if line]


def emit(rows: list[MetricsRow], fmt: str, out_dir: str | Path) -> Path:
    """Write results under out_dir: fmt 'csv' gives results.csv, 'table'
    gives the aggregated mean/stddev text as results.txt."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path = out_dir / "results.csv"
        write_csv(rows, path)
    elif fmt == "table":
        path = out_dir / "results.txt"
        path.write_text(render_table(aggregate(rows)))
    else:
        raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'table'")
    return path


def _mean_std(values: list[float]) -> tuple[float, float]:
    mean = sum(values) / len(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


def aggregate(rows: list[MetricsRow]) -> dict:
    """Per-(scenario_id, protocol) mean and sample stddev of the three
    reported metrics, replications collapsed."""
    groups: dict[tuple[str, str], list[MetricsRow]] = {}
    for row in rows:
        groups.setdefault((row.scenario_id, row.protocol), []).append(row)
    table = {}
    for key, members in groups.items():
        ratios = [m.delivery_ratio for m in members]
        delays = [m.mean_delay_ms for m in members if m.mean_delay_ms is not None]
        overhead = [float(m.transmissions_total) for m in members]
        table[key] = {
            "n": len(members),
            "delivery_ratio": _mean_std(ratios),
            "mean_delay_ms": _mean_std(delays) if delays else None,
            "transmissions": _mean_std(overhead),
        }
    return table


def render_table(table: dict) -> str:
    """Aligned text: one block per metric, rows = scenario cells,
    columns = protocols. delivery_ratio is the count ratio also known
    as throughput."""
    cells = sorted({k[0] for k in table})
    protocols = sorted({k[1] for k in table},
                       key=lambda p: PROTOCOLS.index(p) if p in PROTOCOLS else 99)
    blocks = []
    metric_specs = [
        ("delivery_ratio (throughput)", "delivery_ratio", "{:.4f}"),
        ("mean_delay_ms", "mean_delay_ms", "{:.3f}"),
        ("transmissions_total", "transmissions", "{:.1f}"),
    ]
    width = max([14] + [len(p) + 18 for p in protocols])
    label_w = max([10] + [len(c) for c in cells]) + 2
    for title, field, fmt in metric_specs:
        lines = [title]
        header = " " * label_w + "".join(p.ljust(width) for p in protocols)
        lines.append(header)
        for cell in cells:
            parts = [cell.ljust(label_w)]
            for proto in protocols:
                stats = table.get((cell, proto))
                if stats is None or stats[field] is None:
                    parts.append("-".ljust(width))
                    continue
                mean, std = stats[field]
                parts.append(f"{fmt.format(mean)} ± {fmt.format(std)}".ljust(width))
            lines.append("".join(parts))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
