"""Parameter sweeps: evaluate the model and/or the simulator over a grid.

A sweep varies one parameter over a list of values and evaluates the chosen
metrics for the chosen schemes, analytically and/or by seeded simulation.
Results land in a flat, deterministically ordered table (one row per value,
scheme and metric) written as CSV.
"""

from __future__ import annotations

import csv
import io
import math
import os
import statistics
from dataclasses import dataclass, field, fields as dc_fields

from . import model, simulation
from .model import METRICS, Scheme
from .params import (SCENARIO_ALIASES, SystemParameters, apply_overrides,
                     defaults)

__all__ = ["SweepSpec", "ResultRow", "ResultTable", "run_sweep",
           "write_csv", "read_csv", "parse_sweep_arg", "SWEEPABLE"]

CSV_COLUMNS = ("param", "value", "scheme", "metric", "analytic",
               "sim_mean", "sim_stderr", "n", "rel_error", "note")

_REL_FLOOR = 1e-12
_ABS_FLOOR = 1e-9

# Sweepable names: every parameter field plus the lifetime alias.
SWEEPABLE = {f.name for f in dc_fields(SystemParameters)} \
    | {"foreign_prefix_mean_lifetime"} | set(SCENARIO_ALIASES)


@dataclass(frozen=True)
class SweepSpec:
    """What to vary, what to evaluate, and how."""

    param: str | None                   # None: single point at the base params
    values: tuple[float, ...] = ()
    schemes: tuple[Scheme, ...] = tuple(Scheme)
    metrics: tuple[str, ...] = METRICS
    mode: str = "analytic"              # analytic | simulate | both
    seeds: tuple[int, ...] = (1,)
    duration: float = 7200.0
    fleet: int = 1

    def __post_init__(self) -> None:
        if self.param is not None and self.param not in SWEEPABLE:
            raise ValueError(f"{self.param!r} is not a sweepable parameter")
        if self.mode not in ("analytic", "simulate", "both"):
            raise ValueError(f"bad mode {self.mode!r}")
        unknown = set(self.metrics) - set(METRICS)
        if unknown:
            raise ValueError(f"unknown metric(s): {', '.join(sorted(unknown))}")
        if self.param is not None and not self.values:
            raise ValueError("sweep needs at least one value")


@dataclass
class ResultRow:
    param: str
    value: float
    scheme: Scheme
    metric: str
    analytic: float | None = None
    sim_mean: float | None = None
    sim_stderr: float | None = None
    n: int = 0
    note: str = ""

    @property
    def rel_error(self) -> float | None:
        if self.analytic is None or self.sim_mean is None:
            return None
        if abs(self.sim_mean - self.analytic) < _ABS_FLOOR:
            return 0.0
        return abs(self.sim_mean - self.analytic) \
            / max(abs(self.analytic), _REL_FLOOR)


@dataclass
class ResultTable:
    spec: SweepSpec
    rows: list[ResultRow] = field(default_factory=list)

    def select(self, scheme: Scheme | None = None,
               metric: str | None = None) -> list[ResultRow]:
        return [r for r in self.rows
                if (scheme is None or r.scheme == scheme)
                and (metric is None or r.metric == metric)]

    def series(self, scheme: Scheme, metric: str,
               column: str = "analytic") -> list[tuple[float, float]]:
        out = []
        for r in self.select(scheme, metric):
            v = getattr(r, column)
            if v is not None:
                out.append((r.value, v))
        return out


def point_params(base: SystemParameters, param: str | None,
                 value: float | None) -> SystemParameters:
    """Base parameters with one sweep value applied.

    The lifetime alias sets the decay rate reciprocally. Zone counts and the
    derived zone-to-zone hop count refresh as usual; k1/k2 stay pinned at
    the base values so radius sweeps hold k fixed (the intended reading of
    the radius studies).
    """
    if param is None or value is None:
        return base
    if param == "foreign_prefix_mean_lifetime":
        return apply_overrides(base,
                               {"foreign_prefix_decay_rate": 1.0 / value})
    param = SCENARIO_ALIASES.get(param, param)
    return apply_overrides(base, {param: value})


def _analytic_metrics(p: SystemParameters, scheme: Scheme) -> dict[str, float]:
    m = model.evaluate(p, scheme)
    return {
        "latency": m.handover_latency,
        "failure_prob": m.failure_prob,
        "session_recovery": m.session_recovery,
        "packet_loss": m.packet_loss,
        "signaling_cost": m.signaling_cost,
    }


def _sim_metrics(report: simulation.SimReport) -> dict[str, float | None]:
    return {
        "latency": report.mean("latency"),
        "failure_prob": report.failure_fraction if report.records else None,
        "session_recovery": report.mean("session_recovery"),
        "packet_loss": report.mean("bytes_lost"),
        "signaling_cost": (report.total_hop_bytes / report.duration
                           if report.duration else None),
    }


def _stderr(values: list[float]) -> float | None:
    if len(values) < 2:
        return None
    return statistics.stdev(values) / math.sqrt(len(values))


def run_sweep(spec: SweepSpec, base: SystemParameters | None = None,
              trace_dir: str | None = None) -> ResultTable:
    """Evaluate the sweep; deterministic row order (value, scheme, metric).

    With ``trace_dir`` set, each simulated cell writes an event trace file
    there (scheme, value and seed in the name).
    """
    base = base or defaults()
    values = spec.values if spec.param is not None else (math.nan,)
    table = ResultTable(spec)
    for value in values:
        p = point_params(base, spec.param,
                         None if spec.param is None else value)
        for scheme in spec.schemes:
            analytic: dict[str, float | None]
            note = ""
            if spec.mode in ("analytic", "both"):
                try:
                    analytic = dict(_analytic_metrics(p, scheme))
                except model.ModelDomainError as exc:
                    analytic = {m: None for m in METRICS}
                    note = f"analytic domain error: {exc}"
            else:
                analytic = {m: None for m in METRICS}
            sim: dict[str, float | None] = {m: None for m in METRICS}
            stderr: dict[str, float | None] = {m: None for m in METRICS}
            n = 0
            if spec.mode in ("simulate", "both"):
                per_seed: dict[str, list[float]] = {m: [] for m in METRICS}
                merged: simulation.SimReport | None = None
                for seed in spec.seeds:
                    trace_path = None
                    if trace_dir is not None:
                        tag = "point" if spec.param is None else f"{value:g}"
                        trace_path = os.path.join(
                            trace_dir, f"trace_{scheme}_{tag}_s{seed}.tsv")
                    rep = simulation.run(p, scheme, seed, spec.duration,
                                         fleet=spec.fleet,
                                         trace_path=trace_path)
                    merged = rep if merged is None else merged.merged_with(rep)
                    for m, v in _sim_metrics(rep).items():
                        if v is not None:
                            per_seed[m].append(v)
                assert merged is not None
                n = merged.handovers
                if n == 0:
                    note = (note + "; " if note else "") + "insufficient events"
                else:
                    for m in METRICS:
                        vals = per_seed[m]
                        sim[m] = (_sim_metrics(merged)[m])
                        stderr[m] = _stderr(vals)
            for metric in spec.metrics:
                table.rows.append(ResultRow(
                    param=spec.param or "-",
                    value=value, scheme=scheme, metric=metric,
                    analytic=analytic.get(metric),
                    sim_mean=sim.get(metric),
                    sim_stderr=stderr.get(metric),
                    n=n, note=note))
    return table


def write_csv(table: ResultTable, stream: io.TextIOBase | None = None) -> str:
    """Write the table as CSV; returns the text (and writes to ``stream``)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)

    def fmt(x: float | None) -> str:
        return "" if x is None else repr(x)

    for r in table.rows:
        writer.writerow([
            r.param, repr(r.value), str(r.scheme), r.metric,
            fmt(r.analytic), fmt(r.sim_mean), fmt(r.sim_stderr),
            r.n if r.n else "", fmt(r.rel_error), r.note,
        ])
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def read_csv(text: str) -> ResultTable:
    """Parse a table previously written by :func:`write_csv`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise ValueError("not a dmmlab result table")
    rows: list[ResultRow] = []
    params = set()
    for rec in reader:
        (param, value, scheme, metric, analytic, sim_mean, sim_stderr,
         n, _rel, note) = rec
        params.add(param)
        rows.append(ResultRow(
            param=param, value=float(value), scheme=Scheme(scheme),
            metric=metric,
            analytic=float(analytic) if analytic else None,
            sim_mean=float(sim_mean) if sim_mean else None,
            sim_stderr=float(sim_stderr) if sim_stderr else None,
            n=int(n) if n else 0, note=note))
    param = params.pop() if len(params) == 1 else None
    schemes = tuple(dict.fromkeys(r.scheme for r in rows)) or tuple(Scheme)
    metrics = tuple(dict.fromkeys(r.metric for r in rows)) or METRICS
    values = tuple(dict.fromkeys(r.value for r in rows))
    spec = SweepSpec(param=None if param in (None, "-") else param,
                     values=values if param not in (None, "-") else (),
                     schemes=schemes, metrics=metrics)
    table = ResultTable(spec)
    table.rows = rows
    return table


def parse_sweep_arg(arg: str) -> tuple[str, tuple[float, ...]]:
    """Parse ``name=lo:hi:step`` or ``name=v1,v2,...`` sweep syntax."""
    if "=" not in arg:
        raise ValueError("sweep must look like param=lo:hi:step or param=v1,v2")
    name, _, rhs = arg.partition("=")
    name = name.strip()
    rhs = rhs.strip()
    if not rhs:
        raise ValueError("sweep needs values")
    if ":" in rhs:
        parts = rhs.split(":")
        if len(parts) != 3:
            raise ValueError("range sweep must be lo:hi:step")
        lo, hi, step = (float(x) for x in parts)
        if step <= 0 or hi < lo:
            raise ValueError("bad sweep range")
        values = []
        k = 0
        while True:
            v = lo + k * step
            if v > hi + 1e-9 * max(1.0, abs(hi)):
                break
            values.append(v)
            k += 1
        return name, tuple(values)
    return name, tuple(float(x) for x in rhs.split(","))
