"""Trend studies: the standard sweep suite and its qualitative checks.

Each study sweeps one parameter at the default operating point, renders the
curves and verifies the qualitative properties the model predicts there:
scheme orderings, flat curves, monotone trends and zero-loss regions.
Absolute curve values are configuration-dependent (hop counts most of all),
so the checks assert shapes, not pixel values.

Checks run against a result table's analytic columns, so they can also be
applied to previously written tables (``dmmlab report``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .model import Scheme, handover_initiation_time, wireless_control_delay
from .params import SystemParameters, defaults
from .sweeps import ResultTable, SweepSpec, point_params, run_sweep

__all__ = ["CheckResult", "Study", "StudyResult", "STUDIES", "run_study",
           "run_all_studies", "checks_for_table", "format_check_report"]

_EPS = 1e-12


@dataclass(frozen=True)
class CheckResult:
    study: str
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class Study:
    name: str
    spec: SweepSpec
    check: Callable[[ResultTable, SystemParameters], list[CheckResult]]


@dataclass
class StudyResult:
    name: str
    table: ResultTable
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _values(table: ResultTable, scheme: Scheme, metric: str) -> list[float]:
    return [v for _, v in table.series(scheme, metric, "analytic")]


def _flat(xs: list[float], tol: float = _EPS) -> bool:
    return bool(xs) and max(xs) - min(xs) <= tol


def _strictly_increasing(xs: list[float]) -> bool:
    return len(xs) > 1 and all(b > a for a, b in zip(xs, xs[1:]))


def _non_increasing(xs: list[float], tol: float = _EPS) -> bool:
    return all(b <= a + tol for a, b in zip(xs, xs[1:]))


# -- check functions ---------------------------------------------------------

def _check_radius_latency(table: ResultTable,
                          base: SystemParameters) -> list[CheckResult]:
    name = "radius_latency_recovery"
    pre = _values(table, Scheme.PRE_FDMM, "latency")
    re_ = _values(table, Scheme.RE_FDMM, "latency")
    dd = _values(table, Scheme.DDMM, "latency")
    return [
        CheckResult(name, "latency ordering pre < re < ddmm at every radius",
                    all(a < b < c for a, b, c in zip(pre, re_, dd)),
                    f"pre={pre[0]:.6f}s re={re_[0]:.6f}s ddmm={dd[0]:.6f}s"),
        CheckResult(name, "predictive latency flat across radius",
                    _flat(pre), f"spread={max(pre) - min(pre):.3e}s"),
        CheckResult(name, "recovery ordering pre < re < ddmm at every radius",
                    all(a < b < c for a, b, c in zip(
                        _values(table, Scheme.PRE_FDMM, "session_recovery"),
                        _values(table, Scheme.RE_FDMM, "session_recovery"),
                        _values(table, Scheme.DDMM, "session_recovery")))),
    ]


def _check_radius_loss(table: ResultTable,
                       base: SystemParameters) -> list[CheckResult]:
    name = "radius_packet_loss"
    pre = _values(table, Scheme.PRE_FDMM, "packet_loss")
    re_ = _values(table, Scheme.RE_FDMM, "packet_loss")
    dd = _values(table, Scheme.DDMM, "packet_loss")
    return [
        CheckResult(name, "predictive loss zero across radius (buffering)",
                    all(v == 0.0 for v in pre), f"max={max(pre):.3g}B"),
        CheckResult(name, "ddmm loss above reactive loss (longer recovery)",
                    all(d > r > 0 for d, r in zip(dd, re_))),
    ]


def _check_radius_failure_signaling(table: ResultTable,
                                    base: SystemParameters) -> list[CheckResult]:
    # Zone counts step with the packing pitch, so the crossing rate falls in
    # plateaus: assert a falling staircase, not strict pointwise decrease.
    name = "radius_failure_signaling"
    out = []
    for scheme in Scheme:
        fp = _values(table, scheme, "failure_prob")
        sc = _values(table, scheme, "signaling_cost")
        out.append(CheckResult(
            name, f"failure probability falls with radius ({scheme})",
            _non_increasing(fp) and fp[-1] < fp[0]))
        out.append(CheckResult(
            name, f"signaling cost falls with radius ({scheme})",
            _non_increasing(sc) and sc[-1] < sc[0]))
    return out


def _check_network_scale(table: ResultTable,
                         base: SystemParameters) -> list[CheckResult]:
    name = "network_scale_latency_loss"
    return [
        CheckResult(name, "ddmm latency flat in network scale",
                    _flat(_values(table, Scheme.DDMM, "latency"))),
        CheckResult(name, "predictive latency flat in network scale",
                    _flat(_values(table, Scheme.PRE_FDMM, "latency"))),
        CheckResult(name, "reactive latency grows with network scale",
                    _strictly_increasing(
                        _values(table, Scheme.RE_FDMM, "latency"))),
        CheckResult(name, "predictive loss zero across network scale",
                    all(v == 0.0 for v in
                        _values(table, Scheme.PRE_FDMM, "packet_loss"))),
        CheckResult(name, "ddmm and reactive loss grow with network scale",
                    _strictly_increasing(
                        _values(table, Scheme.DDMM, "packet_loss"))
                    and _strictly_increasing(
                        _values(table, Scheme.RE_FDMM, "packet_loss"))),
    ]


def _check_network_scale_signaling(table: ResultTable,
                                   base: SystemParameters) -> list[CheckResult]:
    name = "network_scale_signaling"
    return [
        CheckResult(name, "ddmm signaling flat in network scale",
                    _flat(_values(table, Scheme.DDMM, "signaling_cost"),
                          tol=1e-9)),
        CheckResult(name, "fast-mode signaling grows with network scale",
                    _strictly_increasing(
                        _values(table, Scheme.PRE_FDMM, "signaling_cost"))
                    and _strictly_increasing(
                        _values(table, Scheme.RE_FDMM, "signaling_cost"))),
    ]


def _check_wireless_failure(table: ResultTable,
                            base: SystemParameters) -> list[CheckResult]:
    name = "wireless_failure_latency_loss"
    grid = [r.value for r in table.select(Scheme.DDMM, "latency")]
    re_ = _values(table, Scheme.RE_FDMM, "latency")
    dd = _values(table, Scheme.DDMM, "latency")
    pre = _values(table, Scheme.PRE_FDMM, "latency")
    # The predictive closed form is constant only while the pre-handover
    # phase fits inside the link-down window; report where it does not,
    # instead of asserting blanket flatness.
    clamp_broken = []
    pre_in_clamp = []
    for v, lat in zip(grid, pre):
        p = point_params(base, "wireless_fail_prob", v)
        pre_phase = 2 * wireless_control_delay(p) + handover_initiation_time(p)
        if pre_phase <= p.phi:
            pre_in_clamp.append(lat)
        else:
            clamp_broken.append(v)
    return [
        CheckResult(name,
                    "reactive latency flat in wireless failure probability",
                    _flat(re_), f"spread={max(re_) - min(re_):.3e}s"),
        CheckResult(name,
                    "predictive latency flat where pre-phase fits the window",
                    _flat(pre_in_clamp),
                    "window exceeded at p="
                    + (",".join(f"{v:g}" for v in clamp_broken) or "none")),
        CheckResult(name,
                    "ddmm latency grows with wireless failure probability",
                    _strictly_increasing(dd)),
        CheckResult(name,
                    "ddmm and reactive loss grow with failure probability",
                    _strictly_increasing(
                        _values(table, Scheme.DDMM, "packet_loss"))
                    and _strictly_increasing(
                        _values(table, Scheme.RE_FDMM, "packet_loss"))),
    ]


def _check_speed(table: ResultTable,
                 base: SystemParameters) -> list[CheckResult]:
    name = "speed_failure_signaling"
    out = []
    for scheme in Scheme:
        fp = _values(table, scheme, "failure_prob")
        sc = _values(table, scheme, "signaling_cost")
        out.append(CheckResult(
            name,
            f"failure probability zero when parked, rising with speed "
            f"({scheme})",
            fp[0] == 0.0 and _strictly_increasing(fp)))
        out.append(CheckResult(
            name, f"signaling cost rises with speed ({scheme})",
            sc[0] == 0.0 and _strictly_increasing(sc)))
    return out


def _check_report_window(table: ResultTable,
                         base: SystemParameters) -> list[CheckResult]:
    name = "report_window_latency_loss"
    pre_lat = _values(table, Scheme.PRE_FDMM, "latency")
    pre_loss = _values(table, Scheme.PRE_FDMM, "packet_loss")
    return [
        CheckResult(name, "predictive latency shrinks as the window widens",
                    _non_increasing(pre_lat) and pre_lat[0] > pre_lat[-1]),
        CheckResult(name, "ddmm and reactive latency flat in the window",
                    _flat(_values(table, Scheme.DDMM, "latency"))
                    and _flat(_values(table, Scheme.RE_FDMM, "latency"))),
        CheckResult(name, "predictive loss fades to zero as the window widens",
                    _non_increasing(pre_loss, tol=1e-9)
                    and pre_loss[0] > 0 and pre_loss[-1] == 0.0),
    ]


def _check_prefix_lifetime(table: ResultTable,
                           base: SystemParameters) -> list[CheckResult]:
    name = "prefix_lifetime_signaling"
    dd = _values(table, Scheme.DDMM, "signaling_cost")
    pre = _values(table, Scheme.PRE_FDMM, "signaling_cost")
    re_ = _values(table, Scheme.RE_FDMM, "signaling_cost")

    def second_diffs(xs: list[float]) -> list[float]:
        return [c - 2 * b + a for a, b, c in zip(xs, xs[1:], xs[2:])]

    return [
        CheckResult(name, "ddmm signaling affine in the prefix count",
                    all(abs(d) <= 1e-9 for d in second_diffs(dd)),
                    f"max 2nd diff="
                    f"{max(abs(d) for d in second_diffs(dd)):.2e}"),
        CheckResult(name, "fast-mode signaling convex in the prefix count",
                    all(d > 0 for d in second_diffs(pre))
                    and all(d > 0 for d in second_diffs(re_))),
        CheckResult(name, "predictive costs more signaling than reactive",
                    all(a > b for a, b in zip(pre, re_))),
        CheckResult(name, "fast modes overtake ddmm at long prefix lifetimes",
                    pre[-1] > dd[-1] and re_[-1] > dd[-1]),
    ]


STUDIES: dict[str, Study] = {
    s.name: s for s in [
        Study("radius_latency_recovery",
              SweepSpec("mix_zone_radius",
                        tuple(float(r) for r in range(1000, 6001, 1000)),
                        metrics=("latency", "session_recovery")),
              _check_radius_latency),
        Study("radius_packet_loss",
              SweepSpec("mix_zone_radius",
                        tuple(float(r) for r in range(1000, 6001, 1000)),
                        metrics=("packet_loss",)),
              _check_radius_loss),
        Study("radius_failure_signaling",
              SweepSpec("mix_zone_radius",
                        tuple(float(r) for r in range(1000, 6001, 1000)),
                        metrics=("failure_prob", "signaling_cost")),
              _check_radius_failure_signaling),
        Study("network_scale_latency_loss",
              SweepSpec("network_scale",
                        tuple(round(0.1 * k, 10) for k in range(1, 11)),
                        metrics=("latency", "packet_loss")),
              _check_network_scale),
        Study("network_scale_signaling",
              SweepSpec("network_scale",
                        tuple(round(0.1 * k, 10) for k in range(1, 11)),
                        metrics=("signaling_cost",)),
              _check_network_scale_signaling),
        Study("wireless_failure_latency_loss",
              SweepSpec("wireless_fail_prob",
                        tuple(round(0.1 * k, 10) for k in range(1, 9)),
                        metrics=("latency", "packet_loss")),
              _check_wireless_failure),
        Study("speed_failure_signaling",
              SweepSpec("mean_speed",
                        tuple(float(v) for v in range(0, 101, 10)),
                        metrics=("failure_prob", "signaling_cost")),
              _check_speed),
        Study("report_window_latency_loss",
              SweepSpec("phi",
                        tuple(round(0.005 * k, 10) for k in range(1, 8)),
                        metrics=("latency", "packet_loss")),
              _check_report_window),
        Study("prefix_lifetime_signaling",
              SweepSpec("foreign_prefix_mean_lifetime",
                        tuple(225.0 + k * 75.0 for k in range(18)),
                        metrics=("signaling_cost",)),
              _check_prefix_lifetime),
    ]
}


def run_study(name: str, base: SystemParameters | None = None) -> StudyResult:
    if name not in STUDIES:
        raise ValueError(f"unknown study {name!r}")
    base = base or defaults()
    study = STUDIES[name]
    table = run_sweep(study.spec, base)
    return StudyResult(name, table, study.check(table, base))


def run_all_studies(base: SystemParameters | None = None) -> list[StudyResult]:
    return [run_study(name, base) for name in STUDIES]


def checks_for_table(table: ResultTable,
                     base: SystemParameters | None = None) -> list[CheckResult]:
    """Run every study check applicable to an existing table.

    A study applies when the table sweeps the same parameter and carries all
    the study's metrics with analytic values.
    """
    base = base or defaults()
    if not table.rows:
        return []
    param = table.rows[0].param
    metrics = set(r.metric for r in table.rows)
    has_analytic = any(r.analytic is not None for r in table.rows)
    results: list[CheckResult] = []
    if not has_analytic:
        return results
    for study in STUDIES.values():
        if study.spec.param == param and set(study.spec.metrics) <= metrics:
            results.extend(study.check(table, base))
    return results


def format_check_report(results: list[StudyResult]) -> str:
    lines = []
    for res in results:
        for c in res.checks:
            status = "PASS" if c.passed else "FAIL"
            detail = f"  [{c.detail}]" if c.detail else ""
            lines.append(f"{status}  {c.study}: {c.name}{detail}")
    total = sum(len(r.checks) for r in results)
    failed = sum(1 for r in results for c in r.checks if not c.passed)
    lines.append(f"{total - failed}/{total} checks passed")
    return "\n".join(lines)
