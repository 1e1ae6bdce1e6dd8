"""Simulation-versus-model comparison and statistical validation helpers."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .model import Scheme, handover_failure_prob
from .params import SystemParameters
from .simulation import SimReport, analytic_expectations

__all__ = ["ComparisonRow", "empirical_vs_analytic", "format_comparison",
           "failure_probability_trial", "validate_failure_probability"]

# Default acceptance tolerance on the relative error, per metric. Advisory
# rows (None) are reported without a verdict: the crossing-rate formula is
# approximate and the loss/recovery windows include sampling effects the
# closed forms idealize away.
DEFAULT_TOLERANCES: dict[str, float | None] = {
    "latency": 0.03,
    "session_recovery": 0.15,
    "packet_loss": None,
    "signaling_cost": None,
    "crossing_rate": None,
    "mean_active_prefixes": None,
    "failure_prob": None,
}

_REL_FLOOR = 1e-12
_ABS_FLOOR = 1e-9  # one report quantum; differences below it count as zero


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    empirical: float | None
    analytic: float | None
    rel_error: float | None
    verdict: str  # "pass" | "fail" | "advisory" | "no data"


def _rel_error(sim: float, ana: float) -> float:
    if abs(sim - ana) < _ABS_FLOOR:
        return 0.0
    return abs(sim - ana) / max(abs(ana), _REL_FLOOR)


def empirical_vs_analytic(report: SimReport, p: SystemParameters,
                          scheme: Scheme,
                          tolerances: dict[str, float | None] | None = None,
                          ) -> list[ComparisonRow]:
    """Per-metric comparison of a simulation report with the closed forms.

    The analytic side is evaluated fresh from ``p`` and ``scheme`` so the
    comparison does not depend on what the report cached.
    """
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    ana = analytic_expectations(p, scheme)
    rows: list[ComparisonRow] = []
    if not report.records:
        return [ComparisonRow("handovers", 0.0, None, None, "no handovers")]

    empirical: dict[str, float | None] = {
        "latency": report.mean("latency"),
        "session_recovery": report.mean("session_recovery"),
        "packet_loss": report.mean("bytes_lost"),
        "signaling_cost": report.total_hop_bytes / report.duration,
        "crossing_rate": report.crossing_rate,
        "mean_active_prefixes": report.mean_active_prefixes,
        "failure_prob": report.failure_fraction,
    }
    for metric, sim_value in empirical.items():
        ana_value = ana.get(metric)
        if sim_value is None or ana_value is None:
            rows.append(ComparisonRow(metric, sim_value, ana_value, None,
                                      "no data"))
            continue
        rel = _rel_error(sim_value, ana_value)
        limit = tol.get(metric)
        if limit is None:
            verdict = "advisory"
        else:
            verdict = "pass" if rel <= limit else "fail"
        rows.append(ComparisonRow(metric, sim_value, ana_value, rel, verdict))
    return rows


def format_comparison(rows: list[ComparisonRow], scheme: Scheme) -> str:
    lines = [f"scheme={scheme}",
             f"{'metric':<22}{'simulated':>14}{'analytic':>14}"
             f"{'rel.err':>10}  verdict"]
    for r in rows:
        sim = "-" if r.empirical is None else f"{r.empirical:.6g}"
        ana = "-" if r.analytic is None else f"{r.analytic:.6g}"
        rel = "-" if r.rel_error is None else f"{r.rel_error:.2%}"
        lines.append(f"{r.metric:<22}{sim:>14}{ana:>14}{rel:>10}  {r.verdict}")
    return "\n".join(lines)


def failure_probability_trial(mu_sn: float, latency: float, trials: int,
                              seed: int) -> float:
    """Empirical fraction of exponential residences shorter than ``latency``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    short = sum(1 for _ in range(trials)
                if rng.expovariate(mu_sn) < latency)
    return short / trials


def validate_failure_probability(
        pairs: list[tuple[float, float]], trials: int = 10_000,
        seed: int = 7, sigma: float = 3.0) -> list[dict[str, float | bool]]:
    """Check the failure-probability closed form by direct sampling.

    For each (crossing rate, latency) pair, residence times are drawn
    exponentially and the empirical failure fraction is compared against the
    closed form within ``sigma`` binomial standard deviations.
    """
    results = []
    for i, (mu, hl) in enumerate(pairs):
        predicted = handover_failure_prob(mu, hl)
        empirical = failure_probability_trial(mu, hl, trials, seed + i)
        bound = sigma * math.sqrt(max(predicted * (1 - predicted), 1e-12)
                                  / trials)
        results.append({
            "mu_sn": mu, "latency": hl,
            "predicted": predicted, "empirical": empirical,
            "bound": bound, "ok": abs(empirical - predicted) <= bound,
        })
    return results
