"""Rendering of sweep tables as vector plots (one SVG per metric)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .model import Scheme  # noqa: E402
from .sweeps import ResultTable  # noqa: E402

__all__ = ["plot_table", "PARAM_LABELS", "METRIC_LABELS"]

PARAM_LABELS = {
    "mix_zone_radius": "mix zone radius (m)",
    "network_scale": "network scale ratio",
    "wireless_fail_prob": "wireless failure probability",
    "mean_speed": "mean speed (m/s)",
    "phi": "report-to-link-down interval (s)",
    "foreign_prefix_mean_lifetime": "mean anchored-prefix lifetime (s)",
    "foreign_prefix_decay_rate": "anchored-prefix decay rate (1/s)",
    "-": "operating point",
}

METRIC_LABELS = {
    "latency": "handover latency (s)",
    "failure_prob": "handover failure probability",
    "session_recovery": "session recovery time (s)",
    "packet_loss": "packet loss (bytes per handover)",
    "signaling_cost": "signaling cost (bytes/s)",
}

_SCHEME_STYLE = {
    Scheme.DDMM: dict(color="#1f77b4", marker="o"),
    Scheme.PRE_FDMM: dict(color="#2ca02c", marker="s"),
    Scheme.RE_FDMM: dict(color="#d62728", marker="^"),
}


def plot_table(table: ResultTable, out_dir: str,
               stem: str = "sweep") -> list[str]:
    """Render one SVG per metric in ``table``; returns the written paths."""
    if not table.rows:
        raise ValueError("empty result table")
    os.makedirs(out_dir, exist_ok=True)
    param = table.rows[0].param
    xlabel = PARAM_LABELS.get(param, param)
    written: list[str] = []
    for metric in dict.fromkeys(r.metric for r in table.rows):
        fig, ax = plt.subplots(figsize=(6.4, 4.2))
        for scheme in dict.fromkeys(r.scheme for r in table.rows):
            style = _SCHEME_STYLE.get(scheme, {})
            ana = table.series(scheme, metric, "analytic")
            sim = table.series(scheme, metric, "sim_mean")
            if sim:
                xs, ys = zip(*sim)
                ax.plot(xs, ys, label=f"{scheme} (sim)",
                        linestyle="-", **style)
                if ana:
                    xs, ys = zip(*ana)
                    ax.plot(xs, ys, label=f"{scheme} (model)",
                            linestyle="--", markersize=0,
                            color=style.get("color"))
            elif ana:
                xs, ys = zip(*ana)
                ax.plot(xs, ys, label=str(scheme), linestyle="-", **style)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(METRIC_LABELS.get(metric, metric))
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = os.path.join(out_dir, f"{stem}_{metric}.svg")
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written
