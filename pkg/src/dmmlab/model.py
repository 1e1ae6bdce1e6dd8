"""Closed-form performance model for the three handover schemes.

Pure functions over :class:`~dmmlab.params.SystemParameters`: mobility
statistics of the grid-road random-destination movement model, the active
prefix population, and per-scheme handover latency, handover failure
probability, session recovery time, packet loss and signaling cost.

Schemes:

* ``DDMM``     - plain distributed mobility management: the mobile re-attaches,
  authenticates, and re-registers through the location/binding server before
  traffic resumes.
* ``PRE_FDMM`` - predictive fast handover: the serving zone prepares the
  target zone (tunnel + new prefix) while the old link is still up.
* ``RE_FDMM``  - reactive fast handover: context is pulled from the previous
  zone after re-attachment, bypassing the binding server on the critical path.

All functions are deterministic and side-effect free; identical inputs give
bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .params import SystemParameters, derive_topology_counts

__all__ = [
    "Scheme",
    "ModelDomainError",
    "MobilityStats",
    "PrefixStats",
    "LinkSpec",
    "SchemeMetrics",
    "mobility_stats",
    "expected_zone_crossings",
    "prefix_stats",
    "geometric_handover_pmf",
    "link_delay",
    "wireless_control_delay",
    "wireless_data_delay",
    "server_control_delay",
    "zone_control_delay",
    "zone_data_delay",
    "handover_initiation_time",
    "handover_latency",
    "handover_failure_prob",
    "session_recovery",
    "packet_loss",
    "signaling_cost",
    "triangular_hop_sum",
    "evaluate",
    "METRICS",
]


class Scheme(str, Enum):
    """Handover scheme selector."""

    DDMM = "ddmm"
    PRE_FDMM = "pre-fdmm"
    RE_FDMM = "re-fdmm"

    def __str__(self) -> str:  # keep CLI/CSV output compact
        return self.value


METRICS = (
    "latency",
    "failure_prob",
    "session_recovery",
    "packet_loss",
    "signaling_cost",
)


class ModelDomainError(ValueError):
    """Inputs outside the model's domain (e.g. non-positive crossing count)."""


@dataclass(frozen=True)
class MobilityStats:
    """Movement statistics of the road-grid mobility model."""

    epoch_length: float       # m, mean distance of one move cycle
    epoch_time: float         # s, mean travel time of one move cycle
    pause_time: float         # s, mean pause at a destination
    expected_crossings: float  # zone boundaries crossed per epoch
    residence_time: float     # s, mean time spent inside one zone
    crossing_rate: float      # 1/s, zone crossings per second


@dataclass(frozen=True)
class PrefixStats:
    """Active prefix population at handover time."""

    mean_active_prefixes: float    # current prefix plus live anchored ones
    mean_anchored_prefixes: float
    handover_survival_prob: float  # an anchored prefix outliving one residence
    mean_prefix_lifetime: float    # s


@dataclass(frozen=True)
class LinkSpec:
    """One-way transfer description used by the delay closed form."""

    packet_size: int      # bytes
    bandwidth: float      # bit/s
    prop_delay: float     # s per hop
    hops: int
    loss_prob: float = 0.0

    def __post_init__(self) -> None:
        if not 0 <= self.loss_prob < 1:
            raise ModelDomainError("loss_prob must lie in [0, 1)")
        if self.hops < 0:
            raise ModelDomainError("hops must be >= 0")


@dataclass(frozen=True)
class SchemeMetrics:
    """All five closed-form metrics for one scheme at one parameter point."""

    scheme: Scheme
    handover_latency: float    # s
    failure_prob: float
    session_recovery: float    # s
    packet_loss: float         # bytes per handover
    signaling_cost: float      # hop-weighted bytes per second


# -- mobility and prefixes -------------------------------------------------

def expected_zone_crossings(m: int, n: int, k1: float, k2: float,
                            n_x: int, n_y: int) -> float:
    """Mean number of zone boundaries crossed during one movement epoch.

    ``m``/``n`` are the zone counts per column/row, ``k1``/``k2`` the
    zone-diameter-to-road-spacing ratios, ``n_x``/``n_y`` the road counts.
    """
    term_x = m * k1 * (m + 1) / (6 * n_x ** 2) \
        * (6 * n_x - 4 * m * k1 + k1 + 3)
    term_y = n * k2 * (n + 1) / (6 * n_y ** 2) \
        * (6 * n_y - 4 * n * k2 + k2 + 3)
    return term_x + term_y


def mobility_stats(p: SystemParameters) -> MobilityStats:
    """Epoch length/time, pause, crossings, residence time and crossing rate.

    A zero mean speed models an immobile user: infinite residence time and a
    zero crossing rate.
    """
    _, _, n_x, n_y = derive_topology_counts(p)
    epoch_length = p.area_x * (n_x + 1) / (3 * n_x) \
        + p.area_y * (n_y + 1) / (3 * n_y)
    pause = p.max_pause / 2
    crossings = expected_zone_crossings(
        p.zones_per_col, p.zones_per_row, p.k1, p.k2, n_x, n_y)
    if crossings <= 0:
        raise ModelDomainError(
            f"expected zone crossings per epoch is {crossings:.4g}; the "
            "crossing formula leaves its domain for this zone count / k "
            "combination")
    if p.mean_speed == 0:
        return MobilityStats(epoch_length, math.inf, pause, crossings,
                             math.inf, 0.0)
    epoch_time = epoch_length / p.mean_speed
    residence = (epoch_time + 2 * pause) / crossings
    return MobilityStats(epoch_length, epoch_time, pause, crossings,
                         residence, 1.0 / residence)


def prefix_stats(p: SystemParameters, mu_sn: float) -> PrefixStats:
    """Prefix population for a given zone crossing rate ``mu_sn``.

    A prefix anchored at a previous zone survives each further residence
    with probability mu / (mu + decay_rate), giving a geometric number of
    survived handovers and mu/decay_rate live anchored prefixes on average.
    """
    if mu_sn < 0:
        raise ModelDomainError("mu_sn must be >= 0")
    lam = p.foreign_prefix_decay_rate
    survival = mu_sn / (mu_sn + lam)
    anchored = p.g_prefixes_per_handover * survival / (1 - survival)
    lifetime = math.inf if mu_sn == 0 else 1 / mu_sn + 1 / lam
    return PrefixStats(1 + anchored, anchored, survival, lifetime)


def geometric_handover_pmf(p_pr: float, h: int) -> float:
    """Probability that an anchored prefix survives exactly ``h`` handovers."""
    if not 0 <= p_pr < 1:
        raise ModelDomainError("p_pr must lie in [0, 1)")
    if h < 0:
        raise ModelDomainError("h must be >= 0")
    return p_pr ** h * (1 - p_pr)


# -- link delays ------------------------------------------------------------

def link_delay(ls: LinkSpec) -> float:
    """Expected one-way delay over ``hops`` store-and-forward hops.

    Per hop: serialization plus propagation, inflated by the expected number
    of attempts 1/(1-loss_prob) on lossy (wireless) links.
    """
    per_hop = 8 * ls.packet_size / ls.bandwidth + ls.prop_delay
    return per_hop / (1 - ls.loss_prob) * ls.hops


def wireless_control_delay(p: SystemParameters) -> float:
    """Mobile <-> serving zone, control packet."""
    return link_delay(LinkSpec(p.control_packet_size, p.wireless_bandwidth,
                               p.wireless_prop_delay, p.hops_mu_mz,
                               p.wireless_fail_prob))


def wireless_data_delay(p: SystemParameters) -> float:
    """Mobile <-> serving zone, data packet."""
    return link_delay(LinkSpec(p.data_packet_size, p.wireless_bandwidth,
                               p.wireless_prop_delay, p.hops_mu_mz,
                               p.wireless_fail_prob))


def server_control_delay(p: SystemParameters) -> float:
    """Zone <-> binding server, control packet (wired)."""
    return link_delay(LinkSpec(p.control_packet_size, p.wired_bandwidth,
                               p.wired_prop_delay, p.hops_lbs_mz))


def zone_control_delay(p: SystemParameters, hops: int | None = None) -> float:
    """Zone <-> zone, control packet (wired)."""
    return link_delay(LinkSpec(p.control_packet_size, p.wired_bandwidth,
                               p.wired_prop_delay,
                               p.hops_mz_mz if hops is None else hops))


def zone_data_delay(p: SystemParameters, hops: int | None = None) -> float:
    """Zone <-> zone, data packet (wired)."""
    return link_delay(LinkSpec(p.data_packet_size, p.wired_bandwidth,
                               p.wired_prop_delay,
                               p.hops_mz_mz if hops is None else hops))


def handover_initiation_time(p: SystemParameters) -> float:
    """Initiate/acknowledge exchange between two zones plus target processing."""
    return 2 * zone_control_delay(p) + p.proc_time_mz


# -- per-scheme metrics -------------------------------------------------------

def _check_timing(p: SystemParameters) -> None:
    if p.l2_latency + p.auth_latency <= p.scan_time:
        raise ModelDomainError(
            "l2_latency + auth_latency must exceed scan_time")


def handover_latency(scheme: Scheme, p: SystemParameters) -> float:
    """Expected handover latency in seconds.

    DDMM pays the full chain: new link, authentication, movement detection
    and the binding update through the server. Reactive fast handover
    replaces the server round trip with a single zone-to-zone context pull.
    Predictive fast handover finishes the tunnel setup while the old link is
    still up; only the portion of that setup exceeding the link-down window
    leaks into the latency, never less than zero (a ready tunnel costs
    nothing).
    """
    _check_timing(p)
    if scheme is Scheme.DDMM:
        movement_detection = 2 * wireless_control_delay(p)
        location_update = 2 * server_control_delay(p) \
            + p.proc_time_lbs + 2 * p.proc_time_mz
        return p.l2_latency + p.auth_latency + movement_detection \
            + location_update
    if scheme is Scheme.PRE_FDMM:
        pre_phase = 2 * wireless_control_delay(p) + handover_initiation_time(p)
        return max(pre_phase - p.phi, 0.0) \
            + (p.l2_latency + p.auth_latency) - p.scan_time
    if scheme is Scheme.RE_FDMM:
        return p.l2_latency + p.auth_latency + handover_initiation_time(p)
    raise ValueError(f"unknown scheme {scheme!r}")


def handover_failure_prob(mu_sn: float, t_hl: float) -> float:
    """Probability that the zone residence ends before the handover does.

    Residence times are exponential with rate ``mu_sn``; failure means a
    residence shorter than the handover latency ``t_hl``.
    """
    if mu_sn < 0 or t_hl < 0:
        raise ModelDomainError("mu_sn and t_hl must be >= 0")
    return 1.0 - math.exp(-mu_sn * t_hl)


def session_recovery(scheme: Scheme, p: SystemParameters) -> float:
    """Expected gap between the last packet before and first after handover."""
    _check_timing(p)
    if scheme is Scheme.DDMM:
        return (handover_latency(Scheme.DDMM, p) - wireless_control_delay(p)) \
            + zone_data_delay(p) + wireless_data_delay(p)
    if scheme is Scheme.RE_FDMM:
        return p.l2_latency + p.auth_latency + handover_initiation_time(p) \
            + zone_data_delay(p) + wireless_data_delay(p)
    if scheme is Scheme.PRE_FDMM:
        pre_phase = 2 * wireless_control_delay(p) + handover_initiation_time(p)
        return max(pre_phase - p.phi, 0.0) \
            + (p.l2_latency + p.auth_latency - p.scan_time) \
            + wireless_data_delay(p)
    raise ValueError(f"unknown scheme {scheme!r}")


def packet_loss(scheme: Scheme, p: SystemParameters, n_pr: float) -> float:
    """Expected bytes lost per handover with ``n_pr`` active prefixes.

    Without buffering (DDMM, reactive) every byte of the recovery window is
    lost. With predictive buffering, loss reduces to traffic sent before the
    tunnel is up plus whatever overflows the target-zone buffer; the buffer
    size is converted to an overflow time so the comparison stays in seconds.
    """
    if n_pr < 1:
        raise ModelDomainError("n_pr must be >= 1")
    byte_rate = p.session_packet_rate * n_pr * p.data_packet_size  # bytes/s
    if scheme is Scheme.DDMM:
        return byte_rate * session_recovery(Scheme.DDMM, p)
    if scheme is Scheme.RE_FDMM:
        return byte_rate * session_recovery(Scheme.RE_FDMM, p)
    if scheme is Scheme.PRE_FDMM:
        pre_phase = 2 * wireless_control_delay(p) + handover_initiation_time(p)
        buffering = (wireless_control_delay(p)
                     + (p.l2_latency + p.auth_latency - p.scan_time)) \
            - zone_data_delay(p)
        overflow_time = math.inf if byte_rate == 0 \
            else p.buffer_size / byte_rate
        return byte_rate * (max(pre_phase - p.phi, 0.0)
                            + max(buffering - overflow_time, 0.0))
    raise ValueError(f"unknown scheme {scheme!r}")


def triangular_hop_sum(n_pr: float) -> float:
    """Continuous extension of sum(i for i=1..n_pr) to real upper bounds.

    Whole part contributes the exact triangular number; the fractional
    remainder weights the next term so sweeps over the prefix lifetime stay
    continuous.
    """
    whole = math.floor(n_pr)
    rem = n_pr - whole
    return whole * (whole + 1) / 2 + rem * (whole + 1)


def signaling_cost(scheme: Scheme, p: SystemParameters,
                   mu_sn: float, n_pr: float) -> float:
    """Hop-weighted control bytes per second spent on handover signaling.

    DDMM signals through the binding server for every active prefix, growing
    linearly in the prefix count. Both fast modes additionally signal across
    zone-to-zone paths whose hop distance grows with each handover away from
    the anchor, giving the triangular (quadratic) growth.
    """
    if mu_sn < 0:
        raise ModelDomainError("mu_sn must be >= 0")
    if n_pr < 1:
        raise ModelDomainError("n_pr must be >= 1")
    lc = p.control_packet_size
    if scheme is Scheme.DDMM:
        return 2 * mu_sn * lc * (p.hops_mu_mz + p.hops_lbs_mz * (n_pr + 1))
    tri = triangular_hop_sum(n_pr) * p.hops_mz_mz
    if scheme is Scheme.PRE_FDMM:
        return 2 * mu_sn * lc * (p.hops_lbs_mz + p.hops_mu_mz + tri)
    if scheme is Scheme.RE_FDMM:
        return 2 * mu_sn * lc * (p.hops_mz_mz + tri)
    raise ValueError(f"unknown scheme {scheme!r}")


def evaluate(p: SystemParameters, scheme: Scheme) -> SchemeMetrics:
    """All five metrics for one scheme at one parameter point."""
    mob = mobility_stats(p)
    prefixes = prefix_stats(p, mob.crossing_rate)
    t_hl = handover_latency(scheme, p)
    return SchemeMetrics(
        scheme=scheme,
        handover_latency=t_hl,
        failure_prob=handover_failure_prob(mob.crossing_rate, t_hl),
        session_recovery=session_recovery(scheme, p),
        packet_loss=packet_loss(scheme, p, prefixes.mean_active_prefixes),
        signaling_cost=signaling_cost(scheme, p, mob.crossing_rate,
                                      prefixes.mean_active_prefixes),
    )
