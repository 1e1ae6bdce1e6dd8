"""Road-constrained random-destination movement and the radio signal model.

Vehicles move on a rectangular street grid: pick a random intersection,
drive there along one horizontal and one vertical leg (order random), pause
a uniform random time, repeat. Each source-to-destination cycle is an
epoch. Movement is at constant speed along the roads, never off-grid.

The signal model is log-distance path loss: received power falls by
10 * exponent dB per decade of distance from the zone centre.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .params import SystemParameters

__all__ = ["TrajectoryEpoch", "gen_trajectory", "iter_epochs", "rss",
           "distance_at_rss", "manhattan_length"]


@dataclass(frozen=True)
class TrajectoryEpoch:
    """One movement cycle: source, destination, road path and end pause."""

    src: tuple[float, float]
    dst: tuple[float, float]
    path: tuple[tuple[float, float], ...]  # waypoints incl. src and dst
    pause: float                           # s, dwell at the destination

    @property
    def length(self) -> float:
        total = 0.0
        for (x0, y0), (x1, y1) in zip(self.path, self.path[1:]):
            total += abs(x1 - x0) + abs(y1 - y0)
        return total


def manhattan_length(src: tuple[float, float], dst: tuple[float, float]) -> float:
    return abs(dst[0] - src[0]) + abs(dst[1] - src[1])


def _intersection(p: SystemParameters, rng: random.Random) -> tuple[float, float]:
    i = rng.randrange(p.road_count_x)
    j = rng.randrange(p.road_count_y)
    return (i * p.road_spacing_x, j * p.road_spacing_y)


def _make_epoch(p: SystemParameters, rng: random.Random,
                src: tuple[float, float]) -> TrajectoryEpoch:
    dst = _intersection(p, rng)
    horizontal_first = rng.random() < 0.5
    if horizontal_first:
        corner = (dst[0], src[1])
    else:
        corner = (src[0], dst[1])
    path = [src]
    if corner != src and corner != dst:
        path.append(corner)
    if dst != src:
        path.append(dst)
    pause = rng.uniform(0.0, p.max_pause)
    return TrajectoryEpoch(src, dst, tuple(path), pause)


def gen_trajectory(p: SystemParameters, seed: int,
                   n_epochs: int) -> list[TrajectoryEpoch]:
    """Generate ``n_epochs`` consecutive epochs, reproducible per seed.

    Destinations are uniform over road intersections (the source of each
    epoch is the previous destination); the destination may equal the
    source, giving a zero-length epoch with only a pause.
    """
    if n_epochs < 1:
        raise ValueError("n_epochs must be >= 1")
    return list(iter_epochs(p, seed, n_epochs))


def iter_epochs(p: SystemParameters, seed: int, n_epochs: int | None = None):
    """Yield epochs indefinitely (or ``n_epochs`` of them)."""
    rng = random.Random(seed)
    pos = _intersection(p, rng)
    count = 0
    while n_epochs is None or count < n_epochs:
        epoch = _make_epoch(p, rng, pos)
        yield epoch
        pos = epoch.dst
        count += 1


def rss(p: SystemParameters, distance: float) -> float:
    """Received signal strength (dBm) at ``distance`` metres from a zone centre."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    return p.rss_ref_power \
        - 10 * p.path_loss_exponent * math.log10(distance / p.rss_ref_distance)


def distance_at_rss(p: SystemParameters, level: float) -> float:
    """Distance at which the received signal drops to ``level`` dBm."""
    return p.rss_ref_distance * 10 ** (
        (p.rss_ref_power - level) / (10 * p.path_loss_exponent))
