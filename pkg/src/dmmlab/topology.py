"""Mix-zone coverage layout over the road grid.

Zones of nominal radius r sit on a rectangular lattice at a pitch of
2r - overlap per axis, centred in the analysis area, so adjacent coverage
areas overlap along the lattice axes. Operationally a mobile belongs to the
zone with the nearest centre; the lattice cells therefore tile the whole
area and the coverage check verifies that no road point falls outside every
cell.

Hop distances follow the cost model: one wireless hop from mobile to its
zone, a constant wired hop count from any zone to the binding server, and a
zone-to-zone hop count that grows with the lattice (Manhattan) distance, so
anchors left behind get progressively more expensive to reach.
"""

from __future__ import annotations

from dataclasses import dataclass

from .params import SystemParameters

__all__ = ["Zone", "MixZoneTopology", "TopologyError", "build_topology"]

PREFIXES_PER_ZONE = 64


class TopologyError(ValueError):
    pass


@dataclass(frozen=True)
class Zone:
    zone_id: int
    col: int
    row: int
    center: tuple[float, float]
    radius: float
    prefix_pool: tuple[str, ...]


class MixZoneTopology:
    """Zone lattice plus hop-distance and access-network lookup tables."""

    def __init__(self, p: SystemParameters):
        self.params = p
        self.cols = p.zones_per_row
        self.rows = p.zones_per_col
        if self.cols < 1 or self.rows < 1:
            raise TopologyError("topology needs at least one zone")
        self.pitch_x = p.zone_pitch_x
        self.pitch_y = p.zone_pitch_y
        # Centre the lattice; margins never exceed half a pitch.
        self.origin_x = (p.area_x - (self.cols - 1) * self.pitch_x) / 2
        self.origin_y = (p.area_y - (self.rows - 1) * self.pitch_y) / 2
        self.zones: list[Zone] = []
        for row in range(self.rows):
            for col in range(self.cols):
                zid = row * self.cols + col
                pool = tuple(f"Z{zid}:P{k}" for k in range(PREFIXES_PER_ZONE))
                self.zones.append(Zone(
                    zid, col, row,
                    (self.origin_x + col * self.pitch_x,
                     self.origin_y + row * self.pitch_y),
                    p.mix_zone_radius, pool))
        # One access network per zone.
        self.an_to_zone = {z.zone_id: z.zone_id for z in self.zones}
        self._check_coverage()

    def __len__(self) -> int:
        return len(self.zones)

    def zone_of(self, x: float, y: float) -> int:
        """Id of the zone whose centre is nearest to (x, y)."""
        col = min(max(round((x - self.origin_x) / self.pitch_x), 0),
                  self.cols - 1)
        row = min(max(round((y - self.origin_y) / self.pitch_y), 0),
                  self.rows - 1)
        return row * self.cols + col

    def center(self, zone_id: int) -> tuple[float, float]:
        return self.zones[zone_id].center

    def distance_to_center(self, zone_id: int, x: float, y: float) -> float:
        cx, cy = self.zones[zone_id].center
        return ((x - cx) ** 2 + (y - cy) ** 2) ** 0.5

    def lattice_distance(self, a: int, b: int) -> int:
        za, zb = self.zones[a], self.zones[b]
        return abs(za.col - zb.col) + abs(za.row - zb.row)

    def hops_between_zones(self, a: int, b: int) -> int:
        """Wired hop count between two zones (0 for the same zone)."""
        return self.params.hops_mz_mz * self.lattice_distance(a, b)

    def hops_to_lbs(self, zone_id: int) -> int:
        return self.params.hops_lbs_mz

    def adjacent(self, a: int, b: int) -> bool:
        return self.lattice_distance(a, b) == 1

    def _check_coverage(self) -> None:
        # Every road point must fall inside some lattice cell: its offset to
        # the nearest centre stays within half a pitch (plus the outer
        # margin, which construction keeps below half a pitch as well).
        p = self.params
        worst_x = max(self.origin_x,
                      p.area_x - (self.origin_x + (self.cols - 1) * self.pitch_x))
        worst_y = max(self.origin_y,
                      p.area_y - (self.origin_y + (self.rows - 1) * self.pitch_y))
        if worst_x > self.pitch_x / 2 + 1e-9 or worst_y > self.pitch_y / 2 + 1e-9:
            raise TopologyError(
                "zone lattice does not cover the analysis area"
            )

    def disjoint_pools(self) -> bool:
        seen: set[str] = set()
        for z in self.zones:
            for pfx in z.prefix_pool:
                if pfx in seen:
                    return False
                seen.add(pfx)
        return True


def build_topology(p: SystemParameters, seed: int = 0) -> MixZoneTopology:
    """Construct the zone lattice for ``p``.

    The layout is fully determined by the parameters; ``seed`` is accepted
    for interface uniformity with the other builders and ignored.
    """
    del seed
    return MixZoneTopology(p)
