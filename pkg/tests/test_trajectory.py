"""Road-grid movement generator and the signal model."""

import statistics

import pytest

from dmmlab.params import apply_overrides, defaults
from dmmlab.trajectory import (distance_at_rss, gen_trajectory, manhattan_length,
                               rss)


class TestTrajectory:
    def test_same_seed_same_trajectory(self):
        a = gen_trajectory(defaults(), 7, 200)
        b = gen_trajectory(defaults(), 7, 200)
        assert a == b

    def test_different_seed_differs(self):
        assert gen_trajectory(defaults(), 1, 50) != gen_trajectory(
            defaults(), 2, 50)

    def test_waypoints_on_road_grid(self):
        p = defaults()
        for epoch in gen_trajectory(p, 3, 100):
            for x, y in epoch.path:
                assert x % p.road_spacing_x == 0
                assert y % p.road_spacing_y == 0
            assert 0 <= epoch.pause <= p.max_pause

    def test_paths_are_single_corner_routes(self):
        for epoch in gen_trajectory(defaults(), 11, 200):
            assert len(epoch.path) <= 3
            assert epoch.length == manhattan_length(epoch.src, epoch.dst)
            # consecutive waypoints share an axis (road-constrained legs)
            for (x0, y0), (x1, y1) in zip(epoch.path, epoch.path[1:]):
                assert x0 == x1 or y0 == y1

    def test_epochs_chain(self):
        epochs = gen_trajectory(defaults(), 5, 50)
        for a, b in zip(epochs, epochs[1:]):
            assert b.src == a.dst

    def test_mean_length_approaches_closed_form(self):
        # 2e4 epochs here; the acceptance suite runs the full-size check.
        p = defaults()
        epochs = gen_trajectory(p, 123, 20_000)
        expected = 36000 * 182 / (3 * 181) + 24000 * 122 / (3 * 121)
        mean = statistics.fmean(e.length for e in epochs)
        assert mean == pytest.approx(expected, rel=0.04)

    def test_mean_pause_near_half_max(self):
        epochs = gen_trajectory(defaults(), 31, 20_000)
        mean = statistics.fmean(e.pause for e in epochs)
        assert mean == pytest.approx(12.5, rel=0.03)

    def test_epoch_count_validated(self):
        with pytest.raises(ValueError):
            gen_trajectory(defaults(), 1, 0)


class TestSignalModel:
    def test_reference_point(self):
        p = defaults()
        assert rss(p, p.rss_ref_distance) == p.rss_ref_power

    def test_decade_rule(self):
        p = apply_overrides(defaults(), {"path_loss_exponent": 2.0})
        assert rss(p, 10 * p.rss_ref_distance) == pytest.approx(
            p.rss_ref_power - 20.0)

    def test_monotone_decay(self):
        p = defaults()
        levels = [rss(p, d) for d in (50, 100, 400, 900, 2000)]
        assert all(b < a for a, b in zip(levels, levels[1:]))

    def test_distance_inversion(self):
        p = defaults()
        for level in (-70.0, -85.0, -95.0):
            assert rss(p, distance_at_rss(p, level)) == pytest.approx(level)

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(ValueError):
            rss(defaults(), 0.0)
