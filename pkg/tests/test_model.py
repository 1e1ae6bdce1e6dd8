"""Closed-form model: golden values, oracles and structural properties.

Expected numbers are frozen from independent re-evaluation of the formulas
with the default operating point (hand/spreadsheet style, spelled out in
the oracle helpers below), never from the code under test.
"""

import math
import random

import pytest

import dmmlab.model as M
from dmmlab.model import (LinkSpec, ModelDomainError, Scheme,
                          expected_zone_crossings, geometric_handover_pmf,
                          handover_failure_prob, handover_latency, link_delay,
                          mobility_stats, packet_loss, prefix_stats,
                          session_recovery, signaling_cost,
                          triangular_hop_sum)
from dmmlab.params import apply_overrides, defaults


# Raw default constants for the hand oracles (kept independent of params.py).
L_C, L_D = 80, 400                      # bytes
BW, BW_W = 100e6, 10e6                  # bit/s
L_WIRED, L_WLESS = 0.5e-3, 2e-3         # s
P_F = 0.5
H_MU, H_LBS, H_MZ = 1, 10, 5
T_L2, T_AUTH, SCAN, PHI = 0.330, 0.100, 0.300, 0.035
PC_LBS, PC_MZ = 0.020, 0.010


def d_mu_c():
    return (8 * L_C / BW_W + L_WLESS) / (1 - P_F) * H_MU


def d_mu_d():
    return (8 * L_D / BW_W + L_WLESS) / (1 - P_F) * H_MU


def d_lbs_c():
    return (8 * L_C / BW + L_WIRED) * H_LBS


def d_mz_c():
    return (8 * L_C / BW + L_WIRED) * H_MZ


def d_mz_d():
    return (8 * L_D / BW + L_WIRED) * H_MZ


def t_hi():
    return 2 * d_mz_c() + PC_MZ


class TestMobilityStats:
    def test_pause_is_half_max(self):
        assert mobility_stats(defaults()).pause_time == 12.5

    def test_epoch_length_and_time(self):
        # X(Nx+1)/(3Nx) + Y(Ny+1)/(3Ny) with Nx=181, Ny=121.
        expected = 36000 * 182 / (3 * 181) + 24000 * 122 / (3 * 121)
        stats = mobility_stats(defaults())
        assert stats.epoch_length == pytest.approx(expected, abs=1e-9)
        assert stats.epoch_length == pytest.approx(20132.414, abs=1e-3)
        assert stats.epoch_time == pytest.approx(805.2966, abs=1e-4)

    def test_unit_crossing_formula(self):
        # Single zone, unit ratios, single road: each axis term is (2/6)*6.
        assert expected_zone_crossings(1, 1, 1.0, 1.0, 1, 1) == pytest.approx(4.0)

    def test_crossing_rate_inverts_residence(self):
        stats = mobility_stats(defaults())
        assert stats.crossing_rate == 1.0 / stats.residence_time
        assert stats.residence_time == pytest.approx(
            (stats.epoch_time + 2 * stats.pause_time)
            / stats.expected_crossings)

    def test_immobile_user(self):
        p = apply_overrides(defaults(), {"mean_speed": 0.0})
        stats = mobility_stats(p)
        assert stats.crossing_rate == 0.0
        assert math.isinf(stats.residence_time)

    def test_domain_error_on_negative_crossings(self):
        # Large k with the recomputed-zone-count geometry drives the
        # crossing polynomial negative.
        p = apply_overrides(defaults(), {"mix_zone_radius": 6000.0,
                                         "k1": 60.0, "k2": 60.0})
        with pytest.raises(ModelDomainError):
            mobility_stats(p)


class TestPrefixStats:
    def test_immobile_user_holds_one_prefix(self):
        stats = prefix_stats(defaults(), 0.0)
        assert stats.mean_active_prefixes == 1.0
        assert stats.mean_anchored_prefixes == 0.0

    def test_symmetric_rates(self):
        stats = prefix_stats(defaults(), 1 / 240)
        assert stats.mean_active_prefixes == pytest.approx(2.0)
        assert stats.handover_survival_prob == pytest.approx(0.5)

    def test_example_rate(self):
        stats = prefix_stats(defaults(), 0.01204)
        assert stats.mean_active_prefixes == pytest.approx(1 + 0.01204 * 240)
        assert stats.mean_active_prefixes == pytest.approx(3.89, abs=5e-3)

    def test_mean_matches_pmf_summation(self):
        # Brute-force mean of the survived-handover distribution.
        stats = prefix_stats(defaults(), 0.01204)
        p_pr = stats.handover_survival_prob
        mean = sum(h * geometric_handover_pmf(p_pr, h) for h in range(4000))
        assert stats.mean_anchored_prefixes == pytest.approx(mean, abs=1e-6)

    def test_lifetime_sum(self):
        stats = prefix_stats(defaults(), 0.02)
        assert stats.mean_prefix_lifetime == pytest.approx(1 / 0.02 + 240)


class TestGeometricPmf:
    def test_half_at_zero(self):
        assert geometric_handover_pmf(0.5, 0) == 0.5

    def test_zero_survival(self):
        assert geometric_handover_pmf(0.0, 3) == 0.0
        assert geometric_handover_pmf(0.0, 0) == 1.0

    def test_sums_to_one_and_mean_matches(self):
        rng = random.Random(20)
        for _ in range(20):
            p_pr = rng.uniform(0.01, 0.83)
            total, mean, h = 0.0, 0.0, 0
            while p_pr ** (h + 1) >= 1e-12:  # remaining tail mass
                val = geometric_handover_pmf(p_pr, h)
                total += val
                mean += h * val
                h += 1
            assert total == pytest.approx(1.0, abs=1e-9)
            assert mean == pytest.approx(p_pr / (1 - p_pr), abs=1e-9)

    def test_rejects_certain_survival(self):
        with pytest.raises(ModelDomainError):
            geometric_handover_pmf(1.0, 1)


class TestLinkDelay:
    def test_wireless_control_example(self):
        ls = LinkSpec(80, 10e6, 2e-3, 1, 0.5)
        assert link_delay(ls) == pytest.approx(0.004128, abs=1e-9)

    def test_wired_control_example(self):
        ls = LinkSpec(80, 100e6, 0.5e-3, 10)
        assert link_delay(ls) == pytest.approx(0.005064, abs=1e-9)

    def test_zero_hops(self):
        assert link_delay(LinkSpec(80, 10e6, 2e-3, 0, 0.5)) == 0.0

    def test_lossless_equals_wired_form(self):
        ls = LinkSpec(400, 100e6, 0.5e-3, 5)
        assert link_delay(ls) == (8 * 400 / 100e6 + 0.5e-3) * 5


class TestHandoverLatency:
    def test_plain_scheme_golden(self):
        expected = T_L2 + T_AUTH + 2 * d_mu_c() \
            + (2 * d_lbs_c() + PC_LBS + 2 * PC_MZ)
        got = handover_latency(Scheme.DDMM, defaults())
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.488384, abs=1e-9)

    def test_reactive_golden(self):
        got = handover_latency(Scheme.RE_FDMM, defaults())
        assert got == pytest.approx(T_L2 + T_AUTH + t_hi(), abs=1e-12)
        assert got == pytest.approx(0.445064, abs=1e-9)

    def test_predictive_golden_and_clamp(self):
        # Pre-phase 2*4.128 + 15.064 = 23.32 ms fits the 35 ms window, so
        # only the post-scan link setup remains.
        got = handover_latency(Scheme.PRE_FDMM, defaults())
        assert got == pytest.approx(T_L2 + T_AUTH - SCAN, abs=1e-12)
        assert got == pytest.approx(0.130, abs=1e-9)

    def test_predictive_unclamped_window(self):
        p = apply_overrides(defaults(), {"phi": 0.005})
        expected = (2 * d_mu_c() + t_hi() - 0.005) + (T_L2 + T_AUTH - SCAN)
        assert handover_latency(Scheme.PRE_FDMM, p) == pytest.approx(
            expected, abs=1e-12)

    def test_ordering_at_defaults(self):
        p = defaults()
        assert handover_latency(Scheme.PRE_FDMM, p) \
            < handover_latency(Scheme.RE_FDMM, p) \
            < handover_latency(Scheme.DDMM, p)

    def test_predictive_flat_under_clamp(self):
        base = handover_latency(Scheme.PRE_FDMM, defaults())
        for overrides in ({"network_scale": 0.8}, {"hops_lbs_mz": 14},
                          {"mix_zone_radius": 4000.0}):
            p = apply_overrides(defaults(), overrides)
            assert handover_latency(Scheme.PRE_FDMM, p) == base

    def test_reactive_invariant_in_wireless_failure(self):
        values = {handover_latency(
            Scheme.RE_FDMM,
            apply_overrides(defaults(), {"wireless_fail_prob": round(0.1 * k, 10)}))
            for k in range(1, 9)}
        assert len(values) == 1

    def test_plain_increases_with_wireless_failure(self):
        lats = [handover_latency(
            Scheme.DDMM,
            apply_overrides(defaults(), {"wireless_fail_prob": round(0.1 * k, 10)}))
            for k in range(1, 9)]
        assert all(b > a for a, b in zip(lats, lats[1:]))

    def test_predictive_flat_while_pre_phase_fits_window(self):
        lats = []
        for k in range(1, 8):  # 0.1 .. 0.7 keep the pre-phase under 35 ms
            p = apply_overrides(defaults(),
                                {"wireless_fail_prob": round(0.1 * k, 10)})
            assert 2 * M.wireless_control_delay(p) \
                + M.handover_initiation_time(p) <= p.phi
            lats.append(handover_latency(Scheme.PRE_FDMM, p))
        assert max(lats) - min(lats) <= 1e-12

    def test_scan_must_complete_before_auth(self):
        # Unreachable through validated parameters (scan < l2 is enforced
        # there); the model still guards against raw inputs.
        from types import SimpleNamespace
        from dataclasses import fields
        raw = SimpleNamespace(**{f.name: getattr(defaults(), f.name)
                                 for f in fields(type(defaults()))})
        raw.l2_latency, raw.scan_time, raw.auth_latency = 0.30, 0.31, 0.001
        with pytest.raises(ModelDomainError):
            handover_latency(Scheme.PRE_FDMM, raw)

    def test_purity(self):
        p = defaults()
        assert handover_latency(Scheme.DDMM, p) == handover_latency(
            Scheme.DDMM, p)


class TestFailureProbability:
    def test_zero_latency(self):
        assert handover_failure_prob(0.01, 0.0) == 0.0

    def test_half_life_construction(self):
        assert handover_failure_prob(math.log(2), 1.0) == pytest.approx(0.5)

    def test_example_point(self):
        assert handover_failure_prob(0.01204, 0.4884) == pytest.approx(
            0.005863, abs=1e-6)

    def test_bounds_and_monotonicity(self):
        rng = random.Random(4)
        prev_mu = 0.0
        for _ in range(50):
            mu, hl = rng.uniform(0, 0.2), rng.uniform(0, 2)
            pf = handover_failure_prob(mu, hl)
            assert 0.0 <= pf <= 1.0
            assert handover_failure_prob(mu + 0.01, hl + 0.1) \
                >= pf or hl == 0
        del prev_mu


class TestSessionRecovery:
    def test_predictive_golden(self):
        expected = (T_L2 + T_AUTH - SCAN) + d_mu_d()
        got = session_recovery(Scheme.PRE_FDMM, defaults())
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.13464, abs=1e-9)

    def test_reactive_golden(self):
        expected = T_L2 + T_AUTH + t_hi() + d_mz_d() + d_mu_d()
        got = session_recovery(Scheme.RE_FDMM, defaults())
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.452364, abs=1e-9)

    def test_plain_golden(self):
        hl = T_L2 + T_AUTH + 2 * d_mu_c() + 2 * d_lbs_c() + PC_LBS + 2 * PC_MZ
        expected = (hl - d_mu_c()) + d_mz_d() + d_mu_d()
        got = session_recovery(Scheme.DDMM, defaults())
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.491556, abs=1e-9)

    def test_recovery_dominates_latency_minus_uplink(self):
        p = defaults()
        for scheme in Scheme:
            assert session_recovery(scheme, p) >= handover_latency(scheme, p) \
                - M.wireless_control_delay(p)


class TestPacketLoss:
    def test_predictive_zero_at_defaults(self):
        stats = prefix_stats(defaults(), mobility_stats(defaults()).crossing_rate)
        assert packet_loss(Scheme.PRE_FDMM, defaults(),
                           stats.mean_active_prefixes) == 0.0

    def test_zero_recovery_means_zero_loss(self):
        p = apply_overrides(defaults(), {"session_packet_rate": 1e-9})
        assert packet_loss(Scheme.DDMM, p, 1.0) == pytest.approx(
            1e-9 * 400 * session_recovery(Scheme.DDMM, p), abs=1e-9)

    def test_plain_loss_from_recovery_window(self):
        n_pr = 1 + 0.013871638904340558 * 240  # defaults prefix population
        lam_bytes = 50 * n_pr * 400
        expected = lam_bytes * 0.491556
        got = packet_loss(Scheme.DDMM, defaults(), n_pr)
        assert got == pytest.approx(expected, rel=1e-9)

    def test_zero_buffer_restores_buffering_window_loss(self):
        p = apply_overrides(defaults(), {"buffer_size": 0})
        n_pr = 3.0
        buffering = d_mu_c() + (T_L2 + T_AUTH - SCAN) - d_mz_d()
        expected = 50 * n_pr * 400 * buffering
        assert packet_loss(Scheme.PRE_FDMM, p, n_pr) == pytest.approx(
            expected, rel=1e-12)

    def test_reactive_loss_in_bytes(self):
        got = packet_loss(Scheme.RE_FDMM, defaults(), 2.0)
        assert got == pytest.approx(
            50 * 2.0 * 400 * session_recovery(Scheme.RE_FDMM, defaults()),
            rel=1e-12)

    def test_requires_at_least_one_prefix(self):
        with pytest.raises(ModelDomainError):
            packet_loss(Scheme.DDMM, defaults(), 0.5)


class TestSignalingCost:
    def test_zero_crossing_rate(self):
        for scheme in Scheme:
            assert signaling_cost(scheme, defaults(), 0.0, 4.0) == 0.0

    def test_single_prefix_sum_collapses(self):
        p = defaults()
        got = signaling_cost(Scheme.PRE_FDMM, p, 0.01, 1.0)
        assert got == pytest.approx(2 * 0.01 * 80 * (10 + 1 + 5), rel=1e-12)

    def test_hand_computed_examples(self):
        p = defaults()
        assert signaling_cost(Scheme.DDMM, p, 0.01204, 4.0) == pytest.approx(
            2 * 0.01204 * 80 * (1 + 10 * 5), rel=1e-12)  # 98.2 B/s
        assert signaling_cost(Scheme.PRE_FDMM, p, 0.01204, 4.0) == \
            pytest.approx(2 * 0.01204 * 80 * (10 + 1 + 50), rel=1e-12)

    def test_triangular_sum_continuity(self):
        assert triangular_hop_sum(4.0) == 10.0
        assert triangular_hop_sum(4.5) == 10.0 + 0.5 * 5
        xs = [triangular_hop_sum(1 + 0.01 * k) for k in range(1200)]
        jumps = [abs(b - a) for a, b in zip(xs, xs[1:])]
        assert max(jumps) < 0.14  # continuous: steps shrink with the grid

    def test_linear_vs_triangular_growth(self):
        p = defaults()
        mu = 0.0139
        dd = [signaling_cost(Scheme.DDMM, p, mu, n) for n in (2.0, 12.0, 22.0)]
        pre = [signaling_cost(Scheme.PRE_FDMM, p, mu, n)
               for n in (2.0, 12.0, 22.0)]
        assert dd[2] - dd[1] == pytest.approx(dd[1] - dd[0], rel=1e-9)
        assert pre[2] - pre[1] > pre[1] - pre[0]
        assert pre[2] > dd[2]  # fast mode overtakes for many prefixes

    def test_predictive_above_reactive(self):
        p = defaults()
        assert signaling_cost(Scheme.PRE_FDMM, p, 0.01, 5.0) \
            > signaling_cost(Scheme.RE_FDMM, p, 0.01, 5.0)
