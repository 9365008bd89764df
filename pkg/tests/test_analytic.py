import math

import numpy as np
import pytest

import twotier as tt
from twotier.geometry import HexLattice, sample_uniform_disk, sample_uniform_hexagon

from conftest import DBM, single_type_config

S_GRID = np.geomspace(1e-3, 1e3, 13)


def mc_exp_neg(vals):
    return float(np.mean(vals)), float(np.std(vals) / math.sqrt(len(vals)))


class TestTier1InCell:
    def test_at_zero(self, row1):
        assert tt.laplace_tier1_in(row1, 0)(0.0) == 1.0

    def test_zero_intensity(self, row1):
        cfg = row1.with_(tier1=(tt.Tier1UEType(0.0, DBM(-70)),))
        lap = tt.laplace_tier1_in(cfg, 0)
        assert all(lap(s) == 1.0 for s in S_GRID)

    def test_closed_form_and_monte_carlo(self, row1):
        s = 0.1 / row1.tier1[0].target_power
        got = tt.laplace_tier1_in(row1, 0)(s)
        assert got == pytest.approx(
            math.exp(-(3 * math.sqrt(3) / 2) * 0.5 * 0.1 / 1.1), rel=1e-12)
        assert got == pytest.approx(0.8886, abs=2e-4)
        # oracle: in-cell interferers each contribute exactly P*h
        rng = np.random.default_rng(0)
        area = 3 * math.sqrt(3) / 2
        n = rng.poisson(0.5 * area, size=200_000)
        total = rng.exponential(size=int(n.sum()))
        idx = np.repeat(np.arange(len(n)), n)
        interference = np.bincount(idx, weights=total, minlength=len(n))
        mc, se = mc_exp_neg(np.exp(-0.1 * interference))
        assert abs(got - mc) < 3 * se


class TestTier1OutOfCell:
    def test_zero_intensity(self, row1):
        cfg = row1.with_(tier1=(tt.Tier1UEType(0.0, DBM(-70)),))
        assert tt.laplace_tier1_out(cfg, 0)(1e3) == 1.0

    def test_monotone_to_one_as_s_vanishes(self, row1):
        lap = tt.laplace_tier1_out(row1, 0)
        vals = [lap(s) for s in [1.0, 0.3, 0.1, 0.03, 0.01, 0.0]]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert vals[-1] == 1.0

    def test_total_tier1_against_monte_carlo(self, row1):
        """exp(-lam*(in + sum of cell integrals)) vs brute-force E[e^{-sI1}]."""
        s = 0.1 / row1.tier1[0].target_power
        analytic = tt.laplace_tier1_in(row1, 0)(s) * tt.laplace_tier1_out(row1, 0)(s)
        rng = np.random.default_rng(42)
        lattice = HexLattice(1.0)
        cells = tt.lattice_centers(lattice, 10.0)
        sigma = row1.channel.sigma_ln
        area = 3 * math.sqrt(3) / 2
        trials = 40_000
        counts = rng.poisson(0.5 * area, size=(trials, len(cells)))
        tot = int(counts.sum())
        idx = np.repeat(np.arange(trials), counts.sum(axis=1))
        ctr = np.vstack([np.repeat(cells, c, axis=0) for c in counts])
        rel = sample_uniform_hexagon((0, 0), 1.0, tot, rng)
        pts = rel + ctr
        own = (ctr[:, 0] == 0.0) & (ctr[:, 1] == 0.0)
        r4 = (rel[:, 0] ** 2 + rel[:, 1] ** 2) ** 2
        d4 = (pts[:, 0] ** 2 + pts[:, 1] ** 2) ** 2
        g = np.exp(sigma * rng.standard_normal(tot))
        h = rng.exponential(size=tot)
        contrib = np.where(own, h, r4 * g * h / d4)
        interference = np.bincount(idx, weights=contrib, minlength=trials)
        mc, se = mc_exp_neg(np.exp(-0.1 * interference))
        assert abs(analytic - mc) < 3 * se


class TestCellAggregate:
    def test_zero_profile(self, row1):
        cfg = single_type_config(nu=0.0)
        assert tt.laplace_cell_aggregate(cfg, 0, (0.5, 0.0), 1.0) == 1.0

    def test_at_s_zero(self, row1):
        assert tt.laplace_cell_aggregate(row1, 0, (0.5, 0.0), 0.0) == 1.0

    @pytest.mark.parametrize("x0", [(2.0, 0.0), (0.4, 0.0)])
    def test_cluster_monte_carlo(self, row1, x0):
        s = 0.1 / row1.tier1[0].target_power
        analytic = tt.laplace_cell_aggregate(row1, 0, x0, s)
        prof = row1.tier2[0].ue_classes[0].profile
        sq = s * row1.tier2[0].ue_classes[0].target_power
        sigma = row1.channel.sigma_ln
        rng = np.random.default_rng(4)
        reps = 100_000
        counts = rng.poisson(prof.mean_count(), size=reps)
        tot = int(counts.sum())
        rel = sample_uniform_disk((0, 0), prof.support_radius, tot, rng)
        # constant profile: uniform positions already follow nu
        pts = rel + np.asarray(x0)
        idx = np.repeat(np.arange(reps), counts)
        r4 = (rel[:, 0] ** 2 + rel[:, 1] ** 2) ** 2
        d4 = (pts[:, 0] ** 2 + pts[:, 1] ** 2) ** 2
        g = np.exp(sigma * rng.standard_normal(tot))
        h = rng.exponential(size=tot)
        interference = np.bincount(idx, weights=r4 * g * h / d4, minlength=reps)
        mc, se = mc_exp_neg(np.exp(-sq * interference))
        assert abs(analytic - mc) < 3 * max(se, 1e-9)


class TestCoeffC:
    def test_zero_profile(self):
        cfg = single_type_config(nu=0.0)
        assert tt.coeff_C(cfg, 0, 1.0) == 0.0

    def test_independent_of_mu(self, row1):
        a = tt.coeff_C(row1, 0, 3.0)
        b = tt.coeff_C(row1.with_(tier2=(
            tt.Tier2BSType(7.7, 0.2, row1.tier2[0].ue_classes),)), 0, 3.0)
        assert a == b

    def test_radial_path_matches_plane_quadrature(self, row1):
        s = 0.1 / row1.tier1[0].target_power
        fast = tt.coeff_C(row1, 0, s)
        slow = tt.integrate_plane(
            lambda pts: np.array([1.0 - tt.laplace_cell_aggregate(row1, 0, p, s)
                                  for p in pts]),
            tt.DEFAULT_SPEC, start_radius=15.0)
        assert fast == pytest.approx(slow.value, rel=1e-4)

    def test_tradeoff_coefficient_anchor(self, tradeoff_config):
        s = 0.05 / tradeoff_config.tier1[0].target_power
        a11 = tt.coeff_C(tradeoff_config, 0, s)
        assert a11 == pytest.approx(0.0640, rel=0.05)


class TestTier2Total:
    def test_no_cells(self, row1):
        cfg = row1.with_(tier2=(tt.Tier2BSType(0.0, 0.2, row1.tier2[0].ue_classes),))
        assert tt.laplace_tier2_total(cfg)(2.0) == 1.0

    def test_log_linear_in_intensities(self, planning_config):
        s = 0.05 / planning_config.tier1[0].target_power
        rng = np.random.default_rng(3)
        for _ in range(3):
            mu = rng.uniform(0.1, 2.0, size=2)
            cfgs = [planning_config.with_(tier2=tuple(
                tt.Tier2BSType(float(f * m), bs.radius, bs.ue_classes)
                for bs, m in zip(planning_config.tier2, mu)))
                for f in (1.0, 2.0)]
            l1 = math.log(tt.laplace_tier2_total(cfgs[0])(s))
            l2 = math.log(tt.laplace_tier2_total(cfgs[1])(s))
            assert l2 == pytest.approx(2.0 * l1, abs=1e-10)

    def test_against_cluster_process_monte_carlo(self, row1):
        s = 1.0 / row1.tier1[0].target_power
        analytic = tt.laplace_tier2_total(row1)(s)
        prof = row1.tier2[0].ue_classes[0].profile
        sq = s * row1.tier2[0].ue_classes[0].target_power
        sigma = row1.channel.sigma_ln
        rng = np.random.default_rng(17)
        reps, wr = 20_000, 10.2
        vals = np.empty(reps)
        for t in range(reps):
            nbs = rng.poisson(0.5 * math.pi * wr * wr)
            bs = sample_uniform_disk((0, 0), wr, nbs, rng)
            counts = rng.poisson(prof.mean_count(), size=nbs)
            tot = int(counts.sum())
            rel = sample_uniform_disk((0, 0), prof.support_radius, tot, rng)
            parent = np.repeat(bs, counts, axis=0)
            pts = rel + parent
            r4 = (rel[:, 0] ** 2 + rel[:, 1] ** 2) ** 2
            d4 = (pts[:, 0] ** 2 + pts[:, 1] ** 2) ** 2
            g = np.exp(sigma * rng.standard_normal(tot))
            h = rng.exponential(size=tot)
            vals[t] = math.exp(-sq * float((r4 * g * h / d4).sum()))
        mc, se = mc_exp_neg(vals)
        assert abs(analytic - mc) < 3 * se


class TestTier2Intra:
    def test_zero_profile(self):
        cfg = single_type_config(nu=0.0)
        assert tt.laplace_tier2_intra(cfg, 0)(5.0) == 1.0

    def test_closed_form(self, row1):
        s = 0.1 / row1.tier2[0].ue_classes[0].target_power
        nbar = tt.mean_ue_per_cell(row1.tier2[0], 0)
        expected = math.exp(-(0.1 / 1.1) * nbar)
        assert tt.laplace_tier2_intra(row1, 0)(s) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(0.7957, abs=2e-4)

    def test_saturation_floor(self, row1):
        nbar = tt.mean_ue_per_cell(row1.tier2[0], 0)
        got = tt.laplace_tier2_intra(row1, 0)(1e15 / row1.tier2[0].ue_classes[0].target_power)
        assert got == pytest.approx(math.exp(-nbar), rel=1e-9)


class TestOutage:
    def test_vanishing_threshold(self, row1):
        # outage scales like sqrt(T) as T -> 0 (an interferer can land on
        # top of the receiver), so the limit is 0 but not linearly fast
        t1 = [tt.outage_tier1(row1, tt.TypicalQuery.tier1(0, T))
              for T in (1e-6, 1e-9, 1e-12)]
        t2 = [tt.outage_tier2(row1, tt.TypicalQuery.tier2(0, 0, T))
              for T in (1e-6, 1e-9, 1e-12)]
        assert t1[0] > t1[1] > t1[2] and t1[2] < 1e-6
        assert t2[0] > t2[1] > t2[2] and t2[2] < 1e-6

    def test_no_interferers(self):
        cfg = single_type_config(lam=0.0, mu=0.0)
        assert tt.outage_tier1(cfg, tt.TypicalQuery.tier1(0, 0.5)) == 0.0
        # the tier-2 receiver also needs an empty own cell (co-cell UEs interfere)
        quiet = single_type_config(lam=0.0, mu=0.0, nu=0.0)
        assert tt.outage_tier2(quiet, tt.TypicalQuery.tier2(0, 0, 0.5)) \
            == pytest.approx(0.0, abs=1e-12)

    def test_tier1_product_decomposition(self, row1):
        q = tt.TypicalQuery.tier1(0, 0.1)
        s = 0.1 / row1.tier1[0].target_power
        product = (tt.laplace_tier1_in(row1, 0)(s)
                   * tt.laplace_tier1_out(row1, 0)(s)
                   * tt.laplace_tier2_total(row1)(s))
        assert tt.outage_tier1(row1, q) == pytest.approx(1.0 - product, abs=1e-12)

    def test_tier2_factored_vs_unfactored(self, row1):
        q = tt.TypicalQuery.tier2(0, 0, 0.1)
        a = tt.outage_tier2(row1, q)
        b = tt.outage_tier2(row1, q, force_unfactored=True)
        assert abs(a - b) < 1e-8

    def test_power_scaling_invariance(self, planning_config):
        q = tt.TypicalQuery.tier2(1, 0, 0.05)
        base = tt.outage_tier2(planning_config, q)
        c = 13.7
        scaled = planning_config.with_(
            tier1=tuple(tt.Tier1UEType(t.intensity, c * t.target_power)
                        for t in planning_config.tier1),
            tier2=tuple(tt.Tier2BSType(bs.intensity, bs.radius, tuple(
                tt.Tier2UEClass(c * u.target_power, u.profile)
                for u in bs.ue_classes)) for bs in planning_config.tier2))
        assert tt.outage_tier2(scaled, q) == pytest.approx(base, abs=1e-9)

    def test_palm_consistency_same_power_types(self, row1):
        cfg = row1.with_(tier1=(tt.Tier1UEType(0.3, DBM(-70)),
                                tt.Tier1UEType(0.2, DBM(-70))))
        a = tt.outage_tier1(cfg, tt.TypicalQuery.tier1(0, 0.1))
        b = tt.outage_tier1(cfg, tt.TypicalQuery.tier1(1, 0.1))
        assert a == b

    def test_monotone_in_parameters(self):
        qs = lambda cfg, T: tt.outage_tier1(cfg, tt.TypicalQuery.tier1(0, T))
        base = [qs(single_type_config(lam=l), 0.1) for l in (0.25, 0.5, 1.0)]
        assert base[0] < base[1] < base[2]
        mus = [qs(single_type_config(mu=m), 0.1) for m in (0.25, 0.5, 1.0)]
        assert mus[0] < mus[1] < mus[2]
        nus = [qs(single_type_config(nu=v), 0.1) for v in (10.0, 20.0, 40.0)]
        assert nus[0] < nus[1] < nus[2]
        cfg = single_type_config()
        ts = [qs(cfg, T) for T in (0.05, 0.1, 0.5, 1.0)]
        assert all(b > a for a, b in zip(ts, ts[1:]))

    def test_edge_heavy_profile_raises_outage(self):
        # same mean load, UEs pushed to cell edges transmit louder
        low = single_type_config(profile=tt.IntensityProfile.falling(60.0, 0.2))
        mid = single_type_config(profile=tt.IntensityProfile.constant(20.0, 0.2))
        high = single_type_config(profile=tt.IntensityProfile.rising(30.0, 0.2))
        q = tt.TypicalQuery.tier1(0, 0.1)
        p = [tt.outage_tier1(c, q) for c in (low, mid, high)]
        assert p[0] < p[1] < p[2]
        q2 = tt.TypicalQuery.tier2(0, 0, 0.1)
        p2 = [tt.outage_tier2(c, q2) for c in (low, mid, high)]
        assert p2[0] < p2[1] < p2[2]


class TestExclusionAnalytic:
    def test_tier1_exclusion_ordering(self, row1):
        q = tt.TypicalQuery.tier1(0, 0.1)
        p_none = tt.outage_tier1(row1, q)
        for radius in (0.1, 0.3, 0.5):
            p_bs = tt.outage_tier1(
                row1.with_(exclusion=tt.ExclusionConfig.bs_exclusion(radius)), q)
            p_ue = tt.outage_tier1(
                row1.with_(exclusion=tt.ExclusionConfig.ue_exclusion(radius)), q)
            assert p_ue <= p_bs <= p_none

    def test_oversized_exclusion_rejected(self, row1):
        cfg = single_type_config(radius=0.5).with_(
            exclusion=tt.ExclusionConfig.ue_exclusion(0.9))
        with pytest.raises(NotImplementedError):
            tt.outage_tier1(cfg, tt.TypicalQuery.tier1(0, 0.1))


class TestLaplaceInvariants:
    def transforms(self, row1):
        yield tt.laplace_tier1_in(row1, 0)
        yield tt.laplace_tier1_out(row1, 0)
        yield tt.laplace_tier1_out(row1, 0, at_tier2=True, x_B=(0.3, 0.2))
        yield tt.laplace_tier2_total(row1)
        yield tt.laplace_tier2_intra(row1, 0)
        yield tt.tier1_total_laplace(row1)
        yield tt.tier1_placement_average(row1)

    def test_unit_at_zero_bounded_nonincreasing(self, row1):
        base = single_type_config(lam=0.3, mu=0.3, nu=10.0)
        for lap in self.transforms(base):
            assert lap(0.0) == pytest.approx(1.0, abs=1e-8)
            vals = [lap(s) for s in np.geomspace(1e-2, 1e2, 9)]
            assert all(0.0 < v <= 1.0 for v in vals)
            assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


class TestOrthogonalTransform:
    def test_identity_intensities_at_one_block(self, orthogonal_config):
        derived = tt.apply_orthogonal_thinning(
            orthogonal_config.with_(access=tt.AccessMode.orthogonal(1)))
        for a, b in zip(derived.tier1, orthogonal_config.tier1):
            assert a.intensity == b.intensity
        for a, b in zip(derived.tier2, orthogonal_config.tier2):
            for ca, cb in zip(a.ue_classes, b.ue_classes):
                assert ca.profile.amplitude == cb.profile.amplitude
        assert derived.drop_tier1_intracell and derived.drop_tier2_intracell

    def test_rejected_for_shared_mode(self, row1):
        with pytest.raises(ValueError):
            tt.apply_orthogonal_thinning(row1)

    def test_coefficient_nonlinear_in_thinning(self, row1):
        s = 1.0 / row1.tier1[0].target_power
        c_full = tt.coeff_C(row1, 0, s)
        thinned = single_type_config(nu=20.0 / 16.0)
        c_thin = tt.coeff_C(thinned, 0, s)
        assert c_thin > c_full / 16.0 * 1.05   # saturation makes C sublinear in nu


class TestAverageOutage:
    def test_reduces_to_single_tier(self, row1):
        only1 = single_type_config(mu=0.0)
        assert tt.average_outage(only1, 0.1) == pytest.approx(
            tt.outage_tier1(only1, tt.TypicalQuery.tier1(0, 0.1)), rel=1e-12)
        only2 = single_type_config(lam=0.0)
        assert tt.average_outage(only2, 0.1) == pytest.approx(
            tt.outage_tier2(only2, tt.TypicalQuery.tier2(0, 0, 0.1)), rel=1e-12)

    def test_rejects_multi_type(self, planning_config):
        with pytest.raises(ValueError):
            tt.average_outage(planning_config, 0.05)
