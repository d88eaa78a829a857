import math

import numpy as np
import pytest

from secmux.capacity import RateTuple
from secmux.channels import Dist, Dmc, WiretapPair
from secmux.ensemble import (
    BoundInputs,
    achievability_params,
    ensemble_bounds,
    ensemble_experiment,
    eta,
    existence_check,
    mc_tail_estimate,
    trial_seeds,
)
from secmux.spectrum import iid_spectrum, tail_below
from conftest import binary_entropy


def bsc_inputs(n=8, sizes=(2, 2), a=0.30, b=0.35):
    pair = WiretapPair(Dmc.bsc(0.1), Dmc.bsc(0.3))
    return BoundInputs(pair=pair, p=Dist.uniform(2), n=n, sizes=sizes, a=a, b=b)


class TestEta:
    def test_endpoints(self):
        assert eta(0.0) == 0.0
        assert eta(1.0) == 0.0

    def test_half(self):
        assert eta(0.5) == pytest.approx(0.5, abs=1e-15)


class TestEnsembleBounds:
    def test_noiseless_main_kills_tail_term(self):
        pair = WiretapPair(Dmc.identity(2), Dmc.bsc(0.3))
        bi = BoundInputs(pair=pair, p=Dist.uniform(2), n=4, sizes=(2, 2), a=0.8, b=0.35)
        got = ensemble_bounds(bi)
        assert got.eps_bound == pytest.approx(4 * 2.0 ** (-0.8 * 4), abs=1e-12)

    def test_b_above_spectrum_max(self):
        bi = bsc_inputs(b=5.0)
        got = ensemble_bounds(bi)
        assert got.delta_n == 0.0
        ratio = 2.0 ** (5.0 * bi.n) / 2
        assert got.leak_bounds[0] == pytest.approx(ratio, rel=1e-12)
        assert got.d_bounds[0] == pytest.approx(2 * math.sqrt(ratio), rel=1e-12)

    def test_delta_one_edge(self):
        bi = bsc_inputs(b=-5.0)
        got = ensemble_bounds(bi)
        assert got.delta_n == pytest.approx(1.0, abs=1e-12)
        ratio = 2.0 ** (-5.0 * bi.n) / 2
        # eta(1) = 0, so only the alphabet term and the ratio survive
        assert got.leak_bounds[0] == pytest.approx(1.0 + ratio, rel=1e-9)

    def test_delta_matches_binomial_tail(self):
        bi = bsc_inputs()
        got = ensemble_bounds(bi)
        # only the all-correct word of BSC(0.3) exceeds b = 0.35 at n = 8
        assert got.delta_n == pytest.approx(0.7 ** 8, abs=1e-12)

    def test_per_message_bounds_follow_dummy_size(self):
        # message 2 has the larger size, hence the smaller dummy load and the
        # weaker secrecy bounds
        bi = bsc_inputs(sizes=(2, 4))
        got = ensemble_bounds(bi)
        assert bi.dummy_size(0) == 4 and bi.dummy_size(1) == 2
        assert got.leak_bounds[0] < got.leak_bounds[1]
        assert got.d_bounds[0] < got.d_bounds[1]


class TestEnsembleExperiment:
    def test_means_within_bounds(self):
        er = ensemble_experiment(bsc_inputs(), trials=50, master_seed=42)
        checks = er.bound_checks()
        assert all(bool(np.all(v)) for v in checks.values())
        assert er.all_within_bounds

    def test_constant_wiretap_no_leak(self):
        pair = WiretapPair(Dmc.bsc(0.1), Dmc.constant(Dist.uniform(2), 2))
        bi = BoundInputs(pair=pair, p=Dist.uniform(2), n=6, sizes=(2, 2), a=0.3, b=0.1)
        er = ensemble_experiment(bi, trials=10, master_seed=3)
        assert np.max(er.leak_rate) < 1e-12
        assert np.max(er.vd) < 1e-12

    def test_single_trial_has_no_stderr(self):
        er = ensemble_experiment(bsc_inputs(n=4), trials=1, master_seed=9)
        assert er.stderrs()["eps"] is None
        # comparison falls back to the raw value
        assert set(er.bound_checks()) == {"eps", "vd", "leak_rate"}

    def test_deterministic_given_master_seed(self):
        a = ensemble_experiment(bsc_inputs(n=6), trials=8, master_seed=17)
        b = ensemble_experiment(bsc_inputs(n=6), trials=8, master_seed=17)
        assert np.array_equal(a.eps, b.eps)
        assert np.array_equal(a.leak_rate, b.leak_rate)
        assert a.seeds == b.seeds

    def test_thread_count_does_not_change_results(self):
        a = ensemble_experiment(bsc_inputs(n=6), trials=8, master_seed=17, threads=1)
        b = ensemble_experiment(bsc_inputs(n=6), trials=8, master_seed=17, threads=4)
        assert np.array_equal(a.eps, b.eps)
        assert np.array_equal(a.vd, b.vd)

    def test_seed_derivation_is_stable(self):
        assert trial_seeds(7, 3) == trial_seeds(7, 3)
        assert trial_seeds(7, 3) != trial_seeds(8, 3)


class TestExistenceCheck:
    def test_point_mass_input_trivially_true(self):
        pair = WiretapPair(Dmc.bsc(0.1), Dmc.bsc(0.3))
        bi = BoundInputs(pair=pair, p=Dist.point_mass(2, 0), n=4, sizes=(2, 2), a=0.3, b=0.35)
        er = ensemble_experiment(bi, trials=5, master_seed=1)
        assert existence_check(er)

    def test_single_trial_true(self):
        er = ensemble_experiment(bsc_inputs(n=4), trials=1, master_seed=2)
        assert existence_check(er)

    def test_experiment_config(self):
        er = ensemble_experiment(bsc_inputs(), trials=50, master_seed=42)
        assert existence_check(er)


class TestAchievabilityParams:
    def pair(self):
        return WiretapPair(Dmc.bsc(0.05), Dmc.bsc(0.2))

    def test_threshold_arithmetic(self):
        bi = achievability_params(
            Dist.uniform(2), self.pair(), RateTuple((0.30, 0.30)), gamma=0.02, n=8
        )
        i_w = 1.0 - binary_entropy(0.05)
        i_v = 1.0 - binary_entropy(0.2)
        assert bi.a == pytest.approx(i_w - 0.01, abs=1e-12)
        assert bi.b == pytest.approx(i_v + 0.01, abs=1e-12)
        assert bi.sizes == (round(2.0 ** 2.4),) * 2

    def test_dummy_margin_violation_is_named(self):
        with pytest.raises(ValueError, match="dummy-rate margin"):
            achievability_params(
                Dist.uniform(2), self.pair(), RateTuple((0.30, 0.30)), gamma=0.1, n=8
            )

    def test_tight_total_rate_rejected(self):
        from secmux.channels import mutual_information

        i_w = mutual_information(Dist.uniform(2), self.pair().main)
        rt = RateTuple((0.25, 0.25))
        gamma = i_w - rt.total
        with pytest.raises(ValueError, match="total-rate margin"):
            achievability_params(Dist.uniform(2), self.pair(), rt, gamma=gamma, n=8)

    def test_doubling_n_doubles_log_sizes(self):
        rt = RateTuple((0.33, 0.33))
        p = Dist.uniform(2)
        small = achievability_params(p, self.pair(), rt, gamma=0.004, n=8)
        large = achievability_params(p, self.pair(), rt, gamma=0.004, n=16)
        for m_small, m_large in zip(small.sizes, large.sizes):
            assert math.log2(m_large) == pytest.approx(2 * math.log2(m_small), abs=0.25)

    def test_slack_guarantees(self):
        rt = RateTuple((0.33, 0.33))
        gamma = 0.004
        for n in (4, 6, 8, 10):
            bi = achievability_params(Dist.uniform(2), self.pair(), rt, gamma, n)
            ideal = 2.0 ** (-n * gamma / 2.0)
            term_eps = bi.num_codewords * 2.0 ** (-bi.a * n)
            assert term_eps <= bi.slack_eps * ideal * (1 + 1e-9)
            for t in range(bi.T):
                term_leak = 2.0 ** (bi.b * n) / bi.dummy_size(t)
                assert term_leak <= bi.slack_leak * ideal * (1 + 1e-9)

    def test_normalized_terms_decay_geometrically(self):
        # with the rounding slack factored out, each extra pair of symbols
        # shrinks the error and leakage terms by at least 2^(-gamma)
        rt = RateTuple((0.33, 0.33))
        gamma = 0.004
        prev_eps = prev_leak = None
        for n in (4, 6, 8, 10):
            bi = achievability_params(Dist.uniform(2), self.pair(), rt, gamma, n)
            eps_term = bi.num_codewords * 2.0 ** (-bi.a * n) / bi.slack_eps
            leak_term = max(
                2.0 ** (bi.b * n) / bi.dummy_size(t) for t in range(bi.T)
            ) / bi.slack_leak
            if prev_eps is not None:
                assert eps_term <= prev_eps * 2.0 ** (-gamma) * (1 + 1e-9)
                assert leak_term <= prev_leak * 2.0 ** (-gamma) * (1 + 1e-9)
            prev_eps, prev_leak = eps_term, leak_term


class TestDeltaTrend:
    def test_nonincreasing_when_only_top_atom_qualifies(self):
        # BSC(0.1) with b = 0.7 > I = 0.531: at every n in the set only the
        # all-correct word exceeds the threshold, so delta_n = 0.9^n exactly.
        # (At thresholds where new binomial atoms cross in, e.g. BSC(0.3)
        # with b = 0.35 from n=8 to n=12, delta_n is not monotone.)
        p = Dist.uniform(2)
        v = Dmc.bsc(0.1)
        deltas = []
        for n in (2, 4, 8, 12):
            pair = WiretapPair(Dmc.identity(2), v)
            bi = BoundInputs(pair=pair, p=p, n=n, sizes=(2, 2), a=0.5, b=0.7)
            got = ensemble_bounds(bi)
            assert got.delta_n == pytest.approx(0.9 ** n, abs=1e-12)
            deltas.append(got.delta_n)
        assert all(x >= y for x, y in zip(deltas, deltas[1:]))


class TestMonteCarloTails:
    def test_matches_exact_tail(self):
        p = Dist.uniform(2)
        w = Dmc.bsc(0.1)
        spec = iid_spectrum(p, w, 6)
        exact = tail_below(spec, 0.4)
        est, err = mc_tail_estimate(p, w, 6, 0.4, side="below", trials=100_000, seed=5)
        assert abs(est - exact) < 3 * err + 1e-9

    def test_above_side(self):
        p = Dist.uniform(2)
        w = Dmc.bsc(0.3)
        spec = iid_spectrum(p, w, 4)
        from secmux.spectrum import tail_above

        exact = tail_above(spec, 0.1)
        est, err = mc_tail_estimate(p, w, 4, 0.1, side="above", trials=100_000, seed=6)
        assert abs(est - exact) < 3 * err + 1e-9

    def test_bad_side_rejected(self):
        with pytest.raises(ValueError):
            mc_tail_estimate(Dist.uniform(2), Dmc.bsc(0.1), 4, 0.1, side="middle", trials=10, seed=0)
