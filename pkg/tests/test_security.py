import math

import numpy as np
import pytest

from secmux.channels import (
    Dist,
    Dmc,
    EnumerationBudgetError,
    WiretapPair,
    kl_divergence,
    l1_distance,
)
from secmux.multiplex import MultiplexCode, generate_codebook
from secmux.security import (
    conditional_outputs,
    conditional_leakage,
    erasure_fraction,
    exact_error,
    exact_leakage,
    exact_vd,
    joint_leakage,
    mixture_distance_bound,
    pinsker_check,
    report_to_csv,
    security_report,
    verdu_han_lower_bound,
)


def four_symbol_code() -> MultiplexCode:
    """n=1 codebook over |X|=4 with four distinct codewords, sizes (2, 2)."""
    return MultiplexCode(
        n=1,
        sizes=(2, 2),
        codewords=np.array([[0], [1], [2], [3]]),
        threshold_a=0.5,
        input_dist=Dist.uniform(4),
        seed=0,
    )


def distinct_binary_code(a: float = 0.5) -> MultiplexCode:
    """n=2 binary codebook whose four codewords are the four binary words."""
    return MultiplexCode(
        n=2,
        sizes=(2, 2),
        codewords=np.array([[0, 0], [0, 1], [1, 0], [1, 1]]),
        threshold_a=a,
        input_dist=Dist.uniform(2),
        seed=0,
    )


class TestConditionalOutputs:
    def test_constant_wiretap_identical_rows(self):
        code = generate_codebook(Dist.uniform(2), 3, (2, 2), 0.3, seed=5)
        v = Dmc.constant(Dist(np.array([0.25, 0.75])), in_size=2)
        cond = conditional_outputs(code, v, t=1)
        assert np.max(np.abs(cond.per_k[0] - cond.per_k[1])) < 1e-15

    def test_identity_wiretap_groups_codewords(self):
        cond = conditional_outputs(four_symbol_code(), Dmc.identity(4), t=1)
        assert np.allclose(cond.per_k[0], [0.5, 0.5, 0.0, 0.0])
        assert np.allclose(cond.per_k[1], [0.0, 0.0, 0.5, 0.5])

    def test_mixture_conservation(self, rng):
        for seed in range(10):
            code = generate_codebook(Dist.uniform(2), 4, (2, 3), 0.3, seed=seed)
            v = Dmc.bsc(0.25)
            for t in (1, 2):
                cond = conditional_outputs(code, v, t)
                mix = cond.per_k.mean(axis=0)
                assert abs(mix.sum() - 1.0) < 1e-12

    def test_budget_exceeded(self):
        code = generate_codebook(Dist.uniform(2), 25, (2,), 0.3, seed=1)
        with pytest.raises(EnumerationBudgetError) as err:
            conditional_outputs(code, Dmc.bsc(0.1), t=1)
        assert err.value.required == 2 ** 25


class TestExactError:
    def test_identity_distinct_codewords_error_free(self):
        code = distinct_binary_code(a=0.5)
        w = Dmc.identity(2)
        for t in (1, 2):
            assert exact_error(code, w, Dist.uniform(2), t) == 0.0

    def test_threshold_too_high_all_erasures(self):
        code = distinct_binary_code(a=3.0)
        w = Dmc.identity(2)
        assert exact_error(code, w, Dist.uniform(2), 1) == 1.0
        assert erasure_fraction(code, w, Dist.uniform(2)) == 1.0

    def test_monte_carlo_cross_check(self):
        p = Dist.uniform(2)
        w = Dmc.bsc(0.1)
        code = generate_codebook(p, 4, (2, 2), 0.4, seed=7)
        exact = exact_error(code, w, p, t=1)

        rng = np.random.default_rng(99)
        trials = 100_000
        true_rows = rng.integers(0, code.num_codewords, size=trials)
        xs = code.codewords[true_rows]
        u = rng.random(size=(trials, code.n))
        cum = np.cumsum(w.rows, axis=1)
        ys = (u[:, :, None] > cum[xs]).sum(axis=2)

        out = p.probs @ w.rows
        p_y = np.prod(out[ys], axis=1)
        cut = 2.0 ** (code.threshold_a * code.n)
        member = np.vstack([
            np.prod(w.rows[code.codewords[j][None, :], ys], axis=1) > cut * p_y
            for j in range(code.num_codewords)
        ])
        counts = member.sum(axis=0)
        decoded = np.where(counts == 1, member.argmax(axis=0), -1)
        ks = np.unravel_index(np.arange(code.num_codewords), code.sizes)[0]
        truth_k = ks[true_rows]
        dec_k = np.where(decoded >= 0, ks[np.maximum(decoded, 0)], -1)
        mc = float(np.mean(dec_k != truth_k))
        sigma = math.sqrt(max(mc * (1 - mc), 1e-12) / trials)
        assert abs(mc - exact) < 3 * sigma + 1e-9

    def test_budget_exceeded(self):
        code = generate_codebook(Dist.uniform(2), 25, (2,), 0.3, seed=1)
        with pytest.raises(EnumerationBudgetError):
            exact_error(code, Dmc.bsc(0.1), Dist.uniform(2), 1)


class TestExactLeakage:
    def test_constant_wiretap_zero(self):
        code = generate_codebook(Dist.uniform(2), 3, (2, 2), 0.3, seed=5)
        v = Dmc.constant(Dist.uniform(3), in_size=2)
        total, rate = exact_leakage(code, v, 1)
        assert total == pytest.approx(0.0, abs=1e-12)
        assert rate == pytest.approx(0.0, abs=1e-12)

    def test_identity_wiretap_full_bit(self):
        total, rate = exact_leakage(four_symbol_code(), Dmc.identity(4), 1)
        assert total == pytest.approx(1.0, abs=1e-12)
        assert rate == pytest.approx(1.0, abs=1e-12)

    def test_two_routes_agree_on_random_instances(self):
        # the identity between the joint-MI route and the divergence route is
        # asserted inside exact_leakage; exercise it across many codebooks
        for seed in range(30):
            code = generate_codebook(Dist.uniform(2), 4, (2, 2), 0.3, seed=seed)
            for t in (1, 2):
                total, rate = exact_leakage(code, Dmc.bsc(0.3), t)
                assert rate == pytest.approx(total / code.n, abs=1e-12)

    def test_leak_zero_iff_vd_zero(self):
        v = Dmc.bsc(0.3)
        # structurally independent: both message values share one codeword
        same = MultiplexCode(
            n=2, sizes=(2,), codewords=np.array([[0, 1], [0, 1]]),
            threshold_a=0.3, input_dist=Dist.uniform(2), seed=0,
        )
        total, _ = exact_leakage(same, v, 1)
        assert total < 1e-9
        assert exact_vd(same, v, 1) < 1e-9
        for seed in range(10):
            code = generate_codebook(Dist.uniform(2), 4, (2, 2), 0.3, seed=seed)
            total, _ = exact_leakage(code, v, 1)
            vd = exact_vd(code, v, 1)
            assert (total < 1e-9) == (vd < 1e-9)


class TestExactVd:
    def test_identical_conditionals(self):
        code = generate_codebook(Dist.uniform(2), 3, (2, 2), 0.3, seed=5)
        v = Dmc.constant(Dist.uniform(2), in_size=2)
        assert exact_vd(code, v, 1) == pytest.approx(0.0, abs=1e-12)

    def test_disjoint_supports_maximal(self):
        assert exact_vd(four_symbol_code(), Dmc.identity(4), 1) == pytest.approx(2.0, abs=1e-12)

    def test_symmetric_and_bounded(self):
        for seed in range(10):
            code = generate_codebook(Dist.uniform(2), 4, (3, 2), 0.3, seed=seed)
            d = exact_vd(code, Dmc.bsc(0.2), 1)
            assert 0.0 <= d <= 2.0


class TestMixtureDistanceBound:
    def test_identical_conditionals_zero(self):
        code = generate_codebook(Dist.uniform(2), 3, (2, 2), 0.3, seed=5)
        v = Dmc.constant(Dist.uniform(2), in_size=2)
        lhs, rhs = mixture_distance_bound(code, v, 1)
        assert np.allclose(lhs, 0.0, atol=1e-12)
        assert np.allclose(rhs, 0.0, atol=1e-12)

    def test_two_values_exact_halving(self):
        for seed in range(10):
            code = generate_codebook(Dist.uniform(2), 4, (2, 4), 0.3, seed=seed)
            lhs, rhs = mixture_distance_bound(code, Dmc.bsc(0.3), 1)
            assert np.allclose(lhs, rhs / 2.0, atol=1e-12)

    def test_holds_on_100_random_codebooks(self):
        for seed in range(100):
            code = generate_codebook(Dist.uniform(2), 3, (3, 2), 0.3, seed=seed)
            lhs, rhs = mixture_distance_bound(code, Dmc.bsc(0.2), 1)
            assert np.all(lhs <= rhs + 1e-12)

    def test_single_value_is_error(self):
        code = generate_codebook(Dist.uniform(2), 3, (1, 4), 0.3, seed=5)
        with pytest.raises(ValueError, match="single message value"):
            mixture_distance_bound(code, Dmc.bsc(0.2), 1)


class TestPinsker:
    def test_zero_zero(self):
        assert pinsker_check(0.0, 0.0)

    def test_hand_example(self):
        p1 = np.array([1.0, 0.0])
        p2 = np.array([0.5, 0.5])
        d = kl_divergence(p1, p2)
        l1 = l1_distance(p1, p2)
        assert d == pytest.approx(1.0, abs=1e-12)
        assert l1 == pytest.approx(1.0, abs=1e-12)
        assert 1.0 / (2 * math.log(2)) == pytest.approx(0.721348, abs=1e-6)
        assert pinsker_check(d, l1)

    def test_detects_violation(self):
        assert not pinsker_check(0.1, 1.0)

    def test_every_divergence_distance_pair_from_runs(self):
        for seed in range(40):
            code = generate_codebook(Dist.uniform(2), 4, (2, 2), 0.3, seed=seed)
            cond = conditional_outputs(code, Dmc.bsc(0.25), 1)
            mix = cond.per_k.mean(axis=0)
            lhs, _ = mixture_distance_bound(code, Dmc.bsc(0.25), 1)
            for k in range(cond.per_k.shape[0]):
                d = kl_divergence(cond.per_k[k], mix)
                assert pinsker_check(d, lhs[k])


class TestVerduHan:
    def test_identity_channel_trivial_bound(self):
        code = MultiplexCode(
            n=2, sizes=(2,), codewords=np.array([[0, 0], [1, 1]]),
            threshold_a=0.3, input_dist=Dist.uniform(2), seed=0,
        )
        gamma = 0.05
        got = verdu_han_lower_bound(code, Dmc.identity(2), gamma)
        assert got == pytest.approx(-math.exp(-2 * gamma), abs=1e-12)

    def test_never_exceeds_one(self):
        for seed in range(10):
            code = generate_codebook(Dist.uniform(2), 4, (2, 2), 0.3, seed=seed)
            assert verdu_han_lower_bound(code, Dmc.bsc(0.1), 0.05) <= 1.0

    def test_total_error_dominates_bound(self):
        p = Dist.uniform(2)
        w = Dmc.bsc(0.1)
        for seed in range(15):
            code = generate_codebook(p, 6, (4, 4), 0.35, seed=seed)
            bound = verdu_han_lower_bound(code, w, gamma=0.05)
            total = sum(exact_error(code, w, p, t) for t in (1, 2))
            assert total >= bound - 1e-12

    def test_gamma_must_be_positive(self):
        code = generate_codebook(Dist.uniform(2), 3, (2,), 0.3, seed=0)
        with pytest.raises(ValueError):
            verdu_han_lower_bound(code, Dmc.bsc(0.1), 0.0)


class TestReport:
    def test_fields_and_csv(self, tmp_path):
        pair = WiretapPair(Dmc.bsc(0.1), Dmc.bsc(0.3))
        p = Dist.uniform(2)
        code = generate_codebook(p, 4, (2, 2), 0.3, seed=11)
        report = security_report(code, pair, p)
        assert len(report.per_message) == 2
        for r in report.per_message:
            assert 0.0 <= r.eps <= 1.0
            assert r.leak_rate == pytest.approx(r.leak_total / code.n, abs=1e-12)
            assert 0.0 <= r.vd <= 2.0
            assert r.l_t == 2
        path = tmp_path / "report.csv"
        report_to_csv(report, path, {"master_seed": 11})
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# master_seed=11")
        assert lines[1] == "t,M_t,L_t,eps,leak_total_bits,leak_rate,vd,erasure_frac"
        assert len(lines) == 4


class TestJointAndConditionalLeakage:
    def test_chain_rule(self):
        v = Dmc.bsc(0.2)
        for seed in range(8):
            code = generate_codebook(Dist.uniform(2), 4, (2, 2), 0.3, seed=seed)
            joint = joint_leakage(code, v)
            i1, _ = exact_leakage(code, v, 1)
            i2_given_1 = conditional_leakage(code, v, t=2, given=1)
            assert joint == pytest.approx(i1 + i2_given_1, abs=1e-9)

    def test_conditioning_on_self_rejected(self):
        code = generate_codebook(Dist.uniform(2), 3, (2, 2), 0.3, seed=0)
        with pytest.raises(ValueError):
            conditional_leakage(code, Dmc.bsc(0.2), t=1, given=1)
