from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from zbest.errors import (
    EmptyCandidateSet,
    InvalidDistribution,
    NTooSmall,
    OddN,
    PreconditionViolation,
)
from zbest.lightbulb import (
    ToggleMatrix,
    dagger_stage_rows,
    final_states,
    lightbulb_moments,
    sample_configuration,
    sample_dagger_coupling,
    sample_size_bias_coupling,
    swap_toggles,
    zero_bias_sample,
)

F = Fraction


def matrix_from_rows(n, rows_as_sets):
    rows = []
    for s in rows_as_sets:
        mask = 0
        for i in s:
            mask |= 1 << i
        rows.append(mask)
    return ToggleMatrix(n, tuple(rows))


def staircase4():
    # rows {0}, {0,1}, {0,1,2}, {0,1,2,3}: column sums (4,3,2,1)
    return matrix_from_rows(4, [{0}, {0, 1}, {0, 1, 2}, {0, 1, 2, 3}])


class TestToggleMatrix:
    def test_row_sums_enforced(self):
        with pytest.raises(InvalidDistribution):
            ToggleMatrix(2, (0b01, 0b01))

    def test_bits_outside_range_rejected(self):
        with pytest.raises(InvalidDistribution):
            ToggleMatrix(2, (0b100, 0b11))

    def test_final_states_staircase(self):
        indicators, y = final_states(staircase4())
        assert indicators == (0, 1, 0, 1)
        assert y == 2

    def test_single_bulb(self):
        x = ToggleMatrix(1, (1,))
        assert final_states(x) == ((1,), 1)


class TestSampleConfiguration:
    def test_single_bulb_deterministic(self):
        rng = np.random.default_rng(0)
        assert sample_configuration(1, rng).rows == (1,)

    def test_last_row_all_ones(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            x = sample_configuration(5, rng)
            assert x.rows[-1] == (1 << 5) - 1

    def test_row_sizes(self):
        rng = np.random.default_rng(1)
        x = sample_configuration(8, rng)
        for r_idx, mask in enumerate(x.rows):
            assert bin(mask).count("1") == r_idx + 1

    def test_uniform_over_96_configurations(self):
        # chi-square goodness of fit over the full n=4 state space
        rng = np.random.default_rng(20240614)
        n_samples = 1_000_000
        counts = Counter()
        for _ in range(n_samples):
            counts[sample_configuration(4, rng).rows] += 1
        assert len(counts) == 96
        observed = np.array([counts[k] for k in sorted(counts)])
        p = stats.chisquare(observed).pvalue
        assert p > 0.001

    def test_parity_invariant(self):
        # Y has the parity of 1 + 2 + ... + n on every draw
        rng = np.random.default_rng(7)
        for n in (4, 5, 6, 9):
            want = (n * (n + 1) // 2) % 2
            for _ in range(50):
                _, y = final_states(sample_configuration(n, rng))
                assert y % 2 == want


class TestSwapToggles:
    def test_same_index_is_identity(self):
        x = staircase4()
        assert swap_toggles(x, 1, 2, 2).rows == x.rows

    def test_double_application_is_identity(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            x = sample_configuration(6, rng)
            r = int(rng.integers(0, 6))
            i = int(rng.integers(0, 6))
            j = int(rng.integers(0, 6))
            assert swap_toggles(swap_toggles(x, r, i, j), r, i, j).rows == x.rows

    def test_row_sums_preserved(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            x = sample_configuration(5, rng)
            y = swap_toggles(x, 2, 0, 4)
            for r_idx, mask in enumerate(y.rows):
                assert bin(mask).count("1") == r_idx + 1

    def test_invalid_indices(self):
        with pytest.raises(ValueError):
            swap_toggles(staircase4(), 9, 0, 1)


class TestSizeBiasCoupling:
    def test_requires_even_n(self):
        rng = np.random.default_rng(0)
        x = sample_configuration(5, rng)
        with pytest.raises(OddN):
            sample_size_bias_coupling(x, rng)

    def test_requires_n_at_least_4(self):
        rng = np.random.default_rng(0)
        x = sample_configuration(2, rng)
        with pytest.raises(NTooSmall):
            sample_size_bias_coupling(x, rng)

    def test_difference_is_zero_or_two(self):
        rng = np.random.default_rng(8)
        for _ in range(300):
            x = sample_configuration(6, rng)
            x_pp, i, j = sample_size_bias_coupling(x, rng)
            _, y = final_states(x)
            _, y_pp = final_states(x_pp)
            assert y_pp - y in (0, 2)
            assert x.bit(x.middle_row, i) != x.bit(x.middle_row, j)

    def test_unchanged_when_bulb_on(self):
        rng = np.random.default_rng(9)
        seen_on = 0
        for _ in range(300):
            x = sample_configuration(4, rng)
            indicators, _ = final_states(x)
            x_pp, i, j = sample_size_bias_coupling(x, rng)
            if indicators[i] == 1:
                seen_on += 1
                assert x_pp.rows == x.rows
        assert seen_on > 50


class TestDaggerStages:
    def test_n4_uses_both_outer_stages(self):
        assert dagger_stage_rows(4) == (0, 2)

    def test_n6_avoids_extreme_and_middle_stages(self):
        # row indices 1..3 minus the middle row 2: stages {2, 4}
        assert dagger_stage_rows(6) == (1, 3)

    def test_larger_n(self):
        rows = dagger_stage_rows(10)
        assert 10 // 2 - 1 not in rows
        assert 0 not in rows and 10 - 2 not in rows


class TestDaggerCoupling:
    def draw_valid_pair(self, x, rng):
        n = x.n
        mid = x.middle_row
        while True:
            i = int(rng.integers(0, n))
            j = int(rng.integers(0, n))
            if x.bit(mid, i) != x.bit(mid, j):
                return i, j

    def test_precondition_checked(self):
        rng = np.random.default_rng(10)
        x = sample_configuration(6, rng)
        mid = x.middle_row
        same = [c for c in range(6) if x.bit(mid, c) == x.bit(mid, 0)]
        with pytest.raises(PreconditionViolation):
            sample_dagger_coupling(x, 0, same[-1], rng)

    def test_case_both_off_is_identity(self):
        rng = np.random.default_rng(11)
        found = 0
        while found < 40:
            x = sample_configuration(6, rng)
            indicators, y = final_states(x)
            i, j = self.draw_valid_pair(x, rng)
            if indicators[i] == 0 and indicators[j] == 0:
                cs = sample_dagger_coupling(x, i, j, rng)
                assert cs.x_dagger.rows == x.rows
                assert cs.y_dagger == y
                assert cs.y_ddagger == y + 2
                assert cs.k is None and cs.l is None
                found += 1

    def test_case_both_on_swaps_middle(self):
        rng = np.random.default_rng(12)
        found = 0
        while found < 40:
            x = sample_configuration(6, rng)
            indicators, y = final_states(x)
            i, j = self.draw_valid_pair(x, rng)
            if indicators[i] == 1 and indicators[j] == 1:
                cs = sample_dagger_coupling(x, i, j, rng)
                assert cs.x_dagger.rows == swap_toggles(x, x.middle_row, i, j).rows
                assert cs.y_dagger == y - 2
                # the middle swap is an involution back to x
                assert swap_toggles(cs.x_dagger, x.middle_row, i, j).rows == x.rows
                found += 1

    def test_invariants_on_many_samples_n6(self):
        rng = np.random.default_rng(13)
        for _ in range(400):
            x = sample_configuration(6, rng)
            i, j = self.draw_valid_pair(x, rng)
            cs = sample_dagger_coupling(x, i, j, rng)
            indicators_d, y_d = final_states(cs.x_dagger)
            assert y_d == cs.y_dagger
            assert indicators_d[i] == 0 and indicators_d[j] == 0
            assert cs.y_ddagger == cs.y_dagger + 2
            assert abs(cs.y_dagger - cs.y) <= 2
            for r_idx, mask in enumerate(cs.x_dagger.rows):
                assert bin(mask).count("1") == r_idx + 1
            for r_idx, mask in enumerate(cs.x_ddagger.rows):
                assert bin(mask).count("1") == r_idx + 1

    def test_involution_recovers_original(self):
        # phi_ab maps onto {both off}; applying the same swap again recovers x
        rng = np.random.default_rng(14)
        for _ in range(300):
            x = sample_configuration(6, rng)
            i, j = self.draw_valid_pair(x, rng)
            cs = sample_dagger_coupling(x, i, j, rng)
            indicators, _ = final_states(x)
            if cs.k is not None:
                back = swap_toggles(cs.x_dagger, cs.s, i, cs.k)
            elif cs.l is not None:
                back = swap_toggles(cs.x_dagger, cs.s, j, cs.l)
            elif indicators[i] == 1 and indicators[j] == 1:
                back = swap_toggles(cs.x_dagger, x.middle_row, i, j)
            else:
                back = cs.x_dagger
            assert back.rows == x.rows

    def test_never_stuck_for_n6(self):
        rng = np.random.default_rng(15)
        for _ in range(2000):
            x = sample_configuration(6, rng)
            i, j = self.draw_valid_pair(x, rng)
            sample_dagger_coupling(x, i, j, rng)  # must not raise

    def test_empty_candidate_set_occurs_at_n4(self):
        # the published construction is genuinely stuck with probability 1/8
        rng = np.random.default_rng(16)
        stuck = 0
        total = 4000
        for _ in range(total):
            x = sample_configuration(4, rng)
            i, j = self.draw_valid_pair(x, rng)
            try:
                sample_dagger_coupling(x, i, j, rng)
            except EmptyCandidateSet:
                stuck += 1
        # binomial(4000, 1/8): mean 500, sd ~18.6
        assert 400 < stuck < 600


class TestMoments:
    def test_n4(self):
        m = lightbulb_moments(4)
        assert (m.mu, m.sigma2, m.lambda_n) == (2, 1, 0)

    def test_n6(self):
        m = lightbulb_moments(6)
        assert m.lambda_n == F(-1, 10125)
        assert m.sigma2 == F(3, 2) * F(2024, 2025)

    def test_n100_variance_bound(self):
        m = lightbulb_moments(100)
        assert m.sigma2 <= 25
        assert m.lambda_n <= 0

    def test_even_range_bounds(self):
        for n in range(4, 202, 2):
            m = lightbulb_moments(n)
            assert m.lambda_n <= 0
            assert m.sigma2 <= F(n, 4)

    def test_too_small(self):
        with pytest.raises(NTooSmall):
            lightbulb_moments(1)


class TestZeroBiasSample:
    def test_pointwise_bound(self):
        rng = np.random.default_rng(17)
        for _ in range(500):
            y, y_star = zero_bias_sample(6, rng)
            assert abs(y_star - y) <= 4.0

    def test_mean_shift_at_n10(self):
        rng = np.random.default_rng(18)
        diffs = []
        for _ in range(4000):
            y, y_star = zero_bias_sample(10, rng)
            diffs.append(abs(y_star - y))
        mean = float(np.mean(diffs))
        se = float(np.std(diffs) / np.sqrt(len(diffs)))
        assert mean <= 3.0 + 3.0 * se

    def test_requires_even_n(self):
        with pytest.raises(OddN):
            zero_bias_sample(5, np.random.default_rng(0))
