import json
from fractions import Fraction

import pytest

from zbest.coupling import (
    ZbestTripleLaw,
    expected_DG,
    monotone_sizebias_to_zerobias,
    verify_zbest_identity,
)
from zbest.distributions import max_cdf_difference
from zbest.errors import UnsupportedN
from zbest.lightbulb import lightbulb_moments
from zbest.lightbulb_exact import enumerate_exact

F = Fraction


@pytest.fixture(scope="module")
def ex4():
    return enumerate_exact(4)


@pytest.fixture(scope="module")
def ex6():
    return enumerate_exact(6)


class TestStateSpace:
    def test_n4_has_96_configurations(self, ex4):
        assert ex4.config_count == 96
        assert ex4.eta == F(2, 16 * 96) == F(1, 768)

    def test_n6_has_162000_configurations(self, ex6):
        assert ex6.config_count == 162_000

    def test_unsupported_n(self):
        for n in (2, 5, 8):
            with pytest.raises(UnsupportedN):
                enumerate_exact(n)


class TestMoments:
    def test_n4_exact(self, ex4):
        assert ex4.moments.mu == 2
        assert ex4.moments.sigma2 == 1
        assert ex4.moments.lambda_n == 0
        assert ex4.y_pmf.mean == 2 and ex4.y_pmf.variance == 1

    def test_n4_pmf(self, ex4):
        assert ex4.y_pmf.atoms == ((0, F(1, 8)), (2, F(3, 4)), (4, F(1, 8)))

    def test_n6_variance_matches_formula(self, ex6):
        assert ex6.y_pmf.variance == F(3, 2) * F(2024, 2025)
        assert ex6.moments.lambda_n == F(-1, 10125)

    def test_parity(self, ex4, ex6):
        assert all(v % 2 == 0 for v in ex4.y_pmf.values)
        assert all(v % 2 == 1 for v in ex6.y_pmf.values)


class TestSizeBiasLaw:
    @pytest.mark.parametrize("n", [4, 6])
    def test_pmf_is_y_weighted(self, n, ex4, ex6):
        ex = ex4 if n == 4 else ex6
        mu = ex.moments.mu
        for v in ex.y_pmf.values:
            assert ex.size_bias_pmf.prob_of(v) == v * ex.y_pmf.prob_of(v) / mu

    def test_moved_probability(self, ex4, ex6):
        assert ex4.p_size_bias_moved == F(1, 4)
        for ex in (ex4, ex6):
            assert ex.p_size_bias_moved == ex.moments.sigma2 / (2 * ex.moments.mu)

    def test_coupling_triple_from_joint(self, ex4):
        mu = ex4.moments.mu
        atoms = tuple((y_pp, y, mu, p) for (y, y_pp), p in ex4.sb_joint_pmf)
        triple = ZbestTripleLaw(atoms, ex4.y_pmf)
        assert verify_zbest_identity(triple, 5) == 0
        assert expected_DG(triple) == 1
        assert all(w_pp - w_p in (0, 2) for w_pp, w_p, _, _ in triple.triple_atoms)


class TestDaggerLaw:
    def test_uniform_on_support_n4(self, ex4):
        # reweighted measure is uniform: mass eta / p_moved per support atom
        assert ex4.dagger_support_size == 192
        assert F(1, ex4.dagger_support_size) == ex4.eta / ex4.p_size_bias_moved

    def test_y_dagger_pmf_n4(self, ex4):
        assert ex4.y_dagger_pmf.atoms == ((0, F(1, 2)), (2, F(1, 2)))
        assert ex4.y_ddagger_pmf.atoms == ((2, F(1, 2)), (4, F(1, 2)))

    def test_construction_gap_quantified_n4(self, ex4):
        assert ex4.empty_candidate_prob == F(1, 8)
        assert ex4.phi_defined_mass == F(7, 8)
        assert ex4.phi_conditional_uniform is True
        assert ex4.phi_max_abs_dagger_shift == 2

    def test_no_gap_n6(self, ex6):
        assert ex6.empty_candidate_prob == 0

    def test_y_star_law(self, ex4):
        assert ex4.y_star_law.segments == ((0, 2, F(1, 2)), (2, 4, F(1, 2)))


class TestZeroBias:
    @pytest.mark.parametrize("n", [4, 6])
    def test_identity_to_degree_5(self, n, ex4, ex6):
        ex = ex4 if n == 4 else ex6
        mu, s2 = ex.moments.mu, ex.moments.sigma2
        for k in range(1, 6):
            lhs = sum(p * (v - mu) * v**k for v, p in ex.y_pmf.atoms)
            assert lhs == s2 * ex.y_star_law.derivative_moment(k)

    def test_matches_reweighting_route(self, ex4):
        mu = ex4.moments.mu
        atoms = tuple((y_pp, y, mu, p) for (y, y_pp), p in ex4.sb_joint_pmf)
        triple = ZbestTripleLaw(atoms, ex4.y_pmf)
        other = monotone_sizebias_to_zerobias(triple)
        assert max_cdf_difference(ex4.y_star_law, other, 301) == 0


class TestExport:
    def test_jsonable_rationals(self, ex4):
        obj = ex4.to_jsonable()
        blob = json.dumps(obj)
        assert obj["y_pmf"]["0"] == "1/8"
        assert obj["empty_candidate_prob"] == "1/8"
        assert obj["eta"] == "1/768"
        assert "y_star_law" in obj and isinstance(blob, str)


class TestAgainstIndependentSampler:
    def test_sampled_dagger_marginal_matches_exact_n6(self, ex6):
        # the construction maps base draws (x, i, j) into the target support;
        # the sampled Y_dagger marginal must match the exact reweighted law
        import numpy as np
        from scipy import stats

        from zbest.lightbulb import sample_configuration, sample_dagger_coupling

        rng = np.random.default_rng(42)
        counts = {1: 0, 3: 0}
        n_draws = 4000
        for _ in range(n_draws):
            x = sample_configuration(6, rng)
            i = int(rng.integers(0, 6))
            rank = int(rng.integers(0, 3))
            mid = x.middle_row
            want = 1 - x.bit(mid, i)
            j = [c for c in range(6) if x.bit(mid, c) == want][rank]
            cs = sample_dagger_coupling(x, i, j, rng)
            counts[cs.y_dagger] += 1
        expected = [n_draws * float(ex6.y_dagger_pmf.prob_of(v)) for v in (1, 3)]
        p = stats.chisquare([counts[1], counts[3]], expected).pvalue
        assert p > 0.001
