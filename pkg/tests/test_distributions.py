import json
from fractions import Fraction

import pytest

from zbest.distributions import (
    FiniteDistribution,
    SegmentMixture,
    max_cdf_difference,
    zero_bias_density_oracle,
    zero_bias_oracle_cdf,
)
from zbest.errors import InvalidDistribution, ZeroVariance

F = Fraction


def coin():
    return FiniteDistribution([(-1, F(1, 2)), (1, F(1, 2))])


class TestFiniteDistribution:
    def test_duplicate_atoms_merge(self):
        d = FiniteDistribution([(1, F(1, 4)), (1, F(1, 4)), (0, F(1, 2))])
        assert d.atoms == ((0, F(1, 2)), (1, F(1, 2)))

    def test_values_sorted_and_distinct(self):
        d = FiniteDistribution([(3, 0.25), (1, 0.5), (2, 0.25)])
        assert d.values == (1, 2, 3)
        assert len(set(d.values)) == 3

    def test_mass_must_be_one_exact(self):
        with pytest.raises(InvalidDistribution):
            FiniteDistribution([(0, F(1, 2)), (1, F(1, 3))])

    def test_mass_must_be_one_float(self):
        with pytest.raises(InvalidDistribution):
            FiniteDistribution([(0, 0.5), (1, 0.4)])
        # within 1e-12 passes
        FiniteDistribution([(0, 0.5), (1, 0.5 + 1e-13)])

    def test_negative_mass_rejected(self):
        with pytest.raises(InvalidDistribution):
            FiniteDistribution([(0, F(3, 2)), (1, F(-1, 2))])

    def test_moments_exact(self):
        d = FiniteDistribution([(-F(4, 3), F(1, 3)), (F(2, 3), F(2, 3))])
        assert d.mean == 0
        assert d.variance == F(8, 9)

    def test_cdf_and_left_limit(self):
        d = coin()
        assert d.cdf(-1) == F(1, 2)
        assert d.cdf_left(-1) == 0
        assert d.cdf(0) == F(1, 2)
        assert d.cdf(1) == 1

    def test_standardized(self):
        d = FiniteDistribution([(0, 0.25), (1, 0.5), (2, 0.25)])
        s = d.standardized()
        assert abs(s.mean) < 1e-12
        assert abs(s.variance - 1.0) < 1e-12

    def test_json_round_trip_exact(self):
        d = FiniteDistribution([(F(1, 3), F(2, 5)), (2, F(3, 5))])
        back = FiniteDistribution.from_jsonable(json.loads(d.to_json()))
        assert back.atoms == d.atoms

    def test_json_field_names(self):
        obj = coin().to_jsonable()
        assert set(obj) == {"atoms"}


class TestZeroBiasOracle:
    def test_fair_coin_at_zero(self):
        assert zero_bias_density_oracle(coin(), 0) == F(1, 2)

    def test_beyond_support_is_zero(self):
        d = coin()
        assert zero_bias_density_oracle(d, 2) == 0
        assert zero_bias_density_oracle(d, -2) == 0

    def test_zero_variance_rejected(self):
        with pytest.raises(ZeroVariance):
            zero_bias_density_oracle(FiniteDistribution([(3, 1)]), 0)

    def test_oracle_cdf_integrates_density(self):
        d = FiniteDistribution([(0, F(1, 4)), (1, F(1, 2)), (2, F(1, 4))])
        # piecewise-constant density: CDF is piecewise linear and hits 1
        assert zero_bias_oracle_cdf(d, 2) == 1
        assert zero_bias_oracle_cdf(d, 0) == 0
        mid = zero_bias_oracle_cdf(d, 1)
        assert mid == zero_bias_density_oracle(d, F(1, 2)) * 1


class TestSegmentMixture:
    def test_total_mass_enforced(self):
        with pytest.raises(InvalidDistribution):
            SegmentMixture(segments=[(0, 1, F(1, 2))])

    def test_segment_orientation_enforced(self):
        with pytest.raises(InvalidDistribution):
            SegmentMixture(segments=[(1, 0, 1)])

    def test_segments_sorted(self):
        m = SegmentMixture(segments=[(1, 2, F(1, 2)), (0, 1, F(1, 2))])
        assert m.segments[0][0] == 0

    def test_cdf_uniform(self):
        m = SegmentMixture(segments=[(-1, 1, 1)])
        assert m.cdf(0) == F(1, 2)
        assert m.cdf(-1) == 0
        assert m.cdf(1) == 1
        assert m.cdf(F(1, 2)) == F(3, 4)

    def test_moments_closed_form(self):
        m = SegmentMixture(segments=[(-1, 1, 1)])
        assert m.moment(1) == 0
        assert m.moment(2) == F(1, 3)
        # E[k X^{k-1}] for k = 3 over U[-1,1] is E[3X^2] = 1
        assert m.derivative_moment(3) == 1

    def test_atoms_and_segments_mix(self):
        m = SegmentMixture(atoms=[(0, F(1, 2))], segments=[(0, 2, F(1, 2))])
        assert m.cdf_left(0) == 0
        assert m.cdf(0) == F(1, 2)
        assert m.cdf(1) == F(3, 4)

    def test_scaled_flips_orientation(self):
        m = SegmentMixture(segments=[(0, 1, 1)])
        neg = m.scaled(-2)
        assert neg.segments == ((-2, 0, 1),)
        assert neg.cdf(-1) == F(1, 2)

    def test_shift(self):
        m = SegmentMixture(segments=[(0, 1, 1)]).shifted(3)
        assert m.segments == ((3, 4, 1),)

    def test_json_round_trip(self):
        m = SegmentMixture(atoms=[(F(1, 2), F(1, 4))], segments=[(0, 1, F(3, 4))])
        back = SegmentMixture.from_jsonable(json.loads(m.to_json()))
        assert back.atoms == m.atoms and back.segments == m.segments
        assert set(m.to_jsonable()) == {"atoms", "segments"}

    def test_equality_is_by_cdf_not_components(self):
        one = SegmentMixture(segments=[(-1, 1, 1)])
        two = SegmentMixture(segments=[(-1, 0, F(1, 2)), (0, 1, F(1, 2))])
        assert max_cdf_difference(one, two, points=301) == 0
