import numpy as np
import pytest
import scipy.constants as const
from hypothesis import given
from hypothesis import strategies as st

import dbnoise as dbn
from dbnoise.noise import NOISE_UNIT_SI

probs = st.floats(0.0, 1.0)


def enumerate_variance(f_a, f_b, t, p_ll, p_rr):
    """Independent oracle: explicit enumeration of the four injection
    events into the full P(N) table, then textbook variance."""
    r = 1.0 - t
    p_lr = 1.0 - p_ll - p_rr
    table = {
        (+1): f_a * f_b * p_rr + f_a * (1 - f_b) * t,
        (0): f_a * f_b * p_lr + (f_a * (1 - f_b) + (1 - f_a) * f_b) * r
        + (1 - f_a) * (1 - f_b),
        (-1): f_a * f_b * p_ll + (1 - f_a) * f_b * t,
    }
    mean = sum(n * p for n, p in table.items())
    second = sum(n * n * p for n, p in table.items())
    return second - mean * mean


class TestCountDistribution:
    def test_no_injection(self):
        d = dbn.count_distribution(dbn.OccupationPair(0.0, 0.0), 0.7, 0.3, 0.1, 0.1)
        assert d.p_zero == 1.0
        assert d.p_plus == d.p_minus == 0.0

    def test_single_source_partitions(self):
        t = 0.62
        d = dbn.count_distribution(dbn.OccupationPair(1.0, 0.0), t, 1 - t, 0.2, 0.2)
        assert d.p_plus == pytest.approx(t, rel=1e-15)
        assert d.p_zero == pytest.approx(1 - t, rel=1e-15)
        assert d.p_minus == 0.0

    def test_full_symmetric_injection(self):
        # oracle: event enumeration over the four injection cases
        p = 0.12
        d = dbn.count_distribution(dbn.OccupationPair(1.0, 1.0), 0.5, 0.5, p, p)
        assert d.p_plus == pytest.approx(p, rel=1e-15)
        assert d.p_minus == pytest.approx(p, rel=1e-15)
        assert d.p_zero == pytest.approx(1 - 2 * p, rel=1e-14)
        assert d.variance() == pytest.approx(
            enumerate_variance(1.0, 1.0, 0.5, p, p), abs=1e-15
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            dbn.count_distribution(dbn.OccupationPair(1.0, 1.0), 0.7, 0.2, 0.1, 0.1)
        with pytest.raises(ValueError):
            dbn.count_distribution(dbn.OccupationPair(1.0, 1.0), 0.5, 0.5, 0.6, 0.6)
        with pytest.raises(ValueError):
            dbn.OccupationPair(1.2, 0.0)


class TestNoise:
    def test_full_injection_no_same_side_is_quiet(self):
        rec = dbn.noise(dbn.OccupationPair(1.0, 1.0), t=0.5, p_ll=0.0)
        assert rec.s == 0.0

    def test_single_source_partition_noise(self):
        t = 0.3
        rec = dbn.noise(dbn.OccupationPair(1.0, 0.0), t=t, p_ll=0.0)
        assert rec.bracket == pytest.approx(t * (1 - t), rel=1e-14)

    def test_classical_partition_value(self):
        t = 0.41
        rec = dbn.noise(dbn.OccupationPair(1.0, 1.0), t=t, p_ll=(1 - t) * t)
        assert rec.bracket == pytest.approx(2 * t * (1 - t), rel=1e-14)

    def test_slope_in_p_ll_is_two(self):
        occ = dbn.OccupationPair(1.0, 1.0)
        s1 = dbn.noise(occ, 0.5, 0.10).s
        s2 = dbn.noise(occ, 0.5, 0.15).s
        assert (s2 - s1) / 0.05 == pytest.approx(2.0, rel=1e-12)

    def test_si_conversion(self):
        rec = dbn.noise(dbn.OccupationPair(1.0, 1.0), 0.5, 0.1)
        assert NOISE_UNIT_SI == pytest.approx(4 * const.e**2 / const.h, rel=1e-15)
        assert rec.s_si() == pytest.approx(rec.s * 4 * const.e**2 / const.h)

    @given(f_a=probs, f_b=probs, t=probs, frac=probs)
    def test_bounds_between_lb_and_classical(self, f_a, f_b, t, frac):
        # for P_LL up to the classical R*T value the bracket sits
        # between the independent-sources noise and the classical one
        r = 1.0 - t
        p_ll = frac * r * t
        occ = dbn.OccupationPair(f_a, f_b)
        bracket = dbn.noise(occ, t, p_ll).bracket
        lb = dbn.noise(occ, t, 0.0).bracket
        classical = (
            t * (f_a + f_b - 2 * f_a * f_b)
            - t**2 * (f_a - f_b) ** 2
            + 2 * r * t * f_a * f_b
        )
        assert bracket >= -1e-12
        assert lb - 1e-12 <= bracket <= classical + 1e-12


class TestVarianceIdentity:
    @given(f_a=probs, f_b=probs, t=probs, frac=probs)
    def test_residual_at_rounding_level(self, f_a, f_b, t, frac):
        p_ll = frac * min(t, 1.0 - t)  # keep P_LL + P_RR <= 1
        occ = dbn.OccupationPair(f_a, f_b)
        assert dbn.variance_identity_check(occ, t, p_ll) <= 1e-12

    def test_specific_values(self):
        occ = dbn.OccupationPair(1.0, 1.0)
        assert dbn.variance_identity_check(occ, 0.5, 0.25) <= 1e-12
        occ = dbn.OccupationPair(1.0, 0.0)
        assert dbn.variance_identity_check(occ, 0.3, 0.0) <= 1e-12
        occ = dbn.OccupationPair(0.0, 0.0)
        assert dbn.variance_identity_check(occ, 0.9, 0.0) == 0.0

    def test_matches_enumeration_oracle(self, rng):
        for _ in range(200):
            f_a, f_b, t, frac = rng.uniform(size=4)
            p_ll = frac * min(t, 1 - t)
            var = enumerate_variance(f_a, f_b, t, p_ll, p_ll)
            bracket = dbn.noise(dbn.OccupationPair(f_a, f_b), t, p_ll).bracket
            assert abs(var - bracket) <= 1e-12
