"""Spectral sequences, partition sums, and tail coefficients."""

import math

import numpy as np
import pytest
from scipy import integrate

from entrocap import (Divergent, InvalidTolerance, ProbabilitySpectrum,
                      SpectralSequence, ValidationFailed, c_thresholds,
                      decrease_coefficient, h_star, increase_coefficient,
                      increase_coefficient_probe, partition_moments)

LN2 = math.log(2.0)


def geometric_spectrum():
    return ProbabilitySpectrum.from_sequence(SpectralSequence.affine(LN2, 0.0))


def footnote_seq():
    return SpectralSequence.power_log(3.0)


class TestPartitionMoments:
    def test_geometric_closed_form(self):
        # h_k = k-1 at lam = ln 2: z = sum 2^-(k-1) = 2, e = sum (k-1) 2^-(k-1) = 2
        seq = SpectralSequence.affine(1.0, -1.0)
        pm = partition_moments(seq, LN2, 1e-10)
        assert pm.z == pytest.approx(2.0, abs=1e-10)
        assert pm.e == pytest.approx(2.0, abs=1e-9)
        # v = sum (k-1)^2 2^-(k-1) = 6
        assert pm.v == pytest.approx(6.0, abs=1e-8)
        assert pm.tail_bound <= 1e-10 * pm.z

    def test_slow_family_matches_bracketing_oracle(self):
        # independent two-sided bracket: S(N) <= z <= S(N) + integral_N^inf
        seq = footnote_seq()
        pm = partition_moments(seq, 1.0, 1e-9)
        n = 400_000
        ks = np.arange(1, n + 1, dtype=float)
        s = float(np.exp(-seq.values(ks)).sum())

        def integrand(u):
            return np.exp(-3.0 * np.log(u))  # ((x+1) log^3(x+1))^-1 dx, u = log(x+1)

        lo_tail = 0.0
        hi_tail = integrate.quad(integrand, math.log(n + 1.0), np.inf)[0]
        assert s + lo_tail - 1e-12 <= pm.z <= s + hi_tail + 1e-12

    def test_divergent_p_series(self):
        with pytest.raises(Divergent):
            partition_moments(SpectralSequence.power_log(0.0), 0.5)

    def test_divergence_detected_without_analytic_tag(self):
        seq = SpectralSequence("power-log", {"p": 0.0}, analytic_ic=None)
        with pytest.raises(Divergent):
            partition_moments(seq, 0.5, 1e-2)

    def test_second_moment_divergence_reported_as_inf(self):
        # at lam = 1 the footnote family has finite z, e but divergent v
        pm = partition_moments(footnote_seq(), 1.0, 1e-9)
        assert np.isfinite(pm.z) and np.isfinite(pm.e)
        assert pm.v == math.inf

    def test_monotone_partition_sum(self):
        # strictly decreasing in lam for positive sequences
        for seq in (SpectralSequence.affine(1.0, 0.5),
                    SpectralSequence.power_log(0.5)):
            zs = [partition_moments(seq, lam, 1e-9).z
                  for lam in (1.05, 1.2, 1.5, 2.0)]
            assert all(a > b for a, b in zip(zs, zs[1:]))

    def test_mean_energy_decreasing(self):
        seq = footnote_seq()
        means = []
        for lam in (1.02, 1.1, 1.3, 1.8, 3.0):
            pm = partition_moments(seq, lam, 1e-9)
            means.append(pm.e / pm.z)
        assert all(a > b for a, b in zip(means, means[1:]))

    def test_tail_bound_is_true_bound_under_refinement(self):
        for seq in (SpectralSequence.affine(0.7, 0.1), footnote_seq()):
            lam = 1.3
            loose = partition_moments(seq, lam, 1e-4)
            tight = partition_moments(seq, lam, 1e-12)
            assert abs(loose.z - tight.z) < max(loose.tail_bound, 1e-15)
            assert abs(loose.e - tight.e) < max(loose.tail_bound, 1e-15)

    def test_explicit_list_is_exact(self):
        seq = SpectralSequence.explicit([1.0, 2.0, 5.0])
        pm = partition_moments(seq, 0.3, 1e-9)
        w = np.exp(-0.3 * np.array([1.0, 2.0, 5.0]))
        assert pm.z == pytest.approx(w.sum(), abs=1e-15)
        assert pm.tail_bound == 0.0

    def test_bad_arguments(self):
        with pytest.raises(InvalidTolerance):
            partition_moments(footnote_seq(), -1.0)
        with pytest.raises(InvalidTolerance):
            partition_moments(footnote_seq(), 1.5, rel_tol=0.5)


class TestCoefficients:
    def test_affine_ic_zero(self):
        assert increase_coefficient(SpectralSequence.affine(1.0, 0.0)).value == 0.0

    def test_log_growth_ic_one(self):
        # h_k = log(k+1): (log k)/h_k -> 1
        est = increase_coefficient(SpectralSequence.power_log(0.0))
        assert est.value == 1.0 and est.exact

    def test_limsup_estimator_flagged(self):
        seq = SpectralSequence("affine", {"a": 1.0, "b": 0.0}, analytic_ic=None)
        est = increase_coefficient(seq)
        assert not est.exact and est.value < 1e-3
        noisy = SpectralSequence("power-log", {"p": 0.0}, analytic_ic=None)
        est2 = increase_coefficient(noisy)
        assert not est2.exact and abs(est2.value - 1.0) < 1e-3

    def test_probe_locates_log_boundary(self):
        # the inverse-log reciprocal family transitions at exactly 1
        seq = SpectralSequence("reciprocal", {"q_model": "inverse-log"},
                               analytic_ic=None)
        est = increase_coefficient_probe(seq)
        assert 0.95 <= est.value <= 1.05

    def test_dc_equals_ic_of_neglog(self):
        geo = geometric_spectrum()
        assert decrease_coefficient(geo).value == 0.0
        f6 = ProbabilitySpectrum.from_sequence(footnote_seq())
        assert decrease_coefficient(f6).value == 1.0

    def test_finite_spectrum_dc_zero(self):
        spec = ProbabilitySpectrum.from_entries([0.5, 0.5])
        assert decrease_coefficient(spec).value == 0.0


class TestHStar:
    def test_affine_diverges(self):
        res = h_star(SpectralSequence.affine(1.0, -1.0))
        assert res.value == math.inf and res.branch == "divergent"

    def test_footnote_value(self):
        res = h_star(footnote_seq())
        assert res.branch == "finite"
        pm = partition_moments(footnote_seq(), 1.0, 1e-10)
        assert res.value == pytest.approx(pm.e / pm.z, rel=1e-9)

    def test_explicit_convention(self):
        res = h_star(SpectralSequence.explicit([1.0, 2.0]))
        assert res.value == math.inf and res.branch == "finite-dimensional"


class TestCThresholds:
    def test_geometric_infinite(self):
        assert c_thresholds(geometric_spectrum()) == (math.inf, math.inf)

    def test_finite_spectrum(self):
        spec = ProbabilitySpectrum.from_entries([0.7, 0.3])
        c_star, c_upper = c_thresholds(spec)
        # dc = 0: uniform reference state
        expect_star = 0.5 * (math.log(0.5 / 0.7) + math.log(0.5 / 0.3))
        expect_upper = 0.5 * (-math.log(0.7) - math.log(0.3))
        assert c_star == pytest.approx(expect_star, abs=1e-12)
        assert c_upper == pytest.approx(expect_upper, abs=1e-12)
        assert c_upper == pytest.approx(c_star + math.log(2), abs=1e-12)

    def test_slow_state_boundary(self):
        # dc = 1 state: c_star = H(sigma||sigma) = 0, c_upper = H(sigma)
        f6 = ProbabilitySpectrum.from_sequence(footnote_seq())
        c_star, c_upper = c_thresholds(f6)
        assert c_star == pytest.approx(0.0, abs=1e-9)
        assert c_upper == pytest.approx(f6.entropy(), rel=1e-9)

    def test_threshold_identity_along_lambda(self):
        # c_upper(lam) = (c_star(lam) + log Tr s^lam)/(1 - lam) pointwise
        geo = geometric_spectrum()
        for lam in (0.3, 0.5, 0.8):
            a = geo.trace_power(lam)
            lhs = geo.mean_neglog(lam)
            rhs = (geo.rel_entropy_power(lam) + math.log(a)) / (1.0 - lam)
            assert lhs == pytest.approx(rhs, rel=1e-9)


class TestProbabilitySpectrum:
    def test_entries_validation(self):
        with pytest.raises(ValidationFailed):
            ProbabilitySpectrum.from_entries([0.5, 0.4])
        spec = ProbabilitySpectrum.from_entries([0.6, 0.4, 0.0])
        assert spec.dropped_rank == 1 and len(spec.entries) == 2

    def test_geometric_head_and_entropy(self):
        geo = geometric_spectrum()
        assert np.allclose(geo.head(4), [0.5, 0.25, 0.125, 0.0625], atol=1e-12)
        assert geo.entropy() == pytest.approx(2 * LN2, abs=1e-10)

    def test_power_state(self):
        geo = geometric_spectrum()
        half = geo.power(0.5)
        # sigma^0.5 normalized is geometric with ratio 2^-0.5
        r = 2.0**-0.5
        assert half.head(3)[1] / half.head(3)[0] == pytest.approx(r, abs=1e-12)

    def test_json_round_trip(self):
        geo = geometric_spectrum()
        again = ProbabilitySpectrum.from_json(geo.to_json())
        assert again.entropy() == pytest.approx(geo.entropy(), abs=1e-12)
        fin = ProbabilitySpectrum.from_entries([0.7, 0.3])
        again2 = ProbabilitySpectrum.from_json(fin.to_json())
        assert np.allclose(again2.entries, fin.entries)


def test_sequence_json_round_trip():
    seq = footnote_seq()
    again = SpectralSequence.from_json(seq.to_json())
    assert again == seq


def test_sequence_validation():
    with pytest.raises(ValidationFailed):
        SpectralSequence.affine(-1.0, 0.0)
    with pytest.raises(ValidationFailed):
        SpectralSequence.explicit([2.0, 1.0, -3.0])
    with pytest.raises(ValidationFailed):
        SpectralSequence("mystery", {})


def test_d_min_counts_minimal_levels():
    assert SpectralSequence.explicit([1.0, 1.0, 2.0]).d_min == 2
    assert footnote_seq().d_min == 1
