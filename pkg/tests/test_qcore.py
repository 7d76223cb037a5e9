"""Density-matrix arithmetic and the entropy identity suite."""

import math

import numpy as np
import pytest

from entrocap import (Basis, DensityMatrix, DimensionMismatch,
                      ValidationFailed, dephase, entropy, partial_trace,
                      relative_entropy, trace_distance)
from helpers import (random_density, random_probabilities, random_pure,
                     scalar_entropy, scalar_kl)


class TestDensityMatrix:
    def test_validation(self):
        with pytest.raises(ValidationFailed):
            DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))  # not Hermitian
        with pytest.raises(ValidationFailed):
            DensityMatrix(np.diag([0.7, 0.7]))  # trace 1.4
        with pytest.raises(ValidationFailed):
            DensityMatrix(np.diag([1.5, -0.5]))  # negative eigenvalue
        with pytest.raises(ValidationFailed):
            DensityMatrix(np.ones((2, 3)))

    def test_json_round_trip(self):
        rng = np.random.default_rng(7)
        rho = random_density(rng, 3)
        again = DensityMatrix.from_json(rho.to_json())
        assert np.allclose(again.entries, rho.entries, atol=1e-15)

    def test_entries_read_only(self):
        rho = DensityMatrix.maximally_mixed(2)
        with pytest.raises(ValueError):
            rho.entries[0, 0] = 9.0


class TestEntropy:
    def test_maximally_mixed(self):
        assert entropy(DensityMatrix.maximally_mixed(4)) == pytest.approx(
            math.log(4), abs=1e-12)

    def test_pure_state(self):
        assert entropy(DensityMatrix.pure([1, 0, 0])) == pytest.approx(0.0, abs=1e-12)

    def test_diagonal_oracle(self):
        probs = [0.7, 0.2, 0.1]
        assert entropy(DensityMatrix.diagonal(probs)) == pytest.approx(
            scalar_entropy(probs), abs=1e-12)
        assert scalar_entropy(probs) == pytest.approx(0.801819, abs=5e-7)

    def test_basis_invariance(self):
        rng = np.random.default_rng(3)
        rho = random_density(rng, 4)
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        u, _ = np.linalg.qr(g)
        rotated = DensityMatrix(u @ rho.entries @ u.conj().T)
        assert entropy(rotated) == pytest.approx(entropy(rho), abs=1e-10)


class TestRelativeEntropy:
    def test_zero_on_equal(self):
        rng = np.random.default_rng(5)
        rho = random_density(rng, 3)
        assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-10)

    def test_orthogonal_pure_states_infinite(self):
        a = DensityMatrix.pure([1, 0])
        b = DensityMatrix.pure([0, 1])
        assert relative_entropy(a, b) == math.inf

    def test_diagonal_oracle(self):
        rho = DensityMatrix.diagonal([0.7, 0.3])
        sig = DensityMatrix.maximally_mixed(2)
        expect = scalar_kl([0.7, 0.3], [0.5, 0.5])
        assert relative_entropy(rho, sig) == pytest.approx(expect, abs=1e-12)
        assert expect == pytest.approx(0.082283, abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            relative_entropy(DensityMatrix.maximally_mixed(2),
                             DensityMatrix.maximally_mixed(3))

    def test_support_inclusion_finite(self):
        # rho supported inside supp sigma: finite even though sigma is singular
        sig = DensityMatrix.diagonal([0.5, 0.5, 0.0])
        rho3 = DensityMatrix.diagonal([0.6, 0.4, 0.0])
        val = relative_entropy(rho3, sig)
        assert val == pytest.approx(scalar_kl([0.6, 0.4], [0.5, 0.5]), abs=1e-10)


class TestDephase:
    def test_diagonal_fixed_point(self):
        rho = DensityMatrix.diagonal([0.3, 0.7])
        assert np.allclose(dephase(rho).entries, rho.entries, atol=1e-15)

    def test_plus_state(self):
        plus = DensityMatrix.pure([1, 1])
        assert np.allclose(dephase(plus).entries, np.diag([0.5, 0.5]), atol=1e-12)

    def test_entropy_gain_identity(self):
        # H(rho || Pi(rho)) = H(Pi(rho)) - H(rho) for any state and basis
        rng = np.random.default_rng(11)
        for _ in range(25):
            rho = random_density(rng, 3)
            pi_rho = dephase(rho)
            lhs = relative_entropy(rho, pi_rho)
            rhs = entropy(pi_rho) - entropy(rho)
            assert abs(lhs - rhs) < 1e-10

    def test_custom_basis_idempotent_and_entropy_nondecreasing(self):
        rng = np.random.default_rng(13)
        g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        u, _ = np.linalg.qr(g)
        basis = Basis(u)
        rho = random_density(rng, 3)
        once = dephase(rho, basis)
        twice = dephase(once, basis)
        assert np.allclose(once.entries, twice.entries, atol=1e-12)
        assert entropy(once) >= entropy(rho) - 1e-12


class TestTraceDistance:
    def test_extremes(self):
        a = DensityMatrix.pure([1, 0])
        b = DensityMatrix.pure([0, 1])
        assert trace_distance(a, a) == pytest.approx(0.0, abs=1e-14)
        assert trace_distance(a, b) == pytest.approx(2.0, abs=1e-12)

    def test_diagonal(self):
        assert trace_distance(DensityMatrix.diagonal([0.7, 0.3]),
                              DensityMatrix.maximally_mixed(2)) == pytest.approx(
            0.4, abs=1e-12)


class TestPartialTrace:
    def test_product_state(self):
        rng = np.random.default_rng(17)
        rho = random_density(rng, 2)
        sig = random_density(rng, 3)
        omega = DensityMatrix(np.kron(rho.entries, sig.entries))
        left = partial_trace(omega, (2, 3), side="right")
        right = partial_trace(omega, (2, 3), side="left")
        assert np.allclose(left.entries, rho.entries, atol=1e-12)
        assert np.allclose(right.entries, sig.entries, atol=1e-12)

    def test_maximally_entangled(self):
        vec = np.zeros(4)
        vec[0] = vec[3] = 2**-0.5
        omega = DensityMatrix.pure(vec)
        for side in ("left", "right"):
            red = partial_trace(omega, (2, 2), side=side)
            assert np.allclose(red.entries, np.eye(2) / 2, atol=1e-12)

    def test_random_reduction_is_state(self):
        rng = np.random.default_rng(19)
        omega = random_density(rng, 4)
        red = partial_trace(omega, (2, 2), side="right")
        assert red.dim == 2  # DensityMatrix construction re-validates

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            partial_trace(DensityMatrix.maximally_mixed(6), (2, 2), side="left")


class TestInequalities:
    def test_pinsker(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            rho, sig = random_density(rng, 3), random_density(rng, 3)
            assert relative_entropy(rho, sig) >= 0.5 * trace_distance(rho, sig) ** 2 - 1e-12

    def test_donald_identity(self):
        rng = np.random.default_rng(29)
        for _ in range(20):
            states = [random_density(rng, 3) for _ in range(3)]
            w = random_probabilities(rng, 3)
            probe = random_density(rng, 3)
            avg = DensityMatrix(sum(wi * s.entries for wi, s in zip(w, states)))
            lhs = sum(wi * relative_entropy(s, probe) for wi, s in zip(w, states))
            rhs = sum(wi * relative_entropy(s, avg) for wi, s in zip(w, states)) \
                + relative_entropy(avg, probe)
            assert abs(lhs - rhs) < 1e-10

    def test_mixing_concavity_bound(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            rho1, rho2 = random_density(rng, 3), random_density(rng, 3)
            lam = rng.uniform(0.05, 0.95)
            mix = DensityMatrix(lam * rho1.entries + (1 - lam) * rho2.entries)
            slack = entropy(mix) - lam * entropy(rho1) - (1 - lam) * entropy(rho2) \
                - 0.5 * lam * (1 - lam) * trace_distance(rho1, rho2) ** 2
            assert slack >= -1e-10

    def test_subadditivity(self):
        rng = np.random.default_rng(37)
        for _ in range(10):
            omega = random_density(rng, 6)
            h_ab = entropy(omega)
            h_a = entropy(partial_trace(omega, (2, 3), side="right"))
            h_b = entropy(partial_trace(omega, (2, 3), side="left"))
            assert h_ab <= h_a + h_b + 1e-10

    def test_pure_state_rank_deficient_pair(self):
        rng = np.random.default_rng(41)
        psi = random_pure(rng, 3)
        sig = random_density(rng, 3, rank=2)
        val = relative_entropy(psi, sig)
        assert val == math.inf or val > 0
