import numpy as np
import pytest
from hypothesis import given

from qloss.core import (
    I2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DimensionMismatch,
    SampleSpace,
    Tolerances,
    ValidationError,
    as_density,
    as_distribution,
    decode_matrix,
    encode_matrix,
    expectation,
    hermitian_basis,
    seminorm,
    stdv,
    symm_antisymm_ev,
    unvec,
    vec,
)
from qloss.localize import quantum_space
from qloss.rand import random_observable, random_state

from .conftest import RHO_MIX, RHO_PLUS, RHO_SY, dims, rng_for, seeds


class TestHermitianBasis:
    def test_one_dimensional(self):
        B = hermitian_basis(1)
        assert B.shape == (1, 1, 1)
        assert B[0, 0, 0] == pytest.approx(1.0)

    def test_qubit_is_scaled_pauli(self):
        B = hermitian_basis(2)
        for P, Bk in zip((I2, SIGMA_X, SIGMA_Y, SIGMA_Z), B):
            np.testing.assert_allclose(Bk, P / np.sqrt(2), atol=1e-15)

    @pytest.mark.parametrize("d", range(1, 7))
    def test_orthonormal(self, d):
        B = hermitian_basis(d)
        assert B.shape == (d * d, d, d)
        gram = np.einsum("iab,jba->ij", B, B)
        np.testing.assert_allclose(gram, np.eye(d * d), atol=1e-12)
        for Bk in B:
            np.testing.assert_allclose(Bk, Bk.conj().T, atol=0)

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValidationError):
            hermitian_basis(0)

    @given(seeds, dims)
    def test_vec_round_trip(self, seed, d):
        X = random_observable(d, rng_for(seed))
        np.testing.assert_allclose(unvec(vec(X)), X, atol=1e-12)

    @given(seeds, dims)
    def test_vec_is_isometric(self, seed, d):
        rng = rng_for(seed)
        X, Y = random_observable(d, rng), random_observable(d, rng)
        assert np.dot(vec(X), vec(Y)) == pytest.approx(np.trace(X @ Y).real, abs=1e-10)


class TestStatistics:
    def test_identity_expectation(self):
        rho = random_state(3, rng_for(1))
        assert expectation(np.eye(3), rho) == pytest.approx(1.0, abs=1e-12)

    def test_examples(self):
        assert expectation(SIGMA_Z, RHO_MIX) == pytest.approx(0.0, abs=1e-15)
        assert expectation(SIGMA_Y, RHO_SY) == pytest.approx(1.0, abs=1e-15)
        assert seminorm(SIGMA_X, RHO_MIX) == pytest.approx(1.0, abs=1e-15)
        assert seminorm(np.zeros((2, 2)), RHO_SY) == 0.0
        assert stdv(SIGMA_Z, RHO_PLUS) == pytest.approx(1.0, abs=1e-12)

    def test_classical(self):
        p = np.array([0.25, 0.75])
        f = np.array([2.0, -2.0])
        assert expectation(f, p) == pytest.approx(-1.0)
        assert seminorm(f, p) == pytest.approx(2.0)
        assert stdv(f, p) == pytest.approx(np.sqrt(3.0))

    def test_symm_antisymm(self):
        assert symm_antisymm_ev(SIGMA_Z, SIGMA_X, RHO_MIX) == pytest.approx((0.0, 0.0), abs=1e-15)
        assert symm_antisymm_ev(SIGMA_Z, SIGMA_X, RHO_SY) == pytest.approx((0.0, 1.0), abs=1e-15)

    @given(seeds, dims)
    def test_self_pair(self, seed, d):
        rng = rng_for(seed)
        A, rho = random_observable(d, rng), random_state(d, rng)
        sym, anti = symm_antisymm_ev(A, A, rho)
        assert sym == pytest.approx(expectation(A @ A, rho), abs=1e-10)
        assert anti == pytest.approx(0.0, abs=1e-12)

    @given(seeds, dims)
    def test_cauchy_schwarz(self, seed, d):
        rng = rng_for(seed)
        A, B, rho = random_observable(d, rng), random_observable(d, rng), random_state(d, rng)
        sym, anti = symm_antisymm_ev(A, B, rho)
        slack = seminorm(A, rho) * seminorm(B, rho) - np.hypot(sym, anti)
        assert slack >= -1e-10

    @given(seeds, dims)
    def test_seminorm_matches_gram(self, seed, d):
        rng = rng_for(seed)
        A, rho = random_observable(d, rng), random_state(d, rng, rank=int(rng.integers(1, d + 1)))
        G = quantum_space(rho).gram
        x = vec(A)
        assert seminorm(A, rho) ** 2 == pytest.approx(x @ G @ x, abs=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            expectation(np.eye(3), RHO_MIX)


class TestValidation:
    def test_density_checks(self):
        with pytest.raises(ValidationError, match="unit trace"):
            as_density(np.eye(2))
        with pytest.raises(ValidationError, match="positive"):
            as_density(np.diag([1.5, -0.5]))
        with pytest.raises(ValidationError, match="Hermitian"):
            as_density(np.array([[0.5, 1], [0, 0.5]]))

    def test_distribution_checks(self):
        with pytest.raises(ValidationError):
            as_distribution([0.5, 0.6])
        with pytest.raises(ValidationError):
            as_distribution([1.2, -0.2])
        np.testing.assert_allclose(as_distribution([0.3, 0.7]), [0.3, 0.7])

    def test_tolerances_replace(self):
        t = Tolerances().replace(holds=1e-6)
        assert t.holds == 1e-6 and t.equal == 1e-9
        with pytest.raises(ValueError):
            Tolerances().replace(bogus=1.0)

    def test_sample_space(self):
        s = SampleSpace.from_values([1, -1])
        assert s.labels == (1.0, -1.0)
        np.testing.assert_array_equal(s.value_function(), [1.0, -1.0])
        with pytest.raises(ValidationError):
            SampleSpace.range(2).value_function()
        with pytest.raises(ValidationError):
            SampleSpace(labels=(0, 0))
        prod = SampleSpace.range(2).product(SampleSpace.range(3))
        assert prod.labels[:3] == ((0, 0), (0, 1), (0, 2))


def test_matrix_encoding_round_trip():
    X = np.array([[1, 2 - 1j], [2 + 1j, -3]])
    assert encode_matrix(X)[0][1] == [2.0, -1.0]
    np.testing.assert_array_equal(decode_matrix(encode_matrix(X)), X)
    np.testing.assert_array_equal(decode_matrix([[1, 0], [0, 1]]), np.eye(2))
    with pytest.raises(ValidationError):
        decode_matrix([[1, "x"]])
