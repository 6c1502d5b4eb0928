import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from qloss.geninv import FdLinearMap, NotInRange, composition_report, min_norm_preimage, partial_inverse

from .conftest import rng_for, seeds


def random_map(rng, rows=None, cols=None, rank=None):
    rows = rows or int(rng.integers(1, 6))
    cols = cols or int(rng.integers(1, 6))
    rank = min(rows, cols) if rank is None else rank
    return rng.normal(size=(rows, rank)) @ rng.normal(size=(rank, cols))


def deficient_map(rng):
    rows, cols = int(rng.integers(1, 6)), int(rng.integers(1, 6))
    rank = int(rng.integers(0, min(rows, cols) + 1))
    return random_map(rng, rows, cols, rank)


class TestExamples:
    def test_identity(self):
        np.testing.assert_allclose(partial_inverse(np.eye(3)).matrix, np.eye(3), atol=1e-15)

    def test_rank_one_diagonal(self):
        np.testing.assert_allclose(partial_inverse(np.diag([1.0, 0.0])).matrix, np.diag([1.0, 0.0]), atol=1e-15)

    def test_row_functional(self):
        np.testing.assert_allclose(partial_inverse(np.array([[1.0, 0.0]])).matrix, [[1.0], [0.0]], atol=1e-15)

    def test_min_norm_preimage(self):
        np.testing.assert_allclose(min_norm_preimage(np.eye(2), [3.0, -1.0]), [3.0, -1.0])
        np.testing.assert_allclose(min_norm_preimage(np.array([[1.0, 0.0]]), [2.0]), [2.0, 0.0], atol=1e-15)
        with pytest.raises(NotInRange):
            min_norm_preimage(np.diag([1.0, 0.0]), [0.0, 1.0])

    def test_rank_and_range(self):
        T = FdLinearMap(np.diag([2.0, 1e-14, 0.0]))
        assert T.rank == 1
        assert T.in_range(np.array([5.0, 0, 0]))
        assert not T.in_range(np.array([0, 1.0, 0]))


class TestCompositionExamples:
    def test_identity_pair(self):
        rep = composition_report(np.eye(2), np.eye(2), [1.0, 2.0])
        assert all(rep.conditions.values())
        np.testing.assert_allclose(rep.ab_inv_z, [1.0, 2.0])

    def test_isometry(self):
        B = np.array([[1.0], [1.0]]) / np.sqrt(2)
        A = np.array([[2.0, -1.0], [0.5, 3.0]])
        rep = composition_report(A, B, A @ B @ [1.7])
        assert all(rep.conditions.values())

    def test_hand_solved_pair(self):
        rep = composition_report(np.array([[1.0, 1.0]]), np.diag([1.0, 0.0]), 1.0)
        np.testing.assert_allclose(rep.ab_inv_z, [1.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(rep.b_inv_a_inv_z, [0.5, 0.0], atol=1e-15)
        assert not rep.conditions["a"] and not rep.conditions["b"]
        assert rep.agree

    def test_outside_domain_flag(self):
        rep = composition_report(np.array([[1.0, 1.0]]), np.diag([1.0, 0.0]), 1.0)
        assert not rep.in_domain
        rep = composition_report(np.eye(2), np.diag([1.0, 0.0]), [1.0, 0.0])
        assert rep.in_domain and all(rep.conditions.values())


class TestAxioms:
    @given(seeds)
    def test_penrose_conditions(self, seed):
        T = deficient_map(rng_for(seed))
        Tm = partial_inverse(T).matrix
        assert np.abs(T @ Tm @ T - T).max(initial=0) <= 1e-11 * max(1, np.abs(T).max(initial=0)) ** 2
        assert np.abs(Tm @ T @ Tm - Tm).max(initial=0) <= 1e-11 * max(1, np.abs(Tm).max(initial=0)) ** 2

    @given(seeds)
    def test_matches_scipy(self, seed):
        T = random_map(rng_for(seed))
        np.testing.assert_allclose(partial_inverse(T).matrix, scipy.linalg.pinv(T), atol=1e-9)

    @given(seeds)
    def test_projectors(self, seed):
        T = deficient_map(rng_for(seed))
        pi = partial_inverse(T)
        for P, ref in ((pi.range_projector, T @ pi.matrix), (pi.coimage_projector, pi.matrix @ T)):
            np.testing.assert_allclose(P, P.T, atol=1e-11)
            np.testing.assert_allclose(P @ P, P, atol=1e-11)
            np.testing.assert_allclose(P, ref, atol=1e-10)
        # range projector fixes the range, coimage projector kills the kernel
        np.testing.assert_allclose(pi.range_projector @ T, T, atol=1e-10)
        null = scipy.linalg.null_space(T) if T.size else np.zeros((T.shape[1], 0))
        np.testing.assert_allclose(pi.coimage_projector @ null, 0, atol=1e-10)

    @given(seeds)
    def test_adjoint_law(self, seed):
        T = deficient_map(rng_for(seed))
        np.testing.assert_allclose(partial_inverse(T.T).matrix, partial_inverse(T).matrix.T, atol=1e-11)

    @given(seeds)
    def test_minimality(self, seed):
        rng = rng_for(seed)
        T = deficient_map(rng)
        x = rng.normal(size=T.shape[1])
        y = partial_inverse(T) @ (T @ x)
        assert np.linalg.norm(x) >= np.linalg.norm(y) - 1e-12
        kernel_part = x - y
        equal = abs(np.linalg.norm(x) - np.linalg.norm(y)) <= 1e-10
        assert equal == (np.linalg.norm(kernel_part) <= 1e-5)

    @given(seeds, st.booleans())
    def test_composition_conditions_agree(self, seed, square):
        rng = rng_for(seed)
        n, m, k = (int(v) for v in rng.integers(1, 5, size=3))
        if square:
            # diagonal maps hit every combination of kernel and range overlap
            n = m = k
            A = np.diag(rng.integers(0, 2, size=n) * rng.normal(size=n))
            B = np.diag(rng.integers(0, 2, size=n) * rng.normal(size=n))
            if rng.random() < 0.5:
                Q = np.linalg.qr(rng.normal(size=(n, n)))[0]
                B = Q @ B
        else:
            A = random_map(rng, n, m, int(rng.integers(0, min(n, m) + 1)))
            B = random_map(rng, m, k, int(rng.integers(0, min(m, k) + 1)))
        z = A @ B @ rng.normal(size=k)
        rep = composition_report(A, B, z)
        assert rep.agree, rep.conditions
        if rep.in_domain:
            assert abs(rep.residual_composition) <= 1e-9
        assert abs(rep.residual_mid) <= 1e-9


def test_composable_shapes():
    with pytest.raises(ValueError):
        composition_report(np.eye(2), np.eye(3), [1.0, 1.0])
