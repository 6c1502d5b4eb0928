import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qloss.core import I2, SIGMA_X, SIGMA_Z, NegativeRadicand, stdv
from qloss.localize import ProcessMaps
from qloss.loss import (
    NotRepresentative,
    composite_decomposition,
    disturbance,
    disturbance_rep,
    error,
    error_rep,
    gauge,
    gauge_decomposition,
    loss_gap_sq,
    lossless_report,
    variance_decomposition,
)
from qloss.process import Channel, dephasing, identity_channel, povm, projective_from_observable, trivial_measurement
from qloss.rand import (
    random_channel,
    random_distribution,
    random_function,
    random_observable,
    random_povm,
    random_state,
    representable_observable,
)

from .conftest import RHO_MIX, RHO_PLUS, dims, rng_for, seeds


def draw(seed, d, n=None):
    rng = rng_for(seed)
    rho = random_state(d, rng, rank=int(rng.integers(1, d + 1)))
    M = random_povm(d, n or int(rng.integers(1, 5)), rng, kraus_per=int(rng.integers(1, 3)))
    return rng, rho, M


class TestErrorExamples:
    def test_exact(self, Mz):
        assert error(SIGMA_Z, Mz, RHO_MIX).value <= 1e-12

    def test_unrelated(self, Mz):
        assert error(SIGMA_X, Mz, RHO_MIX).value == pytest.approx(1.0, abs=1e-12)

    @given(seeds, st.sampled_from([2, 3]))
    def test_trivial_measurement_gives_stdv(self, seed, d):
        rng = rng_for(seed)
        A, rho = random_observable(d, rng), random_state(d, rng)
        M = trivial_measurement(random_distribution(int(rng.integers(1, 4)), rng), d)
        assert abs(error(A, M, rho).value - stdv(A, rho)) <= 1e-10


class TestDisturbanceExamples:
    def test_dephasing_keeps_sigma_z(self, theta_z):
        rho = random_state(2, rng_for(4))
        assert disturbance(SIGMA_Z, theta_z, rho).value <= 1e-12

    def test_dephasing_destroys_sigma_x(self, theta_z):
        assert disturbance(SIGMA_X, theta_z, RHO_MIX).value == pytest.approx(1.0, abs=1e-12)

    @given(seeds, dims)
    def test_identity_channel(self, seed, d):
        rng = rng_for(seed)
        assert disturbance(random_observable(d, rng), identity_channel(d), random_state(d, rng)).value <= 1e-10


class TestGaugeExamples:
    def test_exact_reconstruction(self, Mz):
        assert gauge(SIGMA_Z, [1.0, -1.0], Mz, RHO_MIX) <= 1e-12

    def test_zero_function(self, Mz):
        assert gauge(SIGMA_X, [0.0, 0.0], Mz, RHO_MIX) == pytest.approx(1.0, abs=1e-12)

    @given(seeds, dims)
    def test_minimum_is_error(self, seed, d):
        rng, rho, M = draw(seed, d)
        A = random_observable(d, rng)
        m = ProcessMaps(M, rho)
        best = m.out_space.representative(m.push(m.in_space.localize(A)))
        eps = error(A, M, rho).value
        assert gauge(A, best, M, rho) == pytest.approx(eps, abs=1e-9)
        f = random_function(len(M.space), rng)
        assert gauge(A, f, M, rho) >= eps - 1e-10


class TestRepresentabilityExamples:
    def test_exact(self, Mz):
        e = error_rep(SIGMA_Z, Mz, RHO_MIX)
        assert e.representable and e.value <= 1e-12

    def test_not_representable(self, Mz):
        e = error_rep(SIGMA_X, Mz, RHO_MIX)
        assert not e.representable and math.isinf(e.value)

    def test_unsharp(self, M1):
        assert error_rep(SIGMA_Z, M1, RHO_MIX).value == pytest.approx(1.0, abs=1e-12)

    def test_disturbance_rep(self, theta_z):
        assert disturbance_rep(SIGMA_Z, theta_z, RHO_MIX).value <= 1e-12
        assert math.isinf(disturbance_rep(SIGMA_X, theta_z, RHO_MIX).value)


class TestLossless:
    def test_projective(self, Mz):
        r = lossless_report(SIGMA_Z, Mz, RHO_MIX)
        assert r.lossless and r.consistent

    def test_unrelated(self, Mz):
        r = lossless_report(SIGMA_X, Mz, RHO_MIX)
        assert not any(r.conditions.values())

    def test_dephasing(self, theta_z):
        r = lossless_report(SIGMA_Z, theta_z, RHO_PLUS)
        assert r.lossless

    @given(seeds, dims, st.sampled_from(["random", "projective", "representable"]))
    def test_conditions_agree(self, seed, d, kind):
        rng, rho, M = draw(seed, d)
        if kind == "projective":
            A = random_observable(d, rng)
            M = projective_from_observable(A)
        elif kind == "representable":
            A, _ = representable_observable(M, rng)
        else:
            A = random_observable(d, rng)
        r = lossless_report(A, M, rho)
        assert r.consistent, r.conditions
        if kind == "projective":
            assert r.lossless


class TestSeminormAxioms:
    @given(seeds, dims, st.floats(-3, 3))
    def test_homogeneity(self, seed, d, t):
        rng, rho, M = draw(seed, d)
        A = random_observable(d, rng)
        assert error(t * A, M, rho).value == pytest.approx(abs(t) * error(A, M, rho).value, abs=1e-10)
        theta = random_channel(d, rng)
        assert disturbance(t * A, theta, rho).value == pytest.approx(abs(t) * disturbance(A, theta, rho).value, abs=1e-10)

    @given(seeds, dims)
    def test_triangle(self, seed, d):
        rng, rho, M = draw(seed, d)
        A, B = random_observable(d, rng), random_observable(d, rng)
        assert error(A, M, rho).value + error(B, M, rho).value >= error(A + B, M, rho).value - 1e-10
        theta = random_channel(d, rng)
        assert (disturbance(A, theta, rho).value + disturbance(B, theta, rho).value
                >= disturbance(A + B, theta, rho).value - 1e-10)

    @given(seeds, dims)
    def test_triangle_representable(self, seed, d):
        rng, rho, M = draw(seed, d)
        A, _ = representable_observable(M, rng)
        B, _ = representable_observable(M, rng)
        lhs = error_rep(A, M, rho).value + error_rep(B, M, rho).value
        assert lhs >= error_rep(A + B, M, rho).value - 1e-10
        assert error_rep(-2 * A, M, rho).value == pytest.approx(2 * error_rep(A, M, rho).value, abs=1e-9)


class TestTwoDefinitions:
    @given(seeds, dims)
    def test_gap_identity(self, seed, d):
        rng, rho, M = draw(seed, d)
        A, _ = representable_observable(M, rng)
        e, er = error(A, M, rho).value, error_rep(A, M, rho).value
        assert abs(er**2 - e**2 - loss_gap_sq(A, M, rho)) <= 1e-10
        assert er >= e - 1e-12

    @given(seeds, dims)
    def test_channel_gap_identity(self, seed, d):
        rng = rng_for(seed)
        theta = random_channel(d, rng, kraus_count=int(rng.integers(1, 3)))
        rho = random_state(d, rng)
        B = theta.adjoint_apply(random_observable(d, rng))
        n, nr = disturbance(B, theta, rho).value, disturbance_rep(B, theta, rho).value
        assert abs(nr**2 - n**2 - loss_gap_sq(B, theta, rho)) <= 1e-10

    @given(seeds, dims)
    def test_error_rep_dominates_always(self, seed, d):
        rng, rho, M = draw(seed, d)
        A = random_observable(d, rng)
        assert error_rep(A, M, rho).value >= error(A, M, rho).value - 1e-12

    @given(seeds, dims)
    def test_constrained_minimum(self, seed, d):
        # among all representatives, the partial inverse minimizes the gauge
        rng, rho, M = draw(seed, d, n=int(rng_for(seed).integers(3, 6)))
        A, f = representable_observable(M, rng)
        m = ProcessMaps(M, rho)
        best = error_rep(A, M, rho).value
        kernel = np.linalg.svd(m.pullback.matrix)[2][m.pullback.rank:]
        for _ in range(5):
            phi = m.out_space.localize(f) + (kernel.T @ rng.normal(size=len(kernel)) if len(kernel) else 0)
            g = m.out_space.representative(phi)
            assert gauge(A, g, M, rho) >= best - 1e-10

    @given(seeds, dims, st.integers(1, 6))
    def test_semicontinuity_surrogate(self, seed, d, k):
        rng, rho, M = draw(seed, d)
        A, _ = representable_observable(M, rng)
        X = random_observable(d, rng)
        target = error_rep(A, M, rho).value
        An = A + X / 10**k
        assert error_rep(An, M, rho).value >= target - error_rep(X, M, rho).value / 10**k - 1e-9


class TestGaugeDecomposition:
    @given(seeds, dims)
    def test_residual(self, seed, d):
        rng, rho, M = draw(seed, d)
        A, f = random_observable(d, rng), random_function(len(random_povm(d, 2, rng).effects) * 0 + len(M.space), rng)
        gd = gauge_decomposition(A, f, M, rho)
        assert abs(gd.residual) <= 1e-10
        assert gd.gauge_sq >= gd.error_sq - 1e-12


class TestVarianceDecomposition:
    def test_projective(self, Mz):
        vd = variance_decomposition([1.0, -1.0], SIGMA_Z, Mz, RHO_PLUS)
        np.testing.assert_allclose(vd.as_tuple(), (1, 1, 0, 0), atol=1e-12)

    def test_unsharp(self, M1):
        r = math.sqrt(2)
        vd = variance_decomposition([r, -r], SIGMA_Z, M1, RHO_MIX)
        np.testing.assert_allclose(vd.as_tuple(), (2, 1, 1, 0), atol=1e-12)

    @pytest.mark.parametrize("c", [0.0, 0.5, -1.3])
    def test_kernel_shift(self, c):
        # sigma_z measured with the -1 outcome split in two: (0, 1, -1) is a kernel direction
        P, Q = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
        M = povm([P, Q / 2, Q / 2])
        k = np.array([0.0, 1.0, -1.0])
        vd = variance_decomposition(np.array([1.0, -1.0, -1.0]) + c * k, SIGMA_Z, M, RHO_MIX)
        norm_k_sq = 0.25 + 0.25  # |k|^2 over the outcome distribution (1/2, 1/4, 1/4)
        assert vd.suboptimality == pytest.approx(c**2 * norm_k_sq, abs=1e-12)
        assert abs(vd.residual) <= 1e-12

    def test_rejects_non_representative(self, Mz):
        with pytest.raises(NotRepresentative):
            variance_decomposition([1.0, 1.0], SIGMA_Z, Mz, RHO_MIX)

    @given(seeds, dims)
    def test_residual(self, seed, d):
        rng, rho, M = draw(seed, d)
        A, f = representable_observable(M, rng)
        assert abs(variance_decomposition(f, A, M, rho).residual) <= 1e-10


class TestComposite:
    def test_trivial_secondary(self, theta_z, Mtriv):
        cd = composite_decomposition(SIGMA_X, theta_z, Mtriv, RHO_MIX)
        assert cd.error_sq == pytest.approx(1.0, abs=1e-12)
        assert cd.disturbance_sq == pytest.approx(1.0, abs=1e-12)
        assert cd.secondary_error_sq == pytest.approx(0.0, abs=1e-12)

    def test_everything_preserved(self, theta_z, Mz):
        cd = composite_decomposition(SIGMA_Z, theta_z, Mz, RHO_PLUS)
        assert cd.error_sq <= 1e-12 and cd.disturbance_sq <= 1e-12

    def test_identity_channel(self, Mz):
        cd = composite_decomposition(SIGMA_Z, identity_channel(2), Mz, RHO_MIX)
        assert cd.error_sq <= 1e-12 and cd.disturbance_sq <= 1e-12
        assert cd.consistent and all(cd.conditions.values())

    @given(seeds, dims)
    def test_decomposition(self, seed, d):
        rng = rng_for(seed)
        theta = random_channel(d, rng, kraus_count=int(rng.integers(1, 3)))
        L = random_povm(d, int(rng.integers(2, 5)), rng)
        rho = random_state(d, rng, rank=int(rng.integers(1, d + 1)))
        A = random_observable(d, rng)
        cd = composite_decomposition(A, theta, L, rho)
        assert abs(cd.residual) <= 1e-10
        assert cd.error_sq >= cd.disturbance_sq - 1e-10

    @given(seeds, dims)
    def test_representable_sandwich(self, seed, d):
        rng = rng_for(seed)
        theta = random_channel(d, rng, kraus_count=int(rng.integers(1, 3)))
        L = random_povm(d, int(rng.integers(d, d + 3)), rng)
        rho = random_state(d, rng, rank=int(rng.integers(1, d + 1)))
        from qloss.process import compose

        A, _ = representable_observable(compose(L, theta), rng)
        cd = composite_decomposition(A, theta, L, rho)
        assert cd.rep is not None
        rep = cd.rep
        assert rep["lower"] <= rep["error_sq"] + 1e-10
        assert rep["error_sq"] <= rep["upper"] + 1e-10
        assert abs(rep["decomposition_2_residual"]) <= 1e-10
        if rep["decomposition_1_residual"] is not None:
            assert abs(rep["decomposition_1_residual"]) <= 1e-10
        assert rep["error_sq"] >= rep["disturbance_sq"] - 1e-10
        assert cd.consistent, cd.conditions

    @given(seeds, dims)
    def test_projective_secondary_reduction(self, seed, d):
        rng = rng_for(seed)
        theta = random_channel(d, rng)
        L = projective_from_observable(random_observable(d, rng))
        rho = random_state(d, rng)
        from qloss.process import compose

        A, _ = representable_observable(compose(L, theta), rng)
        cd = composite_decomposition(A, theta, L, rho)
        if cd.projective_reduction_residual is not None:
            assert abs(cd.projective_reduction_residual) <= 1e-9


def test_negative_radicand_is_an_error():
    # a non-positive map: its pushforward can expand, which makes the contraction radicand negative
    S = np.diag([1.0, 3.0, 0.0, 0.0])
    ch = Channel.from_superop(S, 2, 2, mode="unchecked")
    with pytest.raises(NegativeRadicand):
        disturbance(SIGMA_X, ch, RHO_MIX)
    assert I2.shape == (2, 2) and dephasing(SIGMA_Z) is not None
