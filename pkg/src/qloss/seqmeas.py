"""Sequential and joint measurements, local joint-measurability and disturbance witnesses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, I2, SIGMA_X, SIGMA_Z, DimensionMismatch, SampleSpace, Tolerances, ValidationError
from .localize import LocalizedSpace, ProcessMaps, quantum_space
from .loss import NotRepresentable, error, error_rep
from .process import (
    KRAUS,
    POSITIVE,
    UNCHECKED,
    Channel,
    ClassicalProcess,
    Instrument,
    Measurement,
    compose,
    marginal_projection,
    projective_from_observable,
)


@dataclass(frozen=True, eq=False)
class JointMeasurement:
    """A measurement on ``factors[0] x factors[1]``, first factor outer (row-major)."""

    measurement: Measurement
    factors: tuple

    def __post_init__(self):
        s1, s2 = self.factors
        if self.measurement.space.labels != s1.product(s2).labels:
            raise ValidationError("joint measurement outcomes must be the row-major product of its factors")

    @classmethod
    def from_grid(cls, grid, space1: SampleSpace, space2: SampleSpace, tol: Tolerances = DEFAULT_TOL) -> "JointMeasurement":
        """``grid[i][j]`` is the effect of outcome ``(space1[i], space2[j])``."""
        if len(grid) != len(space1) or any(len(row) != len(space2) for row in grid):
            raise ValidationError("effect grid does not match the factor spaces")
        effects = [E for row in grid for E in row]
        m = Measurement.from_effects(effects, space=space1.product(space2), tol=tol)
        return cls(measurement=m, factors=(space1, space2))

    @property
    def dim(self) -> int:
        return self.measurement.dim

    def effect(self, i: int, j: int) -> np.ndarray:
        return self.measurement.effects[i * len(self.factors[1]) + j]


def induced(instr: Instrument, tol: Tolerances = DEFAULT_TOL) -> tuple[Measurement, Channel]:
    """The outcome statistics of an instrument and the channel it applies regardless of outcome."""
    eye = np.eye(instr.out_dim, dtype=complex)
    effects = tuple(b.adjoint_apply(eye) for b in instr.branches)
    M = Measurement(dim=instr.dim, space=instr.space, effects=effects).validate(tol)
    S = sum(b.superop for b in instr.branches)
    if all(b.kraus is not None for b in instr.branches):
        kraus = tuple(K for b in instr.branches for K in b.kraus)
        theta = Channel(instr.dim, instr.out_dim, S, KRAUS, kraus)
    else:
        modes = {b.positivity_mode for b in instr.branches}
        theta = Channel(instr.dim, instr.out_dim, S, UNCHECKED if UNCHECKED in modes else POSITIVE)
    theta.validate(tol)
    return M, theta


def sequential_joint(instr: Instrument, L: Measurement, tol: Tolerances = DEFAULT_TOL) -> JointMeasurement:
    """Joint measurement of the instrument outcome followed by ``L`` on the post-measurement state."""
    if L.dim != instr.out_dim:
        raise DimensionMismatch(f"secondary measurement acts on dimension {L.dim}, instrument outputs {instr.out_dim}")
    effects = tuple(b.adjoint_apply(E) for b in instr.branches for E in L.effects)
    m = Measurement(dim=instr.dim, space=instr.space.product(L.space), effects=effects).validate(tol)
    return JointMeasurement(measurement=m, factors=(instr.space, L.space))


def projections(J: JointMeasurement) -> tuple[ClassicalProcess, ClassicalProcess]:
    s1, s2 = J.factors
    return marginal_projection(s1, s2, 1), marginal_projection(s1, s2, 2)


def marginals(J: JointMeasurement, tol: Tolerances = DEFAULT_TOL) -> tuple[Measurement, Measurement]:
    pi1, pi2 = projections(J)
    return compose(pi1, J.measurement, tol), compose(pi2, J.measurement, tol)


def product_joint(M: Measurement, N: Measurement, tol: Tolerances = DEFAULT_TOL) -> JointMeasurement:
    """Global joint measurement of two commuting-effect measurements, ``E_i F_j``.

    Valid (positive) only when every pair of effects commutes, which is
    the case whenever one of them is trivial.
    """
    grid = [[(E @ F + F @ E) / 2 for F in N.effects] for E in M.effects]
    return JointMeasurement.from_grid(grid, M.space, N.space, tol)


def noisy_joint(a: float, b: float, tol: Tolerances = DEFAULT_TOL) -> JointMeasurement:
    """Qubit joint POVM ``E(i, j) = (I + i a sz + j b sx) / 4`` with ``i, j = +1, -1``.

    Positive only for ``a^2 + b^2 <= 1``; otherwise a ValidationError is raised.
    """
    signs = (1.0, -1.0)
    grid = [[(I2 + i * a * SIGMA_Z + j * b * SIGMA_X) / 4 for j in signs] for i in signs]
    space = SampleSpace.from_values(signs)
    return JointMeasurement.from_grid(grid, space, space, tol)


# -- local joint-measurability ---------------------------------------------------------------


@dataclass
class JointSpaces:
    """Localized spaces and maps of ``M``, ``N``, ``J`` and the two projections over one state."""

    state_space: LocalizedSpace
    M: ProcessMaps
    N: ProcessMaps
    J: ProcessMaps
    pi1: ProcessMaps
    pi2: ProcessMaps
    marginal_residual: float


def joint_spaces(M: Measurement, N: Measurement, J: JointMeasurement, rho, tol: Tolerances = DEFAULT_TOL) -> JointSpaces:
    if not (M.dim == N.dim == J.dim):
        raise DimensionMismatch("measurements act on different systems")
    if M.space != J.factors[0] or N.space != J.factors[1]:
        raise DimensionMismatch("joint measurement factors do not match the outcome spaces of M and N")
    S = quantum_space(rho, tol)
    mm = ProcessMaps(M, rho, tol, in_space=S)
    mn = ProcessMaps(N, rho, tol, in_space=S)
    mj = ProcessMaps(J.measurement, rho, tol, in_space=S)
    pi1, pi2 = projections(J)
    pj = mj.out_state
    residual = max(float(np.abs(pi1.matrix @ pj - mm.out_state).max()), float(np.abs(pi2.matrix @ pj - mn.out_state).max()))
    mp1 = ProcessMaps(pi1, pj, tol, in_space=mj.out_space, out_space=mm.out_space)
    mp2 = ProcessMaps(pi2, pj, tol, in_space=mj.out_space, out_space=mn.out_space)
    return JointSpaces(S, mm, mn, mj, mp1, mp2, residual)


@dataclass(frozen=True)
class LocalJointReport:
    marginal_residual: float
    pullback_residuals: tuple
    pushforward_residuals: tuple
    verdict: bool


def is_local_joint(M: Measurement, N: Measurement, J: JointMeasurement, rho, tol: Tolerances = DEFAULT_TOL,
                   spaces: JointSpaces | None = None) -> LocalJointReport:
    js = spaces or joint_spaces(M, N, J, rho, tol)
    if js.marginal_residual > tol.validity:
        inf = (np.inf, np.inf)
        return LocalJointReport(js.marginal_residual, inf, inf, False)
    pb = tuple(
        float(np.abs(m.pullback.matrix - js.J.pullback.matrix @ p.pullback.matrix).max(initial=0.0))
        for m, p in ((js.M, js.pi1), (js.N, js.pi2))
    )
    pf = tuple(
        float(np.abs(m.pushforward.matrix - p.pushforward.matrix @ js.J.pushforward.matrix).max(initial=0.0))
        for m, p in ((js.M, js.pi1), (js.N, js.pi2))
    )
    cut = tol.validity
    return LocalJointReport(js.marginal_residual, pb, pf, bool(max(pb) <= cut and max(pf) <= cut))


def require_local_joint(M, N, J, rho, tol: Tolerances = DEFAULT_TOL) -> JointSpaces:
    js = joint_spaces(M, N, J, rho, tol)
    rep = is_local_joint(M, N, J, rho, tol, spaces=js)
    if not rep.verdict:
        raise ValidationError(
            f"measurements are not locally jointly measured by J (marginal residual {rep.marginal_residual:.3g}, "
            f"pullback residuals {rep.pullback_residuals})"
        )
    return js


def joint_correlation(A, B, M: Measurement, N: Measurement, J: JointMeasurement, rho, mode: str = "pushforward",
                      tol: Tolerances = DEFAULT_TOL, spaces: JointSpaces | None = None,
                      with_check: bool = False):
    """``<f, g>`` over the joint distribution for the optimal ``f`` of ``A`` and ``g`` of ``B``.

    ``mode="pushforward"`` uses the pushforwards of ``A`` and ``B``;
    ``mode="partial_inverse"`` uses the partial inverses of the pullbacks.
    With ``with_check`` the partial-inverse mode also returns
    ``<J^- A, J^- B>``, which agrees for local joint measurements.
    """
    js = spaces or require_local_joint(M, N, J, rho, tol)
    a, b = js.state_space.localize(A), js.state_space.localize(B)
    if mode == "pushforward":
        f, g = js.M.push(a), js.N.push(b)
        value = float(np.dot(js.pi1.pull(f), js.pi2.pull(g)))
        return (value, value) if with_check else value
    if mode != "partial_inverse":
        raise ValueError(f"unknown mode {mode!r}")
    if not js.M.representable(a) or not js.N.representable(b):
        raise NotRepresentable("observables are not representable by the respective measurements")
    f, g = js.M.pullback_pinv @ a, js.N.pullback_pinv @ b
    value = float(np.dot(js.pi1.pull(f), js.pi2.pull(g)))
    if not with_check:
        return value
    check = float(np.dot(js.J.pull_inv(a), js.J.pull_inv(b)))
    return value, check


# -- disturbance witness ----------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    secondary: Measurement
    representative: np.ndarray
    achieved: float


def disturbance_witness(B, instr: Instrument, rho, mode: str = "contraction", tol: Tolerances = DEFAULT_TOL) -> Witness:
    """Secondary measurement whose composite error on ``B`` equals the disturbance.

    The secondary is the projective measurement of the minimum-norm
    representative of the pushforward of ``B`` (or of its pullback partial
    inverse in representability mode) over the post-measurement state.
    """
    _, theta = induced(instr, tol)
    mt = ProcessMaps(theta, rho, tol)
    b = mt.in_space.localize(B)
    if mode == "contraction":
        c = mt.push(b)
    elif mode == "representability":
        if not mt.representable(b):
            raise NotRepresentable("observable is not representable by the channel over the state")
        c = mt.pullback_pinv @ b
    else:
        raise ValueError(f"unknown mode {mode!r}")
    X = mt.out_space.representative(c)
    L = projective_from_observable(X, tol)
    N = compose(L, theta, tol)
    loss = error if mode == "contraction" else error_rep
    achieved = loss(B, N, rho, tol).value
    return Witness(secondary=L, representative=X, achieved=achieved)
