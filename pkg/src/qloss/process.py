"""Affine processes: quantum measurements, channels, classical processes, instruments.

Every process is stored as a real matrix acting on raw state coordinates
(Hermitian-basis coordinates of a density matrix, or the weight vector of a
distribution). Its adjoint, the map on observables, is the transpose. Only
affinity is assumed; complete positivity is certified when Kraus operators
are available and otherwise left to runtime checks on outputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .core import (
    DEFAULT_TOL,
    DimensionMismatch,
    HilbertSpace,
    SampleSpace,
    Tolerances,
    ValidationError,
    as_distribution,
    as_hermitian,
    hermitian_basis,
    sqrt_psd,
    unvec,
    vec,
)

KRAUS = "kraus-certified"
POSITIVE = "checked-positive"
UNCHECKED = "unchecked"
_MODES = (KRAUS, POSITIVE, UNCHECKED)


class Process:
    """Common surface of all processes; subclasses fill in ``matrix``."""

    in_space: HilbertSpace | SampleSpace
    out_space: HilbertSpace | SampleSpace
    matrix: np.ndarray

    @property
    def is_quantum_input(self) -> bool:
        return isinstance(self.in_space, HilbertSpace)

    @property
    def is_quantum_output(self) -> bool:
        return isinstance(self.out_space, HilbertSpace)

    def _state_coords(self, state) -> np.ndarray:
        state = np.asarray(state)
        if self.is_quantum_input:
            d = self.in_space.dim
            if state.shape != (d, d):
                raise DimensionMismatch(f"expected a {d}x{d} density matrix, got shape {state.shape}")
            return vec(state)
        if state.shape != (self.in_space.raw_dim,):
            raise DimensionMismatch(f"expected a distribution over {self.in_space.raw_dim} outcomes")
        return state.astype(float)

    def _from_coords(self, y: np.ndarray) -> np.ndarray:
        if self.is_quantum_output:
            return unvec(y, self.out_space.dim)
        return y

    def apply(self, state, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        out = self._from_coords(self.matrix @ self._state_coords(state))
        self._check_output(out, tol)
        return out

    def _check_output(self, out, tol: Tolerances) -> None:
        if self.is_quantum_output:
            w = np.linalg.eigvalsh(out)
            excess = w.sum() - 1 if getattr(self, "partial", False) else abs(w.sum() - 1)
            if w.min() < -tol.validity or excess > tol.validity:
                raise ValidationError("process output is not a valid density matrix")
        else:
            if out.min() < -tol.validity or abs(out.sum() - 1) > tol.validity:
                raise ValidationError("process output is not a valid probability distribution")

    def adjoint_apply(self, observable) -> np.ndarray:
        obs = np.asarray(observable)
        if self.is_quantum_output:
            d = self.out_space.dim
            if obs.shape != (d, d):
                raise DimensionMismatch(f"expected a {d}x{d} observable, got shape {obs.shape}")
            x = vec(obs)
        else:
            if obs.shape != (self.out_space.raw_dim,):
                raise DimensionMismatch(f"expected a function on {self.out_space.raw_dim} outcomes")
            x = obs.astype(float)
        y = self.matrix.T @ x
        return unvec(y, self.in_space.dim) if self.is_quantum_input else y

    def excess(self, observable, state) -> float | None:
        """``|C|^2_{P state} - |P'C|^2_state`` as a sum of squares, if available.

        Returns ``None`` when the process carries no positive decomposition
        (e.g. an unchecked channel); callers then fall back to the plain
        difference of squared norms.
        """
        return None


# -- measurements ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Measurement(Process):
    """POVM with one effect per outcome."""

    dim: int
    space: SampleSpace
    effects: tuple

    def __post_init__(self):
        effects = tuple(np.asarray(E, dtype=complex) for E in self.effects)
        object.__setattr__(self, "effects", effects)
        if len(effects) != len(self.space):
            raise ValidationError(f"{len(effects)} effects for {len(self.space)} outcomes")
        for E in effects:
            if E.shape != (self.dim, self.dim):
                raise DimensionMismatch(f"effect of shape {E.shape} on a {self.dim}-dimensional system")

    @classmethod
    def from_effects(cls, effects, space: SampleSpace | None = None, values=None, tol: Tolerances = DEFAULT_TOL):
        effects = [as_hermitian(E, tol, name="effect") for E in effects]
        if not effects:
            raise ValidationError("a measurement needs at least one effect")
        d = effects[0].shape[0]
        if space is None:
            space = SampleSpace.from_values(values) if values is not None else SampleSpace.range(len(effects))
        m = cls(dim=d, space=space, effects=tuple(effects))
        m.validate(tol)
        return m

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> "Measurement":
        E = np.asarray(self.effects)
        lowest = np.linalg.eigvalsh((E + E.conj().transpose(0, 2, 1)) / 2)[:, 0]
        bad = np.flatnonzero(lowest < -tol.validity)
        if bad.size:
            raise ValidationError(f"effect {self.space.labels[bad[0]]!r} is not positive semidefinite")
        total = E.sum(axis=0)
        if np.max(np.abs(total - np.eye(self.dim))) > tol.validity:
            raise ValidationError("effects do not sum to the identity")
        return self

    @property
    def in_space(self) -> HilbertSpace:
        return HilbertSpace(self.dim)

    @property
    def out_space(self) -> SampleSpace:
        return self.space

    @cached_property
    def matrix(self) -> np.ndarray:
        B = hermitian_basis(self.dim)
        return np.einsum("kij,wji->wk", B, np.asarray(self.effects)).real.reshape(len(self.effects), self.dim**2)

    @cached_property
    def _sqrt_effects(self):
        return [sqrt_psd(E) for E in self.effects]

    def excess(self, f, rho) -> float:
        f = np.asarray(f, dtype=float)
        F = sum(fw * E for fw, E in zip(f, self.effects))
        s = sqrt_psd(rho)
        eye = np.eye(self.dim)
        return float(sum(np.linalg.norm(S @ (fw * eye - F) @ s) ** 2 for fw, S in zip(f, self._sqrt_effects)))

    def is_projective(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        for i, E in enumerate(self.effects):
            for j, F in enumerate(self.effects):
                target = E if i == j else 0
                if np.max(np.abs(E @ F - target)) > tol.validity:
                    return False
        return True


def povm(effects, values=None, tol: Tolerances = DEFAULT_TOL) -> Measurement:
    return Measurement.from_effects(effects, values=values, tol=tol)


def _spectral_clusters(A: np.ndarray, tol: Tolerances):
    w, v = np.linalg.eigh(A)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    scale = np.max(np.abs(w)) if w.size else 0.0
    cut = tol.spectral * scale
    clusters = [[0]]
    for k in range(1, len(w)):
        if abs(w[clusters[-1][-1]] - w[k]) <= cut:
            clusters[-1].append(k)
        else:
            clusters.append([k])
    values = [float(np.mean(w[c])) for c in clusters]
    projectors = [v[:, c] @ v[:, c].conj().T for c in clusters]
    return values, projectors


def projective_from_observable(A, tol: Tolerances = DEFAULT_TOL) -> Measurement:
    """Spectral measurement of ``A``; outcomes are its distinct eigenvalues, descending.

    Eigenvalues closer than ``tol.spectral * |A|`` are merged into one outcome.
    """
    A = as_hermitian(A, tol, name="observable")
    values, projectors = _spectral_clusters(A, tol)
    return Measurement(dim=A.shape[0], space=SampleSpace.from_values(values), effects=tuple(projectors))


def trivial_measurement(p0, dim: int, space: SampleSpace | None = None, tol: Tolerances = DEFAULT_TOL) -> Measurement:
    """Constant measurement ``rho -> p0`` with effects ``p0(w) Id``."""
    p0 = as_distribution(p0, tol)
    space = space or SampleSpace.range(len(p0))
    return Measurement(dim=dim, space=space, effects=tuple(pw * np.eye(dim, dtype=complex) for pw in p0))


# -- channels ----------------------------------------------------------------------


def kraus_to_superop(kraus: Sequence[np.ndarray], in_dim: int, out_dim: int) -> np.ndarray:
    K = np.asarray(kraus, dtype=complex).reshape(-1, out_dim, in_dim)
    images = np.einsum("kab,lbc,kdc->lad", K, hermitian_basis(in_dim), K.conj())
    return np.einsum("iab,lba->il", hermitian_basis(out_dim), images).real


def superop_to_choi(S: np.ndarray, in_dim: int, out_dim: int) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) Theta(|i><j|)`` of a Hermiticity-preserving map."""
    B_in = hermitian_basis(in_dim)
    images = np.array([unvec(S[:, l], out_dim) for l in range(in_dim**2)])
    J = np.zeros((in_dim * out_dim, in_dim * out_dim), dtype=complex)
    for i in range(in_dim):
        for j in range(in_dim):
            # coordinates of |i><j| in the (complexified) Hermitian basis
            coeff = B_in[:, j, i]
            J[i * out_dim:(i + 1) * out_dim, j * out_dim:(j + 1) * out_dim] = np.einsum("k,kab->ab", coeff, images)
    return J


def choi_to_kraus(J: np.ndarray, in_dim: int, out_dim: int, tol: float = 1e-12) -> list[np.ndarray]:
    w, v = np.linalg.eigh((J + J.conj().T) / 2)
    keep = w > tol * max(1.0, w.max())
    return [np.sqrt(lam) * vk.reshape(in_dim, out_dim).T for lam, vk in zip(w[keep], v[:, keep].T)]


@dataclass(frozen=True, eq=False)
class Channel(Process):
    """Quantum process stored as a superoperator in Hermitian-basis coordinates.

    ``partial=True`` marks a trace-nonincreasing instrument branch.
    """

    in_dim: int
    out_dim: int
    superop: np.ndarray
    positivity_mode: str = UNCHECKED
    kraus: tuple | None = None
    partial: bool = False

    def __post_init__(self):
        S = np.asarray(self.superop, dtype=float)
        if S.shape != (self.out_dim**2, self.in_dim**2):
            raise DimensionMismatch(f"superoperator shape {S.shape} does not match dims {self.in_dim}->{self.out_dim}")
        if self.positivity_mode not in _MODES:
            raise ValidationError(f"unknown positivity mode {self.positivity_mode!r}")
        object.__setattr__(self, "superop", S)

    @classmethod
    def from_kraus(cls, kraus, tol: Tolerances = DEFAULT_TOL, partial: bool = False) -> "Channel":
        kraus = tuple(np.asarray(K, dtype=complex) for K in kraus)
        if not kraus:
            raise ValidationError("at least one Kraus operator is required")
        out_dim, in_dim = kraus[0].shape
        if any(K.shape != (out_dim, in_dim) for K in kraus):
            raise DimensionMismatch("Kraus operators must share one shape")
        S = kraus_to_superop(kraus, in_dim, out_dim)
        ch = cls(in_dim=in_dim, out_dim=out_dim, superop=S, positivity_mode=KRAUS, kraus=kraus, partial=partial)
        ch.validate(tol)
        return ch

    @classmethod
    def from_superop(cls, S, in_dim: int, out_dim: int, mode: str = "auto",
                     tol: Tolerances = DEFAULT_TOL, partial: bool = False) -> "Channel":
        """Build from a superoperator matrix.

        ``mode="auto"`` certifies complete positivity through the Choi matrix
        when possible (deriving Kraus operators), and otherwise checks
        positivity on sampled pure states. ``mode="unchecked"`` skips both.
        """
        S = np.asarray(S, dtype=float)
        if mode not in ("auto", UNCHECKED, POSITIVE):
            raise ValidationError(f"unknown mode {mode!r}")
        if mode == "auto":
            J = superop_to_choi(S, in_dim, out_dim)
            if np.linalg.eigvalsh((J + J.conj().T) / 2).min() >= -tol.validity:
                kraus = choi_to_kraus(J, in_dim, out_dim)
                ch = cls(in_dim, out_dim, S, KRAUS, tuple(kraus), partial)
                ch.validate(tol)
                return ch
            mode = POSITIVE
        ch = cls(in_dim, out_dim, S, mode, None, partial)
        ch.validate(tol)
        return ch

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> "Channel":
        unit = self.adjoint_apply(np.eye(self.out_dim, dtype=complex))
        if self.partial:
            if np.linalg.eigvalsh(np.eye(self.in_dim) - unit).min() < -tol.validity:
                raise ValidationError("instrument branch is trace-increasing")
        elif np.max(np.abs(unit - np.eye(self.in_dim))) > tol.validity:
            raise ValidationError("channel is not trace-preserving")
        if self.kraus is not None:
            ref = kraus_to_superop(self.kraus, self.in_dim, self.out_dim)
            if np.max(np.abs(ref - self.superop)) > tol.validity:
                raise ValidationError("superoperator does not match its Kraus operators")
        elif self.positivity_mode == POSITIVE:
            rng = np.random.default_rng(0)
            for _ in range(64):
                psi = rng.normal(size=self.in_dim) + 1j * rng.normal(size=self.in_dim)
                psi /= np.linalg.norm(psi)
                out = unvec(self.superop @ vec(np.outer(psi, psi.conj())), self.out_dim)
                if np.linalg.eigvalsh(out).min() < -tol.validity:
                    raise ValidationError("channel maps a pure state to a non-positive operator")
        return self

    @property
    def in_space(self) -> HilbertSpace:
        return HilbertSpace(self.in_dim)

    @property
    def out_space(self) -> HilbertSpace:
        return HilbertSpace(self.out_dim)

    @property
    def matrix(self) -> np.ndarray:
        return self.superop

    def excess(self, C, rho) -> float | None:
        if self.kraus is None:
            return None
        C = np.asarray(C, dtype=complex)
        F = sum(K.conj().T @ C @ K for K in self.kraus)
        s = sqrt_psd(rho)
        return float(sum(np.linalg.norm((C @ K - K @ F) @ s) ** 2 for K in self.kraus))


def identity_channel(d: int) -> Channel:
    return Channel.from_kraus([np.eye(d, dtype=complex)])


def unitary_channel(U) -> Channel:
    return Channel.from_kraus([np.asarray(U, dtype=complex)])


def dephasing(A, tol: Tolerances = DEFAULT_TOL) -> Channel:
    """Collapse onto the eigenspaces of ``A`` (projection postulate)."""
    A = as_hermitian(A, tol, name="observable")
    _, projectors = _spectral_clusters(A, tol)
    return Channel.from_kraus(projectors, tol)


# -- classical processes -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClassicalProcess(Process):
    """Column-stochastic matrix: ``matrix[j, i]`` is the probability of ``j`` given ``i``."""

    in_space: SampleSpace
    out_space: SampleSpace
    matrix: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.matrix, dtype=float)
        if K.shape != (len(self.out_space), len(self.in_space)):
            raise DimensionMismatch(f"stochastic matrix of shape {K.shape} does not match the sample spaces")
        object.__setattr__(self, "matrix", K)

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> "ClassicalProcess":
        if self.matrix.min() < -tol.validity:
            raise ValidationError("stochastic matrix has negative entries")
        if np.max(np.abs(self.matrix.sum(axis=0) - 1)) > tol.validity:
            raise ValidationError("stochastic matrix columns do not sum to 1")
        return self

    def excess(self, g, p) -> float:
        g = np.asarray(g, dtype=float)
        F = self.matrix.T @ g
        dev = (g[:, None] - F[None, :]) ** 2
        return float(np.sum(np.clip(p, 0, None)[None, :] * self.matrix * dev))


def marginal_projection(space1: SampleSpace, space2: SampleSpace, which: int) -> ClassicalProcess:
    """Projection of distributions on ``space1 x space2`` onto one factor."""
    n1, n2 = len(space1), len(space2)
    if which == 1:
        K = np.kron(np.eye(n1), np.ones((1, n2)))
        out = space1
    elif which == 2:
        K = np.kron(np.ones((1, n1)), np.eye(n2))
        out = space2
    else:
        raise ValueError("which must be 1 or 2")
    return ClassicalProcess(in_space=space1.product(space2), out_space=out, matrix=K)


# -- instruments ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Instrument:
    """One trace-nonincreasing branch per outcome; the branches sum to a channel."""

    dim: int
    space: SampleSpace
    branches: tuple

    def __post_init__(self):
        if len(self.branches) != len(self.space):
            raise ValidationError(f"{len(self.branches)} branches for {len(self.space)} outcomes")
        if any(b.in_dim != self.dim for b in self.branches):
            raise DimensionMismatch("instrument branches must act on the instrument's system")
        if len({b.out_dim for b in self.branches}) != 1:
            raise DimensionMismatch("instrument branches must share an output system")

    @property
    def out_dim(self) -> int:
        return self.branches[0].out_dim

    @classmethod
    def from_kraus(cls, kraus_per_outcome, space: SampleSpace | None = None, values=None,
                   tol: Tolerances = DEFAULT_TOL) -> "Instrument":
        branches = tuple(Channel.from_kraus(ks, tol, partial=True) for ks in kraus_per_outcome)
        if space is None:
            space = SampleSpace.from_values(values) if values is not None else SampleSpace.range(len(branches))
        instr = cls(dim=branches[0].in_dim, space=space, branches=branches)
        instr.validate(tol)
        return instr

    def validate(self, tol: Tolerances = DEFAULT_TOL) -> "Instrument":
        total = sum(b.superop for b in self.branches)
        unit = unvec(total.T @ vec(np.eye(self.out_dim)), self.dim)
        if np.max(np.abs(unit - np.eye(self.dim))) > tol.validity:
            raise ValidationError("instrument branches do not sum to a trace-preserving channel")
        if any(b.kraus is None for b in self.branches):
            rng = np.random.default_rng(0)
            for _ in range(64):
                psi = rng.normal(size=self.dim) + 1j * rng.normal(size=self.dim)
                psi /= np.linalg.norm(psi)
                r = vec(np.outer(psi, psi.conj()))
                for b in self.branches:
                    if np.trace(unvec(b.superop @ r, self.out_dim)).real < -tol.validity:
                        raise ValidationError("instrument induces a negative outcome probability")
        return self


def luders_instrument(A, tol: Tolerances = DEFAULT_TOL) -> Instrument:
    """Branches ``rho -> P_w rho P_w`` over the spectral projectors of ``A``."""
    A = as_hermitian(A, tol, name="observable")
    values, projectors = _spectral_clusters(A, tol)
    branches = tuple(Channel.from_kraus([P], tol, partial=True) for P in projectors)
    return Instrument(dim=A.shape[0], space=SampleSpace.from_values(values), branches=branches)


# -- generic operations --------------------------------------------------------------------


def apply(process: Process, state, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    return process.apply(state, tol)


def adjoint_apply(process: Process, observable) -> np.ndarray:
    return process.adjoint_apply(observable)


def compose(second: Process, first: Process, tol: Tolerances = DEFAULT_TOL) -> Process:
    """The process ``second o first`` (``first`` acts first)."""
    if first.out_space != second.in_space:
        if isinstance(first.out_space, HilbertSpace) and isinstance(second.in_space, HilbertSpace):
            raise DimensionMismatch(f"cannot feed a {first.out_space.dim}-dim output into a {second.in_space.dim}-dim input")
        raise DimensionMismatch("output space of the first process does not match the input of the second")

    if isinstance(second, Channel) and isinstance(first, Channel):
        S = second.superop @ first.superop
        if first.kraus is not None and second.kraus is not None:
            kraus = tuple(K2 @ K1 for K2 in second.kraus for K1 in first.kraus)
            return Channel(first.in_dim, second.out_dim, S, KRAUS, kraus, first.partial or second.partial)
        mode = POSITIVE if UNCHECKED not in (first.positivity_mode, second.positivity_mode) else UNCHECKED
        return Channel(first.in_dim, second.out_dim, S, mode, None, first.partial or second.partial)

    if isinstance(second, Measurement) and isinstance(first, Channel):
        effects = [first.adjoint_apply(E) for E in second.effects]
        return Measurement(dim=first.in_dim, space=second.space, effects=tuple(effects)).validate(tol)

    if isinstance(second, ClassicalProcess) and isinstance(first, Measurement):
        effects = [sum(second.matrix[j, i] * E for i, E in enumerate(first.effects)) for j in range(len(second.out_space))]
        return Measurement(dim=first.dim, space=second.out_space, effects=tuple(effects)).validate(tol)

    if isinstance(second, ClassicalProcess) and isinstance(first, ClassicalProcess):
        return ClassicalProcess(first.in_space, second.out_space, second.matrix @ first.matrix)

    raise TypeError(f"composition {type(second).__name__} o {type(first).__name__} is not supported")
