"""Localized observable spaces and the pullback/pushforward of a process.

A localized space is the quotient of observables by the null space of the
state seminorm ``|X|_rho = sqrt(<X^2>_rho)``. It is stored through the Gram
matrix of the anchored inner product in raw coordinates: with
``G = V diag(lam) V^T`` and ``lam`` cut at a relative threshold, the map
``localize = diag(sqrt(lam)) V_r^T`` sends raw coordinates to orthonormal
quotient coordinates and ``lift = V_r diag(1/sqrt(lam))`` picks the
minimum-norm coset representative. The pullback of a process is then an
ordinary matrix between two such coordinate systems and its pushforward is
the transpose.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import (
    DEFAULT_TOL,
    DimensionMismatch,
    HilbertSpace,
    SampleSpace,
    Tolerances,
    as_state,
    hermitian_basis,
    unvec,
    vec,
)
from .geninv import FdLinearMap, NotInRange, PartialInverseMap, partial_inverse
from .process import Process

QUANTUM = "quantum"
CLASSICAL = "classical"


@dataclass(frozen=True, eq=False)
class LocalizedSpace:
    """Orthonormal coordinates on the quotient of observables over an anchor state.

    ``basis`` has shape ``(raw_dim, rank)``; its columns are raw-coordinate
    representatives orthonormal under ``gram``.
    """

    kind: str
    anchor: np.ndarray
    raw_dim: int
    gram: np.ndarray
    basis: np.ndarray
    weights: np.ndarray  # retained Gram eigenvalues

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def dim(self) -> int:
        """Hilbert-space dimension (quantum) or number of outcomes (classical)."""
        if self.kind == QUANTUM:
            return int(round(np.sqrt(self.raw_dim)))
        return self.raw_dim

    @cached_property
    def localizer(self) -> np.ndarray:
        """``(rank, raw_dim)`` matrix taking raw coordinates to quotient coordinates."""
        return self.basis.T @ self.gram

    @cached_property
    def identity(self) -> np.ndarray:
        """Coordinates of the class of the identity (constant function 1)."""
        if self.kind == QUANTUM:
            return self.localizer @ vec(np.eye(self.dim))
        return self.localizer @ np.ones(self.raw_dim)

    def raw(self, X) -> np.ndarray:
        X = np.asarray(X)
        if self.kind == QUANTUM:
            if X.shape != (self.dim, self.dim):
                raise DimensionMismatch(f"operator of shape {X.shape} on a {self.dim}-dimensional localized space")
            return vec(X)
        if X.shape != (self.raw_dim,):
            raise DimensionMismatch(f"function of length {X.shape[0] if X.ndim else 0} on {self.raw_dim} outcomes")
        return X.astype(float)

    def localize(self, X) -> np.ndarray:
        """Quotient coordinates of an operator (quantum) or a function (classical)."""
        return self.localizer @ self.raw(X)

    def representative(self, coords) -> np.ndarray:
        """Minimum-norm representative of a class, as an operator or a function."""
        x = self.basis @ np.asarray(coords, dtype=float)
        return unvec(x, self.dim) if self.kind == QUANTUM else x

    def expectation(self, coords) -> float:
        return float(np.dot(coords, self.identity))

    def norm(self, coords) -> float:
        return float(np.linalg.norm(coords))

    def stdv(self, coords) -> float:
        """``sqrt(|c|^2 - <c>^2)`` evaluated as the norm of the centred class."""
        coords = np.asarray(coords, dtype=float)
        return float(np.linalg.norm(coords - self.expectation(coords) * self.identity))

    def equal(self, c1, c2, tol: Tolerances = DEFAULT_TOL) -> bool:
        c1 = np.asarray(c1, dtype=float)
        return bool(np.linalg.norm(c1 - np.asarray(c2, dtype=float)) <= tol.equal * max(1.0, np.linalg.norm(c1)))


def _from_gram(kind: str, anchor, gram: np.ndarray, tol: Tolerances) -> LocalizedSpace:
    w, v = np.linalg.eigh(gram)
    top = w.max() if w.size else 0.0
    keep = w > tol.rank * top
    w, v = w[keep][::-1], v[:, keep][:, ::-1]
    basis = v / np.sqrt(w)
    return LocalizedSpace(kind=kind, anchor=anchor, raw_dim=gram.shape[0], gram=gram, basis=basis, weights=w)


def quantum_space(rho, tol: Tolerances = DEFAULT_TOL) -> LocalizedSpace:
    rho = np.asarray(rho, dtype=complex)
    B = hermitian_basis(rho.shape[0])
    # G_ij = Re Tr[rho B_i B_j] = <{B_i, B_j}/2>_rho
    RB = np.einsum("ab,jbc->jac", rho, B)
    G = np.einsum("iab,jba->ij", B, RB).real
    G = (G + G.T) / 2
    return _from_gram(QUANTUM, rho, G, tol)


def classical_space(p, tol: Tolerances = DEFAULT_TOL) -> LocalizedSpace:
    """Indicator basis scaled by ``1/sqrt(p)`` over the support, in outcome order."""
    p = np.asarray(p, dtype=float)
    G = np.diag(np.clip(p, 0, None))
    top = p.max() if p.size else 0.0
    support = np.flatnonzero(p > tol.rank * top)
    basis = np.zeros((len(p), len(support)))
    basis[support, np.arange(len(support))] = 1 / np.sqrt(p[support])
    return LocalizedSpace(kind=CLASSICAL, anchor=p, raw_dim=len(p), gram=G, basis=basis, weights=p[support])


def space_for(state, tol: Tolerances = DEFAULT_TOL) -> LocalizedSpace:
    state = np.asarray(state)
    return classical_space(state, tol) if state.ndim == 1 else quantum_space(state, tol)


def localize(X, space: LocalizedSpace) -> np.ndarray:
    return space.localize(X)


def lift(coords, space: LocalizedSpace) -> np.ndarray:
    return space.representative(coords)


class ProcessMaps:
    """Pullback and pushforward of ``process`` over ``state`` in orthonormal quotient coordinates.

    ``in_space``/``out_space`` may be passed to share bases between several
    maps (needed whenever matrices of different processes are composed or
    compared).
    """

    def __init__(self, process: Process, state, tol: Tolerances = DEFAULT_TOL,
                 in_space: LocalizedSpace | None = None, out_space: LocalizedSpace | None = None):
        self.process = process
        self.state = as_state(state, tol)
        self.tol = tol
        self.in_space = in_space if in_space is not None else space_for(self.state, tol)
        if self.in_space.raw_dim != process.in_space.raw_dim:
            raise DimensionMismatch("state does not live on the input of the process")
        self.out_state = process._from_coords(process.matrix @ process._state_coords(self.state))
        self.out_space = out_space if out_space is not None else space_for(self.out_state, tol)
        if self.out_space.raw_dim != process.out_space.raw_dim:
            raise DimensionMismatch("output localized space does not match the process output")
        self.pullback = FdLinearMap(self.in_space.localizer @ process.matrix.T @ self.out_space.basis, rank_tol=tol.rank)

    @property
    def pushforward(self) -> FdLinearMap:
        return self.pullback.T

    @property
    def pullback_pinv(self) -> PartialInverseMap:
        if not hasattr(self, "_pb_pinv"):
            self._pb_pinv = partial_inverse(self.pullback)
        return self._pb_pinv

    @property
    def pushforward_pinv(self) -> PartialInverseMap:
        if not hasattr(self, "_pf_pinv"):
            self._pf_pinv = partial_inverse(self.pushforward)
        return self._pf_pinv

    # coordinate-level actions
    def pull(self, phi) -> np.ndarray:
        return self.pullback.matrix @ np.asarray(phi, dtype=float)

    def push(self, a) -> np.ndarray:
        return self.pullback.matrix.T @ np.asarray(a, dtype=float)

    def representable(self, a) -> bool:
        return self.pullback.in_range(a, self.tol)

    def pull_inv(self, a) -> np.ndarray:
        """Minimum-norm preimage of ``a`` under the pullback; raises NotInRange."""
        a = np.asarray(a, dtype=float)
        if not self.representable(a):
            raise NotInRange(f"class is not in the range of the pullback (residual {self.pullback.range_residual(a):.3g})")
        return self.pullback_pinv @ a

    def push_inv(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if not self.pushforward.in_range(f, self.tol):
            raise NotInRange("class is not in the range of the pushforward")
        return self.pushforward_pinv @ f

    def excess(self, phi) -> float:
        """``|phi|^2 - |pull phi|^2``, via a sum of squares when the process allows it."""
        phi = np.asarray(phi, dtype=float)
        rep = self.out_space.representative(phi)
        val = self.process.excess(rep, self.in_space.anchor)
        if val is None:
            return float(np.dot(phi, phi) - np.sum(self.pull(phi) ** 2))
        return val

    @property
    def operator_norm(self) -> float:
        s = self.pullback.singular_values
        return float(s[0]) if s.size else 0.0

    def is_nonexpansive(self) -> bool:
        return self.operator_norm <= 1 + self.tol.validity

    # operator-level conveniences
    def pushforward_of(self, X) -> np.ndarray:
        """Minimum-norm representative of the pushforward of an operator."""
        return self.out_space.representative(self.push(self.in_space.localize(X)))

    def pullback_of(self, f) -> np.ndarray:
        return self.in_space.representative(self.pull(self.out_space.localize(f)))


def process_maps(process: Process, state, tol: Tolerances = DEFAULT_TOL, **spaces) -> ProcessMaps:
    return ProcessMaps(process, state, tol, **spaces)
