"""Hermitian operator algebra, states, distributions and real vectorization.

Quantum objects are plain numpy arrays: a Hermitian operator or density
matrix is a ``(d, d)`` complex array, a probability distribution or a
classical observable is a 1-D real array indexed by a :class:`SampleSpace`.
Everything downstream computes in the real coordinates given by
:func:`hermitian_basis`, which is orthonormal under ``Tr[XY]``; adjoints of
real matrices are therefore plain transposes.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np


class ValidationError(ValueError):
    """An input violates a stated invariant (hermiticity, positivity, ...)."""


class DimensionMismatch(ValidationError):
    pass


class NegativeRadicand(ArithmeticError):
    """A loss radicand is negative beyond round-off."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared across the package.

    ``validity`` guards hermiticity/PSD/normalization checks, ``rank`` is the
    relative singular-value (and Gram eigenvalue) cutoff, ``range`` the
    relative residual for range membership, ``radicand`` the round-off slack
    below zero that is clipped, ``equal`` the coordinate distance at which two
    localized observables are considered equal, ``holds`` the slack allowance
    of relation reports and ``spectral`` the relative eigenvalue merging
    threshold for projective measurements.
    """

    validity: float = 1e-9
    rank: float = 1e-12
    range: float = 1e-9
    radicand: float = 1e-10
    equal: float = 1e-9
    holds: float = 1e-9
    spectral: float = 1e-10

    def replace(self, **kw: float) -> "Tolerances":
        unknown = set(kw) - set(self.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown tolerance(s): {sorted(unknown)}")
        return Tolerances(**{**self.__dict__, **kw})


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class HilbertSpace:
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValidationError(f"Hilbert space dimension must be a positive integer, got {self.dim}")

    @property
    def raw_dim(self) -> int:
        return self.dim * self.dim


@dataclass(frozen=True)
class SampleSpace:
    """Ordered finite outcome set; values are optional real outcome values."""

    labels: tuple
    values: tuple | None = None

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) == 0:
            raise ValidationError("sample space must have at least one outcome")
        if len(set(labels)) != len(labels):
            raise ValidationError("sample space labels must be distinct")
        if self.values is not None:
            values = tuple(float(v) for v in self.values)
            if len(values) != len(labels):
                raise ValidationError("every outcome must carry a value when any does")
            if not all(np.isfinite(values)):
                raise ValidationError("outcome values must be finite")
            object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def raw_dim(self) -> int:
        return len(self.labels)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "SampleSpace":
        values = tuple(float(v) for v in values)
        return cls(labels=values, values=values)

    @classmethod
    def range(cls, n: int) -> "SampleSpace":
        return cls(labels=tuple(range(n)))

    def value_function(self) -> np.ndarray:
        if self.values is None:
            raise ValidationError("outcomes carry no real values")
        return np.asarray(self.values, dtype=float)

    def product(self, other: "SampleSpace") -> "SampleSpace":
        """Row-major product space: first factor outer, second inner."""
        labels = tuple((a, b) for a in self.labels for b in other.labels)
        return SampleSpace(labels=labels)


Space = HilbertSpace | SampleSpace


# -- vectorization -----------------------------------------------------------


@functools.lru_cache(maxsize=None)
def _hermitian_basis(d: int) -> np.ndarray:
    basis = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = 1 / np.sqrt(2)
            asym = np.zeros((d, d), dtype=complex)
            asym[j, k] = -1j / np.sqrt(2)
            asym[k, j] = 1j / np.sqrt(2)
            basis += [sym, asym]
    # traceless diagonal elements (generalized Gell-Mann), l = 1 .. d-1
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        basis.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    out = np.array(basis)
    out.setflags(write=False)
    return out


def hermitian_basis(d: int) -> np.ndarray:
    """Orthonormal basis of the Hermitian ``d x d`` matrices.

    Returns a read-only ``(d*d, d, d)`` array with ``Tr[B_i B_j] = delta_ij``;
    the first element is ``Id / sqrt(d)``. For ``d = 2`` the basis is the
    Pauli basis scaled by ``1/sqrt(2)`` in the order I, X, Y, Z.
    """
    if int(d) != d or d < 1:
        raise ValidationError(f"dimension must be a positive integer, got {d}")
    return _hermitian_basis(int(d))


def vec(X: np.ndarray) -> np.ndarray:
    """Real coordinates ``Tr[B_i X]`` of a Hermitian matrix."""
    X = np.asarray(X)
    B = hermitian_basis(X.shape[0])
    return np.einsum("kij,ji->k", B, X).real


def unvec(x: np.ndarray, d: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if d is None:
        d = int(round(np.sqrt(x.shape[0])))
    if d * d != x.shape[0]:
        raise DimensionMismatch(f"coordinate vector of length {x.shape[0]} is not d^2")
    return np.einsum("k,kij->ij", x, hermitian_basis(d))


# -- validation ----------------------------------------------------------------


def as_hermitian(X: Any, tol: Tolerances = DEFAULT_TOL, name: str = "operator") -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError(f"{name} has non-finite entries")
    if X.size and np.max(np.abs(X - X.conj().T)) > tol.validity:
        raise ValidationError(f"{name} is not Hermitian")
    return (X + X.conj().T) / 2


def is_psd(X: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> bool:
    return bool(np.linalg.eigvalsh(X).min() >= -tol.validity)


def as_density(rho: Any, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    rho = as_hermitian(rho, tol, name="density matrix")
    if abs(np.trace(rho).real - 1) > tol.validity:
        raise ValidationError(f"density matrix must have unit trace, got {np.trace(rho).real:.3g}")
    if not is_psd(rho, tol):
        raise ValidationError("density matrix is not positive semidefinite")
    return rho


def as_distribution(p: Any, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ValidationError("probability distribution must be a 1-D array")
    if np.any(p < -tol.validity):
        raise ValidationError("probability distribution has negative weights")
    if abs(p.sum() - 1) > tol.validity:
        raise ValidationError(f"probability distribution must sum to 1, got {p.sum():.3g}")
    return p


def as_state(state: Any, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    state = np.asarray(state)
    return as_distribution(state, tol) if state.ndim == 1 else as_density(state, tol)


def sqrt_psd(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    # eigenvalues at round-off level are zeros; their roots would be ~1e-8, not ~1e-16
    floor = 8 * np.finfo(float).eps * len(w) * max(np.max(np.abs(w), initial=0.0), 1.0)
    return (v * np.sqrt(np.where(w > floor, w, 0.0))) @ v.conj().T


def _check_dims(X: np.ndarray, state: np.ndarray) -> None:
    if X.shape[0] != state.shape[0] or X.ndim != state.ndim:
        raise DimensionMismatch(f"observable of shape {X.shape} does not match state of shape {state.shape}")


# -- statistics ----------------------------------------------------------------


def expectation(X: Any, state: Any) -> float:
    """``Tr[X rho]`` for operators, ``sum f p`` for classical observables."""
    X, state = np.asarray(X), np.asarray(state)
    _check_dims(X, state)
    if X.ndim == 1:
        return float(np.dot(X.real, state.real))
    val = np.trace(X @ state)
    return float(val.real)


def seminorm(X: Any, state: Any) -> float:
    """``sqrt(<X^2>)``, evaluated as a Frobenius norm so it never goes negative."""
    X, state = np.asarray(X), np.asarray(state)
    _check_dims(X, state)
    if X.ndim == 1:
        return float(np.sqrt(np.dot(X**2, np.clip(state, 0, None))))
    return float(np.linalg.norm(X @ sqrt_psd(state)))


def stdv(X: Any, state: Any) -> float:
    X, state = np.asarray(X), np.asarray(state)
    mean = expectation(X, state)
    centred = X - mean if X.ndim == 1 else X - mean * np.eye(X.shape[0])
    return seminorm(centred, state)


def symm_antisymm_ev(A: Any, B: Any, rho: Any) -> tuple[float, float]:
    """Return ``(<{A,B}/2>, <[A,B]/2i>)`` over ``rho``."""
    A, B, rho = (np.asarray(m, dtype=complex) for m in (A, B, rho))
    _check_dims(A, rho)
    _check_dims(B, rho)
    ab = np.trace(A @ B @ rho)
    # Tr[BA rho] = conj(Tr[AB rho]) for Hermitian A, B, rho
    return float(ab.real), float(ab.imag)


def covariance(A: Any, B: Any, rho: Any) -> float:
    """Quantum covariance ``<{A,B}/2> - <A><B>``."""
    sym, _ = symm_antisymm_ev(A, B, rho)
    return sym - expectation(A, rho) * expectation(B, rho)


# -- file encoding -------------------------------------------------------------


def encode_matrix(X: np.ndarray) -> list:
    """Nested lists of ``[re, im]`` pairs, row-major."""
    X = np.asarray(X, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in X]


def decode_matrix(obj: Any) -> np.ndarray:
    """Inverse of :func:`encode_matrix`; bare real numbers are accepted as entries."""
    rows = []
    for row in obj:
        entries = []
        for z in row:
            if isinstance(z, (int, float)):
                entries.append(complex(z))
            elif isinstance(z, (list, tuple)) and len(z) == 2:
                entries.append(complex(float(z[0]), float(z[1])))
            else:
                raise ValidationError(f"matrix entry must be a number or [re, im], got {z!r}")
        rows.append(entries)
    X = np.array(rows, dtype=complex)
    if X.ndim != 2:
        raise ValidationError("matrix must be a nested list of rows")
    return X


# -- common fixtures -------------------------------------------------------------

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"i": I2, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


def pure(psi: Sequence[complex]) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d
