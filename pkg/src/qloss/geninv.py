"""Standard partial inverse of finite-dimensional linear maps.

In finite dimension every linear map is bounded and closed, so the partial
inverse ``T^-`` (the inverse of ``T`` restricted to ``ker(T)^perp``) is
defined on all of ``ran(T)``; extending it by zero on ``ran(T)^perp`` gives
the Moore-Penrose pseudoinverse. Kernels and ranges are identified through
one SVD with a relative singular-value cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import DEFAULT_TOL, Tolerances


class NotInRange(ValueError):
    """The vector is not in the range of the map (within tolerance)."""


@dataclass(frozen=True, eq=False)
class FdLinearMap:
    """A real matrix between orthonormal coordinate spaces.

    ``matrix`` has shape ``(codomain_dim, domain_dim)``; the rank counts the
    singular values above ``rank_tol`` times the largest one.
    """

    matrix: np.ndarray
    rank_tol: float = DEFAULT_TOL.rank

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if not np.all(np.isfinite(m)):
            raise ValueError("linear map has non-finite entries")
        object.__setattr__(self, "matrix", m)

    @property
    def domain_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def codomain_dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def _svd(self):
        if self.matrix.size == 0:
            return (np.zeros((self.codomain_dim, 0)), np.zeros(0), np.zeros((0, self.domain_dim)))
        return np.linalg.svd(self.matrix, full_matrices=False)

    @cached_property
    def singular_values(self) -> np.ndarray:
        return self._svd[1]

    @cached_property
    def rank(self) -> int:
        s = self.singular_values
        if s.size == 0 or s[0] == 0:
            return 0
        return int(np.sum(s > self.rank_tol * s[0]))

    @cached_property
    def range_basis(self) -> np.ndarray:
        return self._svd[0][:, : self.rank]

    @cached_property
    def coimage_basis(self) -> np.ndarray:
        """Orthonormal basis of ``ker(T)^perp``."""
        return self._svd[2][: self.rank].T

    def __matmul__(self, other):
        if isinstance(other, FdLinearMap):
            return FdLinearMap(self.matrix @ other.matrix, rank_tol=self.rank_tol)
        return self.matrix @ other

    @property
    def T(self) -> "FdLinearMap":
        return FdLinearMap(self.matrix.T, rank_tol=self.rank_tol)

    def range_residual(self, y: np.ndarray) -> float:
        y = np.asarray(y, dtype=float)
        Q = self.range_basis
        return float(np.linalg.norm(y - Q @ (Q.T @ y)))

    def in_range(self, y: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> bool:
        y = np.asarray(y, dtype=float)
        return self.range_residual(y) <= tol.range * max(1.0, float(np.linalg.norm(y)))


@dataclass(frozen=True, eq=False)
class PartialInverseMap:
    source: FdLinearMap
    matrix: np.ndarray
    range_projector: np.ndarray
    coimage_projector: np.ndarray

    def __matmul__(self, y):
        return self.matrix @ y

    def as_map(self) -> FdLinearMap:
        return FdLinearMap(self.matrix, rank_tol=self.source.rank_tol)


def partial_inverse(T: FdLinearMap | np.ndarray) -> PartialInverseMap:
    """Inverse of ``T`` restricted to ``ker(T)^perp``, as a matrix.

    Also returns the projector onto ``ran(T)`` (equal to ``T T^-``) and the
    projector onto ``ker(T)^perp`` (equal to ``T^- T``).
    """
    if not isinstance(T, FdLinearMap):
        T = FdLinearMap(T)
    U, s, Vt = T._svd
    r = T.rank
    Ur, Vr = U[:, :r], Vt[:r].T
    pinv = (Vr / s[:r]) @ Ur.T
    return PartialInverseMap(
        source=T,
        matrix=pinv,
        range_projector=Ur @ Ur.T,
        coimage_projector=Vr @ Vr.T,
    )


def min_norm_preimage(T: FdLinearMap | np.ndarray, y, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """The unique minimum-norm ``x`` with ``T x = y``.

    Raises :class:`NotInRange` when ``y`` is farther from ``ran(T)`` than
    ``tol.range * max(1, |y|)``.
    """
    if not isinstance(T, FdLinearMap):
        T = FdLinearMap(T)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if not T.in_range(y, tol):
        raise NotInRange(f"vector is not in the range of the map (residual {T.range_residual(y):.3g})")
    return partial_inverse(T) @ y


@dataclass(frozen=True)
class CompositionReport:
    """Partial inverse of a composite ``AB`` against ``B^- A^-``.

    ``conditions`` maps ``a``..``d`` to booleans:

    (a) ``(AB)^- z == B^- A^- z``
    (b) ``|(AB)^- z| == |B^- A^- z|``
    (c) ``B (AB)^- z == A^- z``
    (d) ``|B (AB)^- z| == |A^- z|``

    ``b_inv_a_inv_z`` applies the partial inverse of ``B`` extended by zero
    on ``ran(B)^perp``. When ``A^- z`` is outside ``ran(B)`` the composite
    ``B^- A^- z`` is undefined, ``in_domain`` is false and so are (a) and
    (b); the extended value is still reported. The two Pythagorean residuals are those of
    ``|B^-A^-z|^2 = |B^-A^-z - (AB)^-z|^2 + |(AB)^-z|^2`` and
    ``|B(AB)^-z|^2 = |B(AB)^-z - A^-z|^2 + |A^-z|^2``.
    """

    ab_inv_z: np.ndarray
    b_inv_a_inv_z: np.ndarray
    in_domain: bool
    b_ab_inv_z: np.ndarray
    a_inv_z: np.ndarray
    conditions: dict
    residual_composition: float
    residual_mid: float

    @property
    def agree(self) -> bool:
        return len(set(self.conditions.values())) == 1


def composition_report(A, B, z, tol: Tolerances = DEFAULT_TOL) -> CompositionReport:
    A = A if isinstance(A, FdLinearMap) else FdLinearMap(A)
    B = B if isinstance(B, FdLinearMap) else FdLinearMap(B)
    if A.domain_dim != B.codomain_dim:
        raise ValueError(f"maps are not composable: {A.matrix.shape} after {B.matrix.shape}")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    AB = A @ B
    ab_inv_z = min_norm_preimage(AB, z, tol)
    a_inv_z = partial_inverse(A) @ z
    b_ab_inv_z = B @ ab_inv_z
    eps = tol.equal * max(1.0, float(np.linalg.norm(z)))

    b_inv_a_inv_z = partial_inverse(B) @ a_inv_z
    in_domain = B.in_range(a_inv_z, tol)
    if in_domain:
        cond_a = bool(np.linalg.norm(ab_inv_z - b_inv_a_inv_z) <= eps)
        cond_b = bool(abs(np.linalg.norm(ab_inv_z) - np.linalg.norm(b_inv_a_inv_z)) <= eps)
        res_comp = float(
            np.dot(b_inv_a_inv_z, b_inv_a_inv_z)
            - np.sum((b_inv_a_inv_z - ab_inv_z) ** 2)
            - np.dot(ab_inv_z, ab_inv_z)
        )
    else:
        cond_a = cond_b = False
        res_comp = 0.0
    cond_c = bool(np.linalg.norm(b_ab_inv_z - a_inv_z) <= eps)
    cond_d = bool(abs(np.linalg.norm(b_ab_inv_z) - np.linalg.norm(a_inv_z)) <= eps)
    res_mid = float(
        np.dot(b_ab_inv_z, b_ab_inv_z) - np.sum((b_ab_inv_z - a_inv_z) ** 2) - np.dot(a_inv_z, a_inv_z)
    )
    return CompositionReport(
        ab_inv_z=ab_inv_z,
        b_inv_a_inv_z=b_inv_a_inv_z,
        in_domain=in_domain,
        b_ab_inv_z=b_ab_inv_z,
        a_inv_z=a_inv_z,
        conditions={"a": cond_a, "b": cond_b, "c": cond_c, "d": cond_d},
        residual_composition=res_comp,
        residual_mid=res_mid,
    )
