"""Error and disturbance of processes, in both definitions, and their identities.

The contraction loss of ``A`` is ``sqrt(|A|^2 - |push A|^2)`` and the
representability loss is ``sqrt(|pull^- A|^2 - |A|^2)`` (``+inf`` when ``A``
is outside the range of the pullback). Radicands are not formed as plain
differences: with ``phi = push a`` the contraction radicand equals
``|a - pull phi|^2 + excess(phi)``, where ``excess`` is a sum of squares for
measurements, Kraus channels and classical processes. This keeps lossless
cases at round-off level instead of ``sqrt(1e-16)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_TOL, NegativeRadicand, Tolerances, stdv
from .localize import ProcessMaps
from .process import Channel, Measurement, Process, compose

CONTRACTION = "contraction"
REPRESENTABILITY = "representability"


class NotRepresentative(ValueError):
    """The supplied function does not represent the observable over the state."""


class NotRepresentable(ValueError):
    """The observable is not in the range of the pullback."""


@dataclass(frozen=True)
class LossValue:
    value: float
    representable: bool
    definition: str

    def __float__(self) -> float:
        return self.value

    @property
    def squared(self) -> float:
        return self.value**2


def _root(radicand: float, tol: Tolerances) -> float:
    if radicand < -tol.radicand:
        raise NegativeRadicand(f"loss radicand {radicand:.3g} is negative beyond round-off")
    return math.sqrt(max(radicand, 0.0))


# -- coordinate-level kernels (shared bases are the caller's business) ---------------


def contraction_sq(maps: ProcessMaps, a) -> float:
    a = np.asarray(a, dtype=float)
    phi = maps.push(a)
    return float(np.sum((a - maps.pull(phi)) ** 2)) + maps.excess(phi)


def representability_sq(maps: ProcessMaps, a) -> float:
    """Squared representability loss; ``inf`` if ``a`` is not representable."""
    a = np.asarray(a, dtype=float)
    if not maps.representable(a):
        return math.inf
    f = maps.pullback_pinv @ a
    return float(np.sum((a - maps.pull(f)) ** 2)) + maps.excess(f)


def gauge_sq(maps: ProcessMaps, a, phi) -> float:
    a, phi = np.asarray(a, dtype=float), np.asarray(phi, dtype=float)
    return float(np.sum((a - maps.pull(phi)) ** 2)) + maps.excess(phi)


def _loss(maps: ProcessMaps, a, definition: str) -> LossValue:
    tol = maps.tol
    if definition == CONTRACTION:
        return LossValue(_root(contraction_sq(maps, a), tol), maps.representable(a), CONTRACTION)
    sq = representability_sq(maps, a)
    if math.isinf(sq):
        return LossValue(math.inf, False, REPRESENTABILITY)
    return LossValue(_root(sq, tol), True, REPRESENTABILITY)


def _maps(process, rho, tol, maps):
    return maps if maps is not None else ProcessMaps(process, rho, tol)


# -- public losses ------------------------------------------------------------------


def error(A, M: Process, rho, tol: Tolerances = DEFAULT_TOL, maps: ProcessMaps | None = None) -> LossValue:
    """Error of ``M`` in measuring ``A`` over ``rho`` (contraction definition)."""
    maps = _maps(M, rho, tol, maps)
    return _loss(maps, maps.in_space.localize(A), CONTRACTION)


def disturbance(B, theta: Process, rho, tol: Tolerances = DEFAULT_TOL, maps: ProcessMaps | None = None) -> LossValue:
    maps = _maps(theta, rho, tol, maps)
    return _loss(maps, maps.in_space.localize(B), CONTRACTION)


def error_rep(A, M: Process, rho, tol: Tolerances = DEFAULT_TOL, maps: ProcessMaps | None = None) -> LossValue:
    """Error under local representability; ``inf`` when ``A`` is not representable."""
    maps = _maps(M, rho, tol, maps)
    return _loss(maps, maps.in_space.localize(A), REPRESENTABILITY)


def disturbance_rep(B, theta: Process, rho, tol: Tolerances = DEFAULT_TOL, maps: ProcessMaps | None = None) -> LossValue:
    maps = _maps(theta, rho, tol, maps)
    return _loss(maps, maps.in_space.localize(B), REPRESENTABILITY)


def gauge(A, f, M: Process, rho, tol: Tolerances = DEFAULT_TOL, maps: ProcessMaps | None = None) -> float:
    """Reconstruction cost of ``A`` from the function ``f`` of the outcomes of ``M``."""
    maps = _maps(M, rho, tol, maps)
    return _root(gauge_sq(maps, maps.in_space.localize(A), maps.out_space.localize(f)), tol)


@dataclass(frozen=True)
class GaugeDecomposition:
    gauge_sq: float
    error_sq: float
    suboptimality_sq: float  # |push A - f|^2

    @property
    def residual(self) -> float:
        return self.gauge_sq - self.error_sq - self.suboptimality_sq


def gauge_decomposition(A, f, M: Process, rho, tol: Tolerances = DEFAULT_TOL,
                        maps: ProcessMaps | None = None) -> GaugeDecomposition:
    maps = _maps(M, rho, tol, maps)
    a, phi = maps.in_space.localize(A), maps.out_space.localize(f)
    return GaugeDecomposition(
        gauge_sq=gauge_sq(maps, a, phi),
        error_sq=contraction_sq(maps, a),
        suboptimality_sq=float(np.sum((maps.push(a) - phi) ** 2)),
    )


def loss_gap_sq(A, P: Process, rho, tol: Tolerances = DEFAULT_TOL, maps: ProcessMaps | None = None) -> float:
    """``|pull^- A - push A|^2``, the gap between the two squared losses (``inf`` if not representable)."""
    maps = _maps(P, rho, tol, maps)
    a = maps.in_space.localize(A)
    if not maps.representable(a):
        return math.inf
    return float(np.sum((maps.pullback_pinv @ a - maps.push(a)) ** 2))


# -- lossless conditions ----------------------------------------------------------------


@dataclass(frozen=True)
class LosslessReport:
    """The five lossless conditions (a)-(e) and the witness residual.

    (a) representable with zero representability loss; (b) the partial
    inverses reconstruct ``A``; (c) the two losses coincide; (d) ``A`` is
    reproduced by pullback after pushforward; (e) zero contraction loss.
    ``witness_residual`` is ``|pull^- A - push A|`` (``inf`` if not
    representable).
    """

    conditions: dict
    witness_residual: float
    error: LossValue
    error_rep: LossValue

    @property
    def consistent(self) -> bool:
        return len(set(self.conditions.values())) == 1

    @property
    def lossless(self) -> bool:
        return all(self.conditions.values())


def lossless_report(A, P: Process, rho, tol: Tolerances = DEFAULT_TOL, maps: ProcessMaps | None = None) -> LosslessReport:
    maps = _maps(P, rho, tol, maps)
    a = maps.in_space.localize(A)
    eps = _loss(maps, a, CONTRACTION)
    eps_rep = _loss(maps, a, REPRESENTABILITY)
    tau = tol.equal
    cond_b = False
    witness = math.inf
    if eps_rep.representable:
        f = maps.pullback_pinv @ a
        witness = float(np.linalg.norm(f - maps.push(a)))
        if maps.pushforward.in_range(f, tol):
            cond_b = bool(np.linalg.norm(a - maps.pushforward_pinv @ f) <= tau)
    conditions = {
        "a": bool(eps_rep.representable and eps_rep.value <= tau),
        "b": cond_b,
        "c": bool(eps_rep.representable and abs(eps_rep.value - eps.value) <= tau),
        "d": bool(np.linalg.norm(a - maps.pull(maps.push(a))) <= tau),
        "e": bool(eps.value <= tau),
    }
    return LosslessReport(conditions=conditions, witness_residual=witness, error=eps, error_rep=eps_rep)


# -- variance decomposition -------------------------------------------------------------------


@dataclass(frozen=True)
class VarianceDecomposition:
    """``stdv(f)^2 = stdv(A)^2 + error_rep^2 + suboptimality``."""

    stdv_f_sq: float
    stdv_A_sq: float
    error_rep_sq: float
    suboptimality: float

    @property
    def residual(self) -> float:
        return self.stdv_f_sq - self.stdv_A_sq - self.error_rep_sq - self.suboptimality

    def as_tuple(self) -> tuple:
        return (self.stdv_f_sq, self.stdv_A_sq, self.error_rep_sq, self.suboptimality)


def is_representative(f, A, M: Process, rho, tol: Tolerances = DEFAULT_TOL, maps: ProcessMaps | None = None) -> bool:
    maps = _maps(M, rho, tol, maps)
    a = maps.in_space.localize(A)
    return maps.in_space.equal(a, maps.pull(maps.out_space.localize(f)), tol)


def variance_decomposition(f, A, M: Process, rho, tol: Tolerances = DEFAULT_TOL,
                           maps: ProcessMaps | None = None) -> VarianceDecomposition:
    maps = _maps(M, rho, tol, maps)
    a = maps.in_space.localize(A)
    phi = maps.out_space.localize(f)
    if not maps.in_space.equal(a, maps.pull(phi), tol):
        raise NotRepresentative("f does not represent A over the state")
    f_opt = maps.pullback_pinv @ a
    return VarianceDecomposition(
        stdv_f_sq=stdv(np.asarray(f, dtype=float), maps.out_state) ** 2,
        stdv_A_sq=stdv(A, maps.state) ** 2,
        error_rep_sq=maps.excess(f_opt),
        suboptimality=float(np.sum((f_opt - phi) ** 2)),
    )


# -- composite measurements ------------------------------------------------------------------------


@dataclass
class CompositeDecomposition:
    """Error of ``L o Theta`` split into the disturbance of ``Theta`` and the error of ``L``.

    Contraction part: ``error_sq = disturbance_sq + secondary_error_sq``.

    Representability part (``None`` when ``A`` is not representable by the
    composite): two exact decompositions, the sandwich bounds and the
    equivalent conditions (a)-(g). ``upper`` is ``inf`` and ``decomposition_1``
    is ``None`` when the partial inverse of ``A`` under the disturbance
    pullback is not representable by ``L``.
    """

    error_sq: float
    disturbance_sq: float
    secondary_error_sq: float
    rep: dict | None = None
    conditions: dict = field(default_factory=dict)
    projective_reduction_residual: float | None = None

    @property
    def residual(self) -> float:
        return self.error_sq - self.disturbance_sq - self.secondary_error_sq

    @property
    def consistent(self) -> bool:
        return len(set(self.conditions.values())) <= 1


def composite_maps(theta: Channel, L: Measurement, rho, tol: Tolerances = DEFAULT_TOL):
    """Maps of ``theta``, ``L`` and ``L o theta`` over shared localized spaces."""
    mt = ProcessMaps(theta, rho, tol)
    ml = ProcessMaps(L, mt.out_state, tol, in_space=mt.out_space)
    N = compose(L, theta, tol)
    mn = ProcessMaps(N, rho, tol, in_space=mt.in_space, out_space=ml.out_space)
    return mt, ml, mn


def composite_decomposition(A, theta: Channel, L: Measurement, rho, tol: Tolerances = DEFAULT_TOL) -> CompositeDecomposition:
    mt, ml, mn = composite_maps(theta, L, rho, tol)
    a = mt.in_space.localize(A)
    c = mt.push(a)
    report = CompositeDecomposition(
        error_sq=contraction_sq(mn, a),
        disturbance_sq=contraction_sq(mt, a),
        secondary_error_sq=contraction_sq(ml, c),
    )
    if not mn.representable(a):
        return report

    w = mn.pullback_pinv @ a  # (pull_theta pull_L)^- a
    u = mt.pullback_pinv @ a  # pull_theta^- a
    theta_l = ml.pull(w)
    err_n = representability_sq(mn, a)
    dist = representability_sq(mt, a)
    lower_l = representability_sq(ml, theta_l)
    scale = max(1.0, float(np.dot(a, a)))
    tau = tol.equal * scale

    dev2 = float(np.sum((theta_l - u) ** 2))
    rep = {
        "error_sq": err_n,
        "disturbance_sq": dist,
        "lower": dist + lower_l,
        "decomposition_2_residual": err_n - (dist + lower_l + dev2),
        "deviation_2": dev2,
    }
    if ml.representable(u):
        v = ml.pullback_pinv @ u  # pull_L^- pull_theta^- a
        upper_l = representability_sq(ml, u)
        dev1 = float(np.sum((v - w) ** 2))
        rep.update(upper=dist + upper_l, deviation_1=dev1,
                   decomposition_1_residual=err_n - (dist + upper_l - dev1))
        cond_a = abs(dist + upper_l - err_n) <= tau
        cond_d = dev1 <= tau
        cond_e = abs(np.dot(v, v) - np.dot(w, w)) <= tau
    else:
        rep.update(upper=math.inf, deviation_1=math.inf, decomposition_1_residual=None)
        cond_a = cond_d = cond_e = False
    cond_b = abs(dist + lower_l - err_n) <= tau
    report.rep = rep
    report.conditions = {
        "a": bool(cond_a),
        "b": bool(cond_b),
        "c": bool(cond_a and cond_b),
        "d": bool(cond_d),
        "e": bool(cond_e),
        "f": bool(dev2 <= tau),
        "g": bool(abs(np.dot(theta_l, theta_l) - np.dot(u, u)) <= tau),
    }
    if L.is_projective(tol) and ml.representable(u):
        report.projective_reduction_residual = err_n - (dist + representability_sq(ml, u))
    return report
