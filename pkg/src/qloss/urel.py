"""Uncertainty relations: lower-bound contributors, slack, and reduction chains.

Every relation is returned as a :class:`RelationReport`. ``holds`` compares
the slack ``lhs - bound`` against ``tol.holds``; a failing report signals
either a bug or an invalid (unchecked, non-positive) input.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import DEFAULT_TOL, Tolerances, ValidationError, expectation, sqrt_psd, stdv, symm_antisymm_ev
from .localize import ProcessMaps
from .loss import (
    NotRepresentable,
    NotRepresentative,
    _root,
    contraction_sq,
    gauge_sq,
    representability_sq,
)
from .process import Channel, Instrument, Measurement, compose
from .seqmeas import (
    JointMeasurement,
    JointSpaces,
    disturbance_witness,
    induced,
    marginals,
    require_local_joint,
    sequential_joint,
)


class NotUnbiased(ValueError):
    """The measurement does not reproduce the observable as an operator identity."""


@dataclass
class BoundTerms:
    R: float | None = None
    I: float | None = None
    R_tilde: float | None = None
    I0: float | None = None
    R0: float | None = None


@dataclass
class RelationReport:
    relation: str
    lhs: float
    bound: float
    terms: BoundTerms
    tol: float = DEFAULT_TOL.holds
    notes: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        if math.isinf(self.lhs) and math.isinf(self.bound):
            return 0.0
        return self.lhs - self.bound

    @property
    def holds(self) -> bool:
        return bool(self.slack >= -self.tol)

    def to_json(self) -> dict:
        out = {
            "relation": self.relation,
            "lhs": self.lhs,
            "bound": self.bound,
            "slack": self.slack,
            "terms": asdict(self.terms),
            "holds": self.holds,
        }
        if self.notes:
            out["notes"] = self.notes
        return out


def _comm(X, Y, rho) -> float:
    """``<[X, Y] / 2i>``."""
    return symm_antisymm_ev(X, Y, rho)[1]


def _report(name, lhs, bound, terms, tol, **notes) -> RelationReport:
    return RelationReport(relation=name, lhs=float(lhs), bound=float(bound), terms=terms, tol=tol.holds, notes=notes)


# -- joint measurements ---------------------------------------------------------------------


def _gauge_terms(A, B, js: JointSpaces, phi, gamma, rho):
    """``R`` and ``I`` of the gauge relation for quotient coordinates ``phi`` (of M) and ``gamma`` (of N)."""
    S = js.state_space
    a, b = S.localize(A), S.localize(B)
    sym, I0 = symm_antisymm_ev(A, B, rho)
    R = (sym - float(np.dot(phi, js.M.push(b))) - float(np.dot(js.N.push(a), gamma))
         + float(np.dot(js.pi1.pull(phi), js.pi2.pull(gamma))))
    X = S.representative(js.M.pull(phi))
    Y = S.representative(js.N.pull(gamma))
    I = I0 - _comm(X, B, rho) - _comm(A, Y, rho)
    return R, I, I0, sym


def joint_error_relation(A, B, M: Measurement, N: Measurement, J: JointMeasurement, rho,
                         tol: Tolerances = DEFAULT_TOL, spaces: JointSpaces | None = None) -> RelationReport:
    """``error(A; M) error(B; N) >= sqrt(R^2 + I^2)`` for a local joint measurement ``J``."""
    js = spaces or require_local_joint(M, N, J, rho, tol)
    S = js.state_space
    a, b = S.localize(A), S.localize(B)
    fa, fb = js.M.push(a), js.M.push(b)
    ga, gb = js.N.push(a), js.N.push(b)
    sym, I0 = symm_antisymm_ev(A, B, rho)
    corr = float(np.dot(js.pi1.pull(fa), js.pi2.pull(gb)))
    R = sym - float(np.dot(fa, fb)) - float(np.dot(ga, gb)) + corr
    I = I0 - _comm(S.representative(js.M.pull(fa)), B, rho) - _comm(A, S.representative(js.N.pull(gb)), rho)
    lhs = _root(contraction_sq(js.M, a), tol) * _root(contraction_sq(js.N, b), tol)
    return _report("joint_error", lhs, math.hypot(R, I), BoundTerms(R=R, I=I, I0=I0), tol,
                   naive_bound=abs(I0))


def joint_error_relation_rep(A, B, M: Measurement, N: Measurement, J: JointMeasurement, rho,
                             tol: Tolerances = DEFAULT_TOL, spaces: JointSpaces | None = None) -> RelationReport:
    """Representability form: ``error_rep(A; M) error_rep(B; N) >= sqrt(R_tilde^2 + I0^2)``."""
    js = spaces or require_local_joint(M, N, J, rho, tol)
    S = js.state_space
    a, b = S.localize(A), S.localize(B)
    if not (js.M.representable(a) and js.N.representable(b)):
        raise NotRepresentable("observables are not representable by the respective measurements")
    f, g = js.M.pullback_pinv @ a, js.N.pullback_pinv @ b
    sym, I0 = symm_antisymm_ev(A, B, rho)
    R_tilde = sym - float(np.dot(js.pi1.pull(f), js.pi2.pull(g)))
    lhs = _root(representability_sq(js.M, a), tol) * _root(representability_sq(js.N, b), tol)
    rep = _report("joint_error_rep", lhs, math.hypot(R_tilde, I0), BoundTerms(R_tilde=R_tilde, I0=I0), tol,
                  naive_bound=abs(I0))
    return rep


def gauge_relation(A, f, B, g, M: Measurement, N: Measurement, J: JointMeasurement, rho,
                   tol: Tolerances = DEFAULT_TOL, spaces: JointSpaces | None = None) -> RelationReport:
    """``gauge(A, f; M) gauge(B, g; N) >= sqrt(R^2 + I^2)`` with the f,g-dependent contributors."""
    js = spaces or require_local_joint(M, N, J, rho, tol)
    phi, gamma = js.M.out_space.localize(f), js.N.out_space.localize(g)
    return _gauge_relation_coords(A, B, js, phi, gamma, rho, tol)


def _gauge_relation_coords(A, B, js, phi, gamma, rho, tol, name="gauge"):
    S = js.state_space
    a, b = S.localize(A), S.localize(B)
    R, I, I0, _ = _gauge_terms(A, B, js, phi, gamma, rho)
    lhs = _root(gauge_sq(js.M, a, phi), tol) * _root(gauge_sq(js.N, b, gamma), tol)
    return _report(name, lhs, math.hypot(R, I), BoundTerms(R=R, I=I, I0=I0), tol)


def statistical_cost_relation(f, g, A, B, M: Measurement, N: Measurement, J: JointMeasurement, rho,
                              tol: Tolerances = DEFAULT_TOL, spaces: JointSpaces | None = None) -> RelationReport:
    """``stdv(f) stdv(g) >= sqrt((|R_tilde| + |R0|)^2 + 4 I0^2)`` for representatives ``f``, ``g``."""
    js = spaces or require_local_joint(M, N, J, rho, tol)
    S = js.state_space
    a, b = S.localize(A), S.localize(B)
    phi, gamma = js.M.out_space.localize(f), js.N.out_space.localize(g)
    if not S.equal(a, js.M.pull(phi), tol) or not S.equal(b, js.N.pull(gamma), tol):
        raise NotRepresentative("f and g must represent A and B over the state")
    ft, gt = js.M.pullback_pinv @ a, js.N.pullback_pinv @ b
    sym, I0 = symm_antisymm_ev(A, B, rho)
    R_tilde = sym - float(np.dot(js.pi1.pull(ft), js.pi2.pull(gt)))
    R0 = sym - expectation(A, rho) * expectation(B, rho)
    lhs = stdv(np.asarray(f, dtype=float), js.M.out_state) * stdv(np.asarray(g, dtype=float), js.N.out_state)
    bound = math.sqrt((abs(R_tilde) + abs(R0)) ** 2 + 4 * I0**2)
    return _report("statistical_cost", lhs, bound, BoundTerms(R_tilde=R_tilde, I0=I0, R0=R0), tol)


def schrodinger_kr(A, B, rho, tol: Tolerances = DEFAULT_TOL) -> tuple[RelationReport, RelationReport]:
    """Schrodinger and Kennard-Robertson relations for ``A``, ``B`` over ``rho``."""
    sym, I0 = symm_antisymm_ev(A, B, rho)
    R0 = sym - expectation(A, rho) * expectation(B, rho)
    lhs = stdv(A, rho) * stdv(B, rho)
    terms = BoundTerms(R0=R0, I0=I0)
    return (_report("schrodinger", lhs, math.hypot(R0, I0), terms, tol),
            _report("kennard_robertson", lhs, abs(I0), BoundTerms(R0=R0, I0=I0), tol))


# -- error and disturbance ------------------------------------------------------------------


ED_VARIANTS = ("full", "simple", "representability", "representability_simple")


def error_disturbance_relation(A, B, instr: Instrument, rho, variant: str = "full",
                               tol: Tolerances = DEFAULT_TOL) -> RelationReport:
    """``error(A; M) disturbance(B; Theta) >= bound`` for the measurement and channel of ``instr``.

    The full variants evaluate the joint-correlation term with the exact
    witness secondary measurement (see :func:`disturbance_witness`); the
    witness is recorded in ``notes``.
    """
    if variant not in ED_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {ED_VARIANTS}")
    M, theta = induced(instr, tol)
    mm = ProcessMaps(M, rho, tol)
    S = mm.in_space
    mt = ProcessMaps(theta, rho, tol, in_space=S)
    a, b = S.localize(A), S.localize(B)
    sym, I0 = symm_antisymm_ev(A, B, rho)

    if variant.startswith("representability"):
        if not (mm.representable(a) and mt.representable(b)):
            raise NotRepresentable("A must be representable by the measurement and B by its channel")
        lhs = _root(representability_sq(mm, a), tol) * _root(representability_sq(mt, b), tol)
        if variant == "representability_simple":
            return _report("error_disturbance_rep_simple", lhs, abs(I0), BoundTerms(I0=I0), tol)
        wit = disturbance_witness(B, instr, rho, "representability", tol)
        J = sequential_joint(instr, wit.secondary, tol)
        N = compose(wit.secondary, theta, tol)
        js = require_local_joint(M, N, J, rho, tol)
        f, g = js.M.pullback_pinv @ a, js.N.pullback_pinv @ b
        R_tilde = sym - float(np.dot(js.pi1.pull(f), js.pi2.pull(g)))
        return _report("error_disturbance_rep", lhs, math.hypot(R_tilde, I0), BoundTerms(R_tilde=R_tilde, I0=I0), tol,
                       witness_outcomes=len(wit.secondary.space), witness_error=wit.achieved)

    fa, fb = mm.push(a), mm.push(b)
    ca, cb = mt.push(a), mt.push(b)
    X = S.representative(mm.pull(fa))
    Y = S.representative(mt.pull(cb))
    I = I0 - _comm(X, B, rho) - _comm(A, Y, rho)
    lhs = _root(contraction_sq(mm, a), tol) * _root(contraction_sq(mt, b), tol)
    if variant == "simple":
        return _report("error_disturbance_simple", lhs, abs(I), BoundTerms(I=I, I0=I0), tol, naive_bound=abs(I0))
    wit = disturbance_witness(B, instr, rho, "contraction", tol)
    J = sequential_joint(instr, wit.secondary, tol)
    N = compose(wit.secondary, theta, tol)
    js = require_local_joint(M, N, J, rho, tol)
    corr = float(np.dot(js.pi1.pull(js.M.push(a)), js.pi2.pull(js.N.push(b))))
    R = sym - float(np.dot(fa, fb)) - float(np.dot(ca, cb)) + corr
    return _report("error_disturbance", lhs, math.hypot(R, I), BoundTerms(R=R, I=I, I0=I0), tol,
                   naive_bound=abs(I0), witness_outcomes=len(wit.secondary.space), witness_error=wit.achieved)


# -- reductions: Ozawa, AKG ------------------------------------------------------------------


def ozawa_error(A, M: Measurement, rho, f=None) -> float:
    """``sqrt(<M'(x^2) - M'(x) A - A M'(x) + A^2>)`` with ``x`` the outcome values (or ``f``)."""
    x = M.space.value_function() if f is None else np.asarray(f, dtype=float)
    A = np.asarray(A, dtype=complex)
    s = sqrt_psd(rho)
    eye = np.eye(M.dim)
    return math.sqrt(sum(np.linalg.norm(R @ (xw * eye - A) @ s) ** 2 for xw, R in zip(x, M._sqrt_effects)))


def ozawa_disturbance(B, theta: Channel, rho, tol: Tolerances = DEFAULT_TOL) -> float:
    """``sqrt(<Theta'(B^2) - Theta'(B) B - B Theta'(B) + B^2>)`` for an endomorphic channel."""
    if theta.in_dim != theta.out_dim:
        raise ValidationError("Ozawa disturbance needs a channel from a system to itself")
    B = np.asarray(B, dtype=complex)
    if theta.kraus is not None:
        s = sqrt_psd(rho)
        return math.sqrt(sum(np.linalg.norm((B @ K - K @ B) @ s) ** 2 for K in theta.kraus))
    TB = theta.adjoint_apply(B)
    r = expectation(theta.adjoint_apply(B @ B) - TB @ B - B @ TB + B @ B, rho)
    return _root(r, tol)


@dataclass
class ChainReport:
    """A chain of inequalities ``values[0] >= values[1] >= ...`` with per-link slack."""

    name: str
    labels: list
    values: list
    tol: float = DEFAULT_TOL.holds
    extra: dict = field(default_factory=dict)

    @property
    def slacks(self) -> list:
        out = []
        for hi, lo in zip(self.values, self.values[1:]):
            out.append(None if hi is None or lo is None else hi - lo)
        return out

    @property
    def holds(self) -> bool:
        return all(s is None or s >= -self.tol for s in self.slacks)

    def to_json(self) -> dict:
        return {"chain": self.name, "links": [
            {"upper": u, "lower": l, "slack": s}
            for u, l, s in zip(self.labels, self.labels[1:], self.slacks)
        ], "values": dict(zip(self.labels, self.values)), "holds": self.holds, **self.extra}


def ozawa_quantities(A, B, M: Measurement, theta: Channel, rho, instrument: Instrument | None = None,
                     tol: Tolerances = DEFAULT_TOL) -> ChainReport:
    """Ozawa's error and disturbance against the contraction losses, link by link.

    The link through ``sqrt(R^2 + I^2)`` needs the joint statistics of the
    measurement and its channel, so it is evaluated only when ``instrument``
    is given (its induced pair must match ``M`` and ``theta``); otherwise
    that value is ``None`` and the link is skipped.
    """
    if M.space.values is None:
        raise ValidationError("Ozawa error needs real outcome values")
    e_oz, n_oz = ozawa_error(A, M, rho), ozawa_disturbance(B, theta, rho, tol)
    mm = ProcessMaps(M, rho, tol)
    mt = ProcessMaps(theta, rho, tol, in_space=mm.in_space)
    S = mm.in_space
    a, b = S.localize(A), S.localize(B)
    eps, eta = _root(contraction_sq(mm, a), tol), _root(contraction_sq(mt, b), tol)
    _, I0 = symm_antisymm_ev(A, B, rho)
    X = S.representative(mm.pull(mm.push(a)))
    Y = S.representative(mt.pull(mt.push(b)))
    I = I0 - _comm(X, B, rho) - _comm(A, Y, rho)
    full = None
    if instrument is not None:
        M2, theta2 = induced(instrument, tol)
        if np.abs(M2.matrix - M.matrix).max() > tol.validity or np.abs(theta2.superop - theta.superop).max() > tol.validity:
            raise ValidationError("instrument does not induce the given measurement and channel")
        full = error_disturbance_relation(A, B, instrument, rho, "full", tol).bound
    tail = abs(I0) - e_oz * stdv(B, rho) - stdv(A, rho) * n_oz
    return ChainReport(
        name="ozawa_error_disturbance",
        labels=["ozawa_product", "loss_product", "sqrt_R2_I2", "abs_I", "ozawa_tail"],
        values=[e_oz * n_oz, eps * eta, full, abs(I), tail],
        tol=tol.holds,
        extra={"ozawa_error": e_oz, "ozawa_disturbance": n_oz, "error": eps, "disturbance": eta},
    )


def ozawa_joint_chain(A, B, J: JointMeasurement, rho, tol: Tolerances = DEFAULT_TOL) -> ChainReport:
    """The joint-measurement chain with Ozawa errors of the two marginals of ``J``."""
    M1, M2 = marginals(J, tol)
    if M1.space.values is None or M2.space.values is None:
        raise ValidationError("Ozawa errors need real outcome values on both factors")
    rel = joint_error_relation(A, B, M1, M2, J, rho, tol)
    e1, e2 = ozawa_error(A, M1, rho), ozawa_error(B, M2, rho)
    tail = abs(rel.terms.I0) - e1 * stdv(B, rho) - stdv(A, rho) * e2
    return ChainReport(
        name="ozawa_joint",
        labels=["ozawa_product", "loss_product", "sqrt_R2_I2", "abs_I", "ozawa_tail"],
        values=[e1 * e2, rel.lhs, rel.bound, abs(rel.terms.I), tail],
        tol=tol.holds,
        extra={"ozawa_error_A": e1, "ozawa_error_B": e2},
    )


@dataclass
class AkgReport:
    error_chain: ChainReport
    stdv_chain: ChainReport

    @property
    def holds(self) -> bool:
        return self.error_chain.holds and self.stdv_chain.holds

    def to_json(self) -> dict:
        return {"error_chain": self.error_chain.to_json(), "stdv_chain": self.stdv_chain.to_json(), "holds": self.holds}


def akg_report(A, B, M: Measurement, N: Measurement, J: JointMeasurement, rho, f=None, g=None,
               tol: Tolerances = DEFAULT_TOL) -> AkgReport:
    """Arthurs-Kelly-Goodman chains for a globally unbiased joint measurement."""
    f = M.space.value_function() if f is None else np.asarray(f, dtype=float)
    g = N.space.value_function() if g is None else np.asarray(g, dtype=float)
    A, B = np.asarray(A, dtype=complex), np.asarray(B, dtype=complex)
    for name, P, h, X in (("A", M, f, A), ("B", N, g, B)):
        dev = np.abs(P.adjoint_apply(h) - X).max()
        if dev > tol.validity:
            raise NotUnbiased(f"measurement is not unbiased for {name} (deviation {dev:.3g})")
    js = require_local_joint(M, N, J, rho, tol)
    rep = joint_error_relation_rep(A, B, M, N, J, rho, tol, spaces=js)
    e_a, e_b = ozawa_error(A, M, rho, f), ozawa_error(B, N, rho, g)
    I0 = rep.terms.I0
    error_chain = ChainReport(
        name="akg_error",
        labels=["akg_product", "rep_loss_product", "sqrt_Rt2_I02", "half_commutator"],
        values=[e_a * e_b, rep.lhs, rep.bound, abs(I0)],
        tol=tol.holds,
        extra={"akg_error_A": e_a, "akg_error_B": e_b},
    )
    S = js.state_space
    ft = js.M.pullback_pinv @ S.localize(A)
    gt = js.N.pullback_pinv @ S.localize(B)
    cost = statistical_cost_relation(js.M.out_space.representative(ft), js.N.out_space.representative(gt),
                                     A, B, M, N, J, rho, tol, spaces=js)
    stdv_chain = ChainReport(
        name="akg_stdv",
        labels=["outcome_stdv_product", "optimal_stdv_product", "cost_bound", "commutator"],
        values=[stdv(f, js.M.out_state) * stdv(g, js.N.out_state), cost.lhs, cost.bound, 2 * abs(I0)],
        tol=tol.holds,
    )
    return AkgReport(error_chain=error_chain, stdv_chain=stdv_chain)


# -- no-go -----------------------------------------------------------------------------------


@dataclass
class NoGoReport:
    """Whether a nonzero commutator forbids both losses from vanishing, and whether that holds."""

    applies: bool
    commutator: float
    losses: dict
    both_lossless: bool
    rep_bound: float | None = None
    rep_losses: dict | None = None

    @property
    def holds(self) -> bool:
        if not self.applies:
            return True
        ok = not self.both_lossless
        if self.rep_losses is not None:
            ok = ok and all(v > 0 for v in self.rep_losses.values())
        return ok

    def to_json(self) -> dict:
        return {"applies": self.applies, "commutator_half": self.commutator, "losses": self.losses,
                "both_lossless": self.both_lossless, "rep_bound": self.rep_bound,
                "rep_losses": self.rep_losses, "holds": self.holds}


def no_go_report(A, B, rho, scenario: str, *, M: Measurement | None = None, N: Measurement | None = None,
                 J: JointMeasurement | None = None, instrument: Instrument | None = None,
                 tol: Tolerances = DEFAULT_TOL) -> NoGoReport:
    """Check that ``<[A, B]> != 0`` rules out a lossless pair.

    ``scenario="joint"`` needs ``M``, ``N`` and ``J``;
    ``scenario="sequential"`` needs ``instrument`` and compares the error
    of its measurement with the disturbance of its channel.
    """
    _, I0 = symm_antisymm_ev(A, B, rho)
    applies = abs(I0) > tol.holds
    if scenario == "joint":
        js = require_local_joint(M, N, J, rho, tol)
        first, second = js.M, js.N
        keys = ("error_A", "error_B")
    elif scenario == "sequential":
        M_, theta = induced(instrument, tol)
        first = ProcessMaps(M_, rho, tol)
        second = ProcessMaps(theta, rho, tol, in_space=first.in_space)
        keys = ("error_A", "disturbance_B")
    else:
        raise ValueError(f"unknown scenario {scenario!r}")
    S = first.in_space
    a, b = S.localize(A), S.localize(B)
    losses = {keys[0]: _root(contraction_sq(first, a), tol), keys[1]: _root(contraction_sq(second, b), tol)}
    both = all(v <= tol.equal for v in losses.values())
    rep_bound = rep_losses = None
    if first.representable(a) and second.representable(b):
        rep_losses = {k + "_rep": _root(representability_sq(m, x), tol)
                      for k, m, x in zip(keys, (first, second), (a, b))}
        rep_bound = abs(I0)
    return NoGoReport(applies=applies, commutator=abs(I0), losses=losses, both_lossless=both,
                      rep_bound=rep_bound, rep_losses=rep_losses)

