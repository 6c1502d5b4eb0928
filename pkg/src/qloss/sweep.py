"""Randomized verification sweeps over every relation.

Each relation gets ``count`` scenarios, cycled over ``dims``. Scenario ``k``
of a relation draws from its own generator, spawned from the seed, so
reports are reproducible bit for bit and independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DEFAULT_TOL, SampleSpace, Tolerances
from .loss import NotRepresentable
from .process import Measurement, compose
from .rand import (
    random_function,
    random_instrument,
    random_observable,
    random_povm,
    random_state,
    representable_observable,
    spawn,
)
from .seqmeas import JointMeasurement, induced, joint_spaces, marginals, sequential_joint
from .urel import (
    error_disturbance_relation,
    gauge_relation,
    joint_error_relation,
    joint_error_relation_rep,
    ozawa_quantities,
    statistical_cost_relation,
)

RELATIONS = (
    "joint_error",
    "joint_error_rep",
    "gauge",
    "statistical_cost",
    "error_disturbance",
    "error_disturbance_simple",
    "error_disturbance_rep",
    "error_disturbance_rep_simple",
    "ozawa",
)


def _state(d, rng):
    # one draw in four is rank-deficient
    rank = d if rng.random() < 0.75 else int(rng.integers(1, d)) if d > 1 else 1
    return random_state(d, rng, rank)


def _joint_setup(d, rng):
    """A locally joint triple ``(M, N, J)``: either a random joint POVM or a sequential measurement."""
    n1, n2 = int(rng.integers(2, 4)), int(rng.integers(2, 4))
    if rng.random() < 0.5:
        s1, s2 = SampleSpace.range(n1), SampleSpace.range(n2)
        Jm = random_povm(d, n1 * n2, rng)
        J = JointMeasurement(measurement=Measurement(dim=d, space=s1.product(s2), effects=Jm.effects), factors=(s1, s2))
        M, N = marginals(J)
    else:
        instr = random_instrument(d, n1, rng, kraus_per=int(rng.integers(1, 3)))
        L = random_povm(d, n2, rng)
        J = sequential_joint(instr, L)
        M, theta = induced(instr)
        N = compose(L, theta)
    return M, N, J


def _draw(relation: str, d: int, rng, tol: Tolerances):
    rho = _state(d, rng)
    if relation in ("joint_error", "joint_error_rep", "gauge", "statistical_cost"):
        M, N, J = _joint_setup(d, rng)
        js = joint_spaces(M, N, J, rho, tol)
        if relation == "joint_error":
            A, B = random_observable(d, rng), random_observable(d, rng)
            return joint_error_relation(A, B, M, N, J, rho, tol, spaces=js)
        if relation == "gauge":
            A, B = random_observable(d, rng), random_observable(d, rng)
            f, g = random_function(len(M.space), rng), random_function(len(N.space), rng)
            return gauge_relation(A, f, B, g, M, N, J, rho, tol, spaces=js)
        A, f = representable_observable(M, rng)
        B, g = representable_observable(N, rng)
        if relation == "joint_error_rep":
            return joint_error_relation_rep(A, B, M, N, J, rho, tol, spaces=js)
        return statistical_cost_relation(f, g, A, B, M, N, J, rho, tol, spaces=js)

    instr = random_instrument(d, int(rng.integers(2, 4)), rng, kraus_per=int(rng.integers(1, 3)))
    if relation == "ozawa":
        M, theta = induced(instr)
        values = np.sort(rng.normal(size=len(M.space)) * 2)[::-1]
        Mv = Measurement(dim=d, space=SampleSpace.from_values(values), effects=M.effects)
        A, B = random_observable(d, rng), random_observable(d, rng)
        return ozawa_quantities(A, B, Mv, theta, rho, instrument=instr, tol=tol)
    variant = {
        "error_disturbance": "full",
        "error_disturbance_simple": "simple",
        "error_disturbance_rep": "representability",
        "error_disturbance_rep_simple": "representability_simple",
    }[relation]
    if variant.startswith("representability"):
        M, theta = induced(instr)
        A, _ = representable_observable(M, rng)
        B = theta.adjoint_apply(random_observable(theta.out_dim, rng))
    else:
        A, B = random_observable(d, rng), random_observable(d, rng)
    return error_disturbance_relation(A, B, instr, rho, variant, tol)


@dataclass
class RelationSummary:
    relation: str
    count: int = 0
    failures: int = 0
    skipped: int = 0
    min_slack: float = math.inf
    min_naive_gap: float = math.inf  # min of bound - |I0| for representability relations
    max_bound: float = -math.inf
    worst_case: int | None = None

    def to_json(self) -> dict:
        out = {
            "relation": self.relation,
            "count": self.count,
            "failures": self.failures,
            "skipped": self.skipped,
            "min_slack": self.min_slack,
            "worst_case": self.worst_case,
        }
        if self.max_bound > -math.inf:
            out["max_bound"] = self.max_bound
        if not math.isinf(self.min_naive_gap):
            out["min_bound_minus_naive"] = self.min_naive_gap
        return out


@dataclass
class SweepReport:
    dims: tuple
    count: int
    seed: int
    summaries: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(s.failures == 0 for s in self.summaries.values())

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "count": self.count,
            "seed": self.seed,
            "relations": [self.summaries[r].to_json() for r in self.summaries],
            "ok": self.ok,
        }


def _chain_min_slack(chain) -> float:
    return min(s for s in chain.slacks if s is not None)


def sweep(dims=(2, 3, 4), count: int = 100, seed: int = 1, relations=RELATIONS,
          tol: Tolerances = DEFAULT_TOL) -> SweepReport:
    dims = tuple(int(d) for d in dims)
    report = SweepReport(dims=dims, count=count, seed=seed)
    for relation in relations:
        summary = RelationSummary(relation)
        rngs = spawn(seed * 1000 + RELATIONS.index(relation), count)
        for k, rng in enumerate(rngs):
            d = dims[k % len(dims)]
            try:
                rep = _draw(relation, d, rng, tol)
            except NotRepresentable:
                summary.skipped += 1
                continue
            summary.count += 1
            if relation == "ozawa":
                slack, ok = _chain_min_slack(rep), rep.holds
            else:
                slack, ok = rep.slack, rep.holds
                summary.max_bound = max(summary.max_bound, rep.bound)
                if relation in ("joint_error_rep", "error_disturbance_rep"):
                    summary.min_naive_gap = min(summary.min_naive_gap, rep.bound - abs(rep.terms.I0))
            if slack < summary.min_slack:
                summary.min_slack, summary.worst_case = slack, k
            if not ok:
                summary.failures += 1
        report.summaries[relation] = summary
    return report
