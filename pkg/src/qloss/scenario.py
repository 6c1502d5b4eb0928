"""Scenario files: parsing, validation and evaluation into a JSON report.

A scenario is a JSON document (see ``schema/scenario.schema.json``) naming
a state, two observables, the measuring devices and a list of relations to
evaluate. :func:`run_scenario` evaluates every requested relation and
collects relation reports, loss values, lossless reports and identity
residuals. A scenario passes when every relation holds and every residual
is within the report tolerance.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from .core import (
    DEFAULT_TOL,
    NegativeRadicand,
    SampleSpace,
    Tolerances,
    ValidationError,
    as_density,
    as_hermitian,
    decode_matrix,
)
from .loss import (
    NotRepresentable,
    NotRepresentative,
    composite_decomposition,
    disturbance,
    disturbance_rep,
    error,
    error_rep,
    gauge_decomposition,
    lossless_report,
    variance_decomposition,
)
from .process import (
    Channel,
    Instrument,
    Measurement,
    compose,
    dephasing,
    luders_instrument,
    projective_from_observable,
    trivial_measurement,
)
from .seqmeas import JointMeasurement, disturbance_witness, induced, is_local_joint, marginals, sequential_joint
from .urel import (
    NotUnbiased,
    akg_report,
    error_disturbance_relation,
    gauge_relation,
    joint_error_relation,
    joint_error_relation_rep,
    no_go_report,
    ozawa_joint_chain,
    ozawa_quantities,
    schrodinger_kr,
    statistical_cost_relation,
)

SCHEMA_VERSION = 1


def load_schema() -> dict:
    return json.loads(resources.files("qloss").joinpath("schema/scenario.schema.json").read_text())


@dataclass
class Scenario:
    """Parsed scenario. Unused components are ``None``."""

    raw: dict
    dim: int
    rho: np.ndarray
    relations: list
    tol: Tolerances
    A: np.ndarray | None = None
    B: np.ndarray | None = None
    M: Measurement | None = None
    instrument: Instrument | None = None
    process: Channel | None = None
    secondary: Measurement | None = None
    N: Measurement | None = None
    J: JointMeasurement | None = None
    f: np.ndarray | None = None
    g: np.ndarray | None = None

    @property
    def theta(self) -> Channel | None:
        """The channel whose disturbance is evaluated: the explicit process, else the instrument's."""
        if self.process is not None:
            return self.process
        if self.instrument is not None:
            return induced(self.instrument, self.tol)[1]
        return None


# -- parsing -----------------------------------------------------------------------------


def _matrix(obj, dim: int, name: str, tol: Tolerances) -> np.ndarray:
    X = decode_matrix(obj)
    if X.shape != (dim, dim):
        raise ValidationError(f"{name} has shape {X.shape}, expected ({dim}, {dim})")
    return X


def _space(values, n: int, name: str) -> SampleSpace:
    if values is None:
        return SampleSpace.range(n)
    if len(values) != n:
        raise ValidationError(f"{name}: {len(values)} values for {n} outcomes")
    return SampleSpace.from_values(values)


def _measurement(spec: dict, dim: int, tol: Tolerances, name: str) -> Measurement:
    kinds = [k for k in ("povm", "projective", "trivial") if k in spec]
    if len(kinds) != 1:
        raise ValidationError(f"{name} must give exactly one of povm, projective, trivial")
    kind = kinds[0]
    values = spec.get("values")
    if kind == "povm":
        effects = [_matrix(E, dim, f"{name} effect {i}", tol) for i, E in enumerate(spec["povm"])]
        return Measurement.from_effects(effects, space=_space(values, len(effects), name), tol=tol)
    if kind == "projective":
        if values is not None:
            raise ValidationError(f"{name}: a projective measurement takes its values from the observable")
        return projective_from_observable(_matrix(spec["projective"], dim, f"{name} observable", tol), tol)
    p0 = spec["trivial"]
    return trivial_measurement(p0, dim, _space(values, len(p0), name), tol)


def _instrument(kraus_per_outcome, values, dim: int, tol: Tolerances, name: str) -> Instrument:
    kraus = [[decode_matrix(K) for K in ks] for ks in kraus_per_outcome]
    for ks in kraus:
        for K in ks:
            if K.shape[1] != dim:
                raise ValidationError(f"{name}: Kraus operator of shape {K.shape} on a {dim}-dimensional input")
    return Instrument.from_kraus(kraus, space=_space(values, len(kraus), name), tol=tol)


def _process(spec: dict, dim: int, tol: Tolerances) -> Channel:
    kinds = [k for k in ("kraus", "superop", "dephase", "luders_instrument") if k in spec]
    if len(kinds) != 1:
        raise ValidationError("process must give exactly one of kraus, superop, dephase, luders_instrument")
    kind = kinds[0]
    if kind == "kraus":
        kraus = [decode_matrix(K) for K in spec["kraus"]]
        if any(K.shape[1] != dim for K in kraus):
            raise ValidationError("process Kraus operators do not act on the scenario dimension")
        return Channel.from_kraus(kraus, tol)
    if kind == "superop":
        S = decode_matrix(spec["superop"])
        if np.abs(S.imag).max(initial=0.0) > tol.validity:
            raise ValidationError("superoperator must be real in the Hermitian basis")
        out_dim = int(spec.get("out_dim", dim))
        return Channel.from_superop(S.real, dim, out_dim, mode=spec.get("mode", "auto"), tol=tol)
    if kind == "dephase":
        return dephasing(_matrix(spec["dephase"], dim, "dephasing observable", tol), tol)
    return induced(luders_instrument(_matrix(spec["luders_instrument"], dim, "process observable", tol), tol), tol)[1]


_NEEDS = {
    "error": ("A", "M"),
    "error_rep": ("A", "M"),
    "disturbance": ("B", "theta"),
    "disturbance_rep": ("B", "theta"),
    "lossless": ("A", "M"),
    "gauge_decomposition": ("A", "M", "f"),
    "variance": ("A", "M", "f"),
    "composite": ("A", "theta", "secondary"),
    "joint_error": ("A", "B", "J"),
    "joint_error_rep": ("A", "B", "J"),
    "gauge": ("A", "B", "J", "f", "g"),
    "statistical_cost": ("A", "B", "J", "f", "g"),
    "error_disturbance": ("A", "B", "instrument"),
    "error_disturbance_simple": ("A", "B", "instrument"),
    "error_disturbance_rep": ("A", "B", "instrument"),
    "error_disturbance_rep_simple": ("A", "B", "instrument"),
    "schrodinger": ("A", "B"),
    "kennard_robertson": ("A", "B"),
    "ozawa": ("A", "B", "M", "theta"),
    "ozawa_joint": ("A", "B", "J"),
    "akg": ("A", "B", "J"),
    "nogo": ("A", "B"),
    "local_joint": ("J",),
    "witness": ("B", "instrument"),
}

RELATION_NAMES = tuple(_NEEDS)


def parse_scenario(obj: dict) -> Scenario:
    """Validate ``obj`` against the schema and build every referenced component."""
    try:
        jsonschema.validate(obj, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"scenario does not match the schema at {where}: {exc.message}") from None

    tol = DEFAULT_TOL.replace(**obj.get("tol", {}))
    dim = int(obj["dim"])
    rho = as_density(_matrix(obj["state"], dim, "state", tol), tol)
    sc = Scenario(raw=copy.deepcopy(obj), dim=dim, rho=rho, relations=list(obj["relations"]), tol=tol)

    obs = obj.get("observables", {})
    if "A" in obs:
        sc.A = as_hermitian(_matrix(obs["A"], dim, "observable A", tol), tol, "observable A")
    if "B" in obs:
        sc.B = as_hermitian(_matrix(obs["B"], dim, "observable B", tol), tol, "observable B")

    primary = obj.get("primary")
    if primary is not None:
        inst_kinds = [k for k in ("luders_instrument", "instrument") if k in primary]
        if inst_kinds:
            if len(primary) - ("values" in primary) != 1:
                raise ValidationError("primary must give exactly one measurement or instrument")
            if "luders_instrument" in primary:
                sc.instrument = luders_instrument(_matrix(primary["luders_instrument"], dim, "primary observable", tol), tol)
            else:
                sc.instrument = _instrument(primary["instrument"], primary.get("values"), dim, tol, "primary instrument")
            sc.M = induced(sc.instrument, tol)[0]
        else:
            sc.M = _measurement(primary, dim, tol, "primary")

    if "process" in obj:
        sc.process = _process(obj["process"], dim, tol)
    if "secondary" in obj:
        out_dim = sc.theta.out_dim if sc.theta is not None else dim
        sc.secondary = _measurement(obj["secondary"], out_dim, tol, "secondary")

    if "sequential" in obj:
        if sc.instrument is not None or "joint" in obj:
            raise ValidationError("sequential cannot be combined with a primary instrument or an explicit joint")
        seq = obj["sequential"]
        sc.instrument = _instrument(seq["instrument"], seq.get("values"), dim, tol, "sequential instrument")
        sc.M = induced(sc.instrument, tol)[0]
        sc.secondary = _measurement(seq["secondary"], sc.instrument.out_dim, tol, "sequential secondary")

    if "joint" in obj:
        grid_obj = obj["joint"]["joint_povm"]
        n1, n2 = len(grid_obj), len(grid_obj[0])
        grid = [[_matrix(E, dim, f"joint effect ({i}, {j})", tol) for j, E in enumerate(row)]
                for i, row in enumerate(grid_obj)]
        s1 = _space(obj["joint"].get("values1"), n1, "joint values1")
        s2 = _space(obj["joint"].get("values2"), n2, "joint values2")
        sc.J = JointMeasurement.from_grid(grid, s1, s2, tol)
        sc.M, sc.N = marginals(sc.J, tol)
        if primary is not None:
            raise ValidationError("with an explicit joint measurement the primary is its first marginal; omit primary")
    elif sc.instrument is not None and sc.secondary is not None:
        theta = induced(sc.instrument, tol)[1]
        sc.J = sequential_joint(sc.instrument, sc.secondary, tol)
        sc.N = compose(sc.secondary, theta, tol)

    reps = obj.get("representatives", {})
    if "f" in reps:
        sc.f = np.asarray(reps["f"], dtype=float)
        if sc.M is not None and len(sc.f) != len(sc.M.space):
            raise ValidationError(f"f has {len(sc.f)} entries for {len(sc.M.space)} outcomes")
    if "g" in reps:
        sc.g = np.asarray(reps["g"], dtype=float)
        if sc.N is not None and len(sc.g) != len(sc.N.space):
            raise ValidationError(f"g has {len(sc.g)} entries for {len(sc.N.space)} outcomes")

    for name in sc.relations:
        missing = [c for c in _NEEDS[name] if getattr(sc, c) is None]
        if missing:
            raise ValidationError(f"relation {name!r} needs {', '.join(missing)}")
    return sc


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return parse_scenario(obj)


# -- evaluation ---------------------------------------------------------------------------


@dataclass
class Report:
    scenario: dict
    tol: float
    relations: list = field(default_factory=list)
    chains: list = field(default_factory=list)
    losses: dict = field(default_factory=dict)
    lossless: dict = field(default_factory=dict)
    identities: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def identity(self, name: str, residual: float) -> None:
        self.identities[name] = float(residual)

    @property
    def ok(self) -> bool:
        if not all(r["holds"] for r in self.relations):
            return False
        if not all(c["holds"] for c in self.chains):
            return False
        if not all(self.checks.values()):
            return False
        return all(abs(v) <= self.tol for v in self.identities.values())

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "tol": self.tol,
            "relations": self.relations,
            "chains": self.chains,
            "losses": self.losses,
            "lossless": self.lossless,
            "identities": self.identities,
            "checks": self.checks,
            "notes": self.notes,
            "ok": self.ok,
        }


def _eval(sc: Scenario, name: str, rep: Report) -> None:
    tol, rho = sc.tol, sc.rho
    A, B = sc.A, sc.B
    if name in ("error", "error_rep"):
        loss = error if name == "error" else error_rep
        rep.losses[f"{name}_A"] = loss(A, sc.M, rho, tol).value
        if B is not None and sc.N is not None:
            rep.losses[f"{name}_B"] = loss(B, sc.N, rho, tol).value
    elif name in ("disturbance", "disturbance_rep"):
        loss = disturbance if name == "disturbance" else disturbance_rep
        rep.losses[f"{name}_B"] = loss(B, sc.theta, rho, tol).value
    elif name == "lossless":
        lr = lossless_report(A, sc.M, rho, tol)
        rep.lossless["A"] = {"conditions": lr.conditions, "consistent": lr.consistent, "lossless": lr.lossless,
                             "witness_residual": lr.witness_residual}
        rep.checks["lossless_conditions_agree"] = lr.consistent
    elif name == "gauge_decomposition":
        gd = gauge_decomposition(A, sc.f, sc.M, rho, tol)
        rep.losses["gauge_A"] = math.sqrt(max(gd.gauge_sq, 0.0))
        rep.identity("gauge_decomposition", gd.residual)
    elif name == "variance":
        try:
            vd = variance_decomposition(sc.f, A, sc.M, rho, tol)
        except NotRepresentative as exc:
            rep.notes.append(f"variance: {exc}")
            return
        rep.identity("variance_decomposition", vd.residual)
    elif name == "composite":
        cd = composite_decomposition(A, sc.theta, sc.secondary, rho, tol)
        rep.identity("composite_decomposition", cd.residual)
        rep.checks["composite_error_dominates_disturbance"] = cd.error_sq >= cd.disturbance_sq - tol.holds
        if cd.rep is None:
            rep.notes.append("composite: A is not representable by the composite measurement")
        else:
            rep.identity("composite_decomposition_rep", cd.rep["decomposition_2_residual"])
            if cd.rep["decomposition_1_residual"] is not None:
                rep.identity("composite_decomposition_rep_upper", cd.rep["decomposition_1_residual"])
            rep.checks["composite_conditions_agree"] = cd.consistent
    elif name in ("joint_error", "joint_error_rep", "gauge", "statistical_cost"):
        M, N, J = sc.M, sc.N, sc.J
        if name == "joint_error":
            r = joint_error_relation(A, B, M, N, J, rho, tol)
        elif name == "joint_error_rep":
            r = joint_error_relation_rep(A, B, M, N, J, rho, tol)
        elif name == "gauge":
            r = gauge_relation(A, sc.f, B, sc.g, M, N, J, rho, tol)
        else:
            r = statistical_cost_relation(sc.f, sc.g, A, B, M, N, J, rho, tol)
        rep.relations.append(r.to_json())
    elif name.startswith("error_disturbance"):
        variant = {
            "error_disturbance": "full",
            "error_disturbance_simple": "simple",
            "error_disturbance_rep": "representability",
            "error_disturbance_rep_simple": "representability_simple",
        }[name]
        rep.relations.append(error_disturbance_relation(A, B, sc.instrument, rho, variant, tol).to_json())
    elif name in ("schrodinger", "kennard_robertson"):
        sch, kr = schrodinger_kr(A, B, rho, tol)
        r = sch if name == "schrodinger" else kr
        out = r.to_json()
        out["equality"] = abs(r.slack) <= tol.holds
        rep.relations.append(out)
    elif name == "ozawa":
        instr = sc.instrument if sc.process is None else None
        rep.chains.append(ozawa_quantities(A, B, sc.M, sc.theta, rho, instrument=instr, tol=tol).to_json())
    elif name == "ozawa_joint":
        rep.chains.append(ozawa_joint_chain(A, B, sc.J, rho, tol).to_json())
    elif name == "akg":
        rep.chains.extend(_akg(sc))
    elif name == "nogo":
        if sc.J is not None:
            ng = no_go_report(A, B, rho, "joint", M=sc.M, N=sc.N, J=sc.J, tol=tol)
        elif sc.instrument is not None:
            ng = no_go_report(A, B, rho, "sequential", instrument=sc.instrument, tol=tol)
        else:
            raise ValidationError("relation 'nogo' needs a joint measurement or an instrument")
        rep.checks["nogo"] = ng.holds
        rep.notes.append({"nogo": ng.to_json()})
    elif name == "local_joint":
        lj = is_local_joint(sc.M, sc.N, sc.J, rho, tol)
        rep.notes.append({"local_joint": {"verdict": lj.verdict, "marginal_residual": lj.marginal_residual,
                                          "pullback_residuals": list(lj.pullback_residuals),
                                          "pushforward_residuals": list(lj.pushforward_residuals)}})
    elif name == "witness":
        _, theta = induced(sc.instrument, tol)
        eta = disturbance(B, theta, rho, tol).value
        wit = disturbance_witness(B, sc.instrument, rho, "contraction", tol)
        rep.losses["witness_error_B"] = wit.achieved
        rep.identity("witness_attainment", wit.achieved - eta)
    else:  # pragma: no cover - names are checked against the schema
        raise ValidationError(f"unknown relation {name!r}")


def _akg(sc: Scenario) -> list:
    ak = akg_report(sc.A, sc.B, sc.M, sc.N, sc.J, sc.rho, sc.f, sc.g, sc.tol)
    return [ak.error_chain.to_json(), ak.stdv_chain.to_json()]


def run_scenario(sc: Scenario) -> Report:
    rep = Report(scenario=sc.raw, tol=sc.tol.holds)
    for name in sc.relations:
        try:
            _eval(sc, name, rep)
        except NotRepresentable as exc:
            rep.notes.append(f"{name}: not representable ({exc})")
        except NotUnbiased as exc:
            rep.notes.append(f"{name}: {exc}")
        except NegativeRadicand as exc:
            # only reachable with unchecked, non-positive processes
            rep.checks[f"{name}_radicand"] = False
            rep.notes.append(f"{name}: {exc}")
    return rep


# -- serialization ------------------------------------------------------------------------


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, infinities as strings."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


CSV_COLUMNS = ("relation", "lhs", "bound", "slack", "R", "I", "R_tilde", "I0", "R0", "holds")


def relations_csv(report: dict) -> str:
    """Relation table of a report; each chain link appears as a row ``chain:upper>lower``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.get("relations", []):
        t = r["terms"]
        w.writerow([r["relation"], r["lhs"], r["bound"], r["slack"],
                    *(t.get(k) if t.get(k) is not None else "" for k in ("R", "I", "R_tilde", "I0", "R0")),
                    r["holds"]])
    for c in report.get("chains", []):
        values = c["values"]
        for link in c["links"]:
            slack = link["slack"]
            w.writerow([f"{c['chain']}:{link['upper']}>{link['lower']}", values[link["upper"]],
                        values[link["lower"]], "" if slack is None else slack, "", "", "", "", "",
                        slack is None or slack >= -report["tol"]])
    return buf.getvalue()
