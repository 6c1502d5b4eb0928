"""Built-in scenarios mirroring the archetypal measurement setups."""

from __future__ import annotations

import math

import numpy as np

from .core import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, encode_matrix, pure, stdv
from .loss import error
from .process import trivial_measurement
from .rand import random_distribution, random_observable, random_state, spawn
from .scenario import Report, parse_scenario, run_scenario

RHO_SY = (I2 + SIGMA_Y) / 2  # +1 eigenstate of sigma_y


def _enc(X) -> list:
    return encode_matrix(np.asarray(X, dtype=complex))


def _kr(relations) -> dict:
    return {
        "name": "sigma_z and sigma_x over the sigma_y eigenstate",
        "dim": 2,
        "state": _enc(RHO_SY),
        "observables": {"A": _enc(SIGMA_Z), "B": _enc(SIGMA_X)},
        "relations": relations,
    }


def _schrodinger() -> dict:
    # Bloch vector (1, 1, 1)/sqrt(3): nonzero covariance makes the Schrodinger bound strictly tighter
    rho = (I2 + (SIGMA_X + SIGMA_Y + SIGMA_Z) / math.sqrt(3)) / 2
    return {
        "name": "Schrodinger versus Kennard-Robertson with correlated statistics",
        "dim": 2,
        "state": _enc(rho),
        "observables": {"A": _enc(SIGMA_Z), "B": _enc(SIGMA_X)},
        "relations": ["schrodinger", "kennard_robertson"],
    }


def _projective_errorless() -> dict:
    A = np.diag([1.0, -0.5, 2.0])
    A = A + 0.3 * np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]])
    rho = 0.7 * pure([1, 1j, 0]) + 0.3 * pure([0, 1, 1])  # rank two on a qutrit
    return {
        "name": "projective measurement of A is errorless for A",
        "dim": 3,
        "state": _enc(rho),
        "observables": {"A": _enc(A)},
        "primary": {"projective": _enc(A)},
        "relations": ["error", "error_rep", "lossless"],
    }


def _ozawa_violation() -> dict:
    return {
        "name": "errorless sigma_z measurement with Luders back-action on sigma_x",
        "dim": 2,
        "state": _enc(RHO_SY),
        "observables": {"A": _enc(SIGMA_Z), "B": _enc(SIGMA_X)},
        "primary": {"luders_instrument": _enc(SIGMA_Z)},
        "relations": ["error", "disturbance", "error_disturbance", "error_disturbance_simple",
                      "kennard_robertson", "ozawa"],
    }


def _akg_saturation() -> dict:
    a = b = 1 / math.sqrt(2)
    signs = (1.0, -1.0)
    grid = [[_enc((I2 + i * a * SIGMA_Z + j * b * SIGMA_X) / 4) for j in signs] for i in signs]
    r = math.sqrt(2)
    return {
        "name": "noisy joint qubit measurement at a = b = 1/sqrt(2)",
        "dim": 2,
        "state": _enc(RHO_SY),
        "observables": {"A": _enc(SIGMA_Z), "B": _enc(SIGMA_X)},
        "joint": {"joint_povm": grid, "values1": list(signs), "values2": list(signs)},
        "representatives": {"f": [r, -r], "g": [r, -r]},
        "relations": ["joint_error", "joint_error_rep", "statistical_cost", "akg", "local_joint"],
    }


def _sequential_luders() -> dict:
    return {
        "name": "Luders sigma_z instrument followed by a sigma_x measurement",
        "dim": 2,
        "state": _enc(pure([math.cos(0.3), math.sin(0.3) * np.exp(0.7j)])),
        "observables": {"A": _enc(SIGMA_X), "B": _enc(SIGMA_X)},
        "primary": {"luders_instrument": _enc(SIGMA_Z)},
        "secondary": {"projective": _enc(SIGMA_X)},
        "relations": ["composite", "disturbance", "witness", "error_disturbance", "error_disturbance_simple",
                      "joint_error", "local_joint"],
    }


def _nogo() -> dict:
    # errorless sigma_z together with a trivial second marginal: the sigma_x error cannot vanish
    p = (0.5, 0.5)
    grid = [[_enc(P * q) for q in p] for P in ((I2 + SIGMA_Z) / 2, (I2 - SIGMA_Z) / 2)]
    return {
        "name": "no lossless joint measurement of sigma_z and sigma_x",
        "dim": 2,
        "state": _enc(RHO_SY),
        "observables": {"A": _enc(SIGMA_Z), "B": _enc(SIGMA_X)},
        "joint": {"joint_povm": grid, "values1": [1.0, -1.0], "values2": [1.0, -1.0]},
        "relations": ["error", "joint_error", "nogo"],
    }


SCENARIOS = {
    "kr": lambda: _kr(["schrodinger", "kennard_robertson"]),
    "schrodinger": _schrodinger,
    "projective-errorless": _projective_errorless,
    "ozawa-violation": _ozawa_violation,
    "akg-saturation": _akg_saturation,
    "sequential-luders": _sequential_luders,
    "nogo": _nogo,
}


def trivial_measurement_report(count: int = 50, dims=(2, 3), seed: int = 7) -> Report:
    """Error against a trivial measurement equals the standard deviation, on random draws."""
    rep = Report(scenario={"name": "trivial-measurement", "count": count, "dims": list(dims), "seed": seed},
                 tol=1e-10)
    worst = 0.0
    rows = []
    for k, rng in enumerate(spawn(seed, count)):
        d = dims[k % len(dims)]
        A, rho = random_observable(d, rng), random_state(d, rng)
        M = trivial_measurement(random_distribution(int(rng.integers(1, 4)), rng), d)
        e, s = error(A, M, rho).value, stdv(A, rho)
        worst = max(worst, abs(e - s))
        if k < 5:
            rows.append({"dim": d, "error": e, "stdv": s})
    rep.losses["sample"] = rows
    rep.identity("max_abs_error_minus_stdv", worst)
    return rep


DEMOS = tuple(sorted([*SCENARIOS, "trivial-measurement"]))


def demo(name: str) -> Report:
    if name == "trivial-measurement":
        return trivial_measurement_report()
    if name not in SCENARIOS:
        raise KeyError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")
    return run_scenario(parse_scenario(SCENARIOS[name]()))
