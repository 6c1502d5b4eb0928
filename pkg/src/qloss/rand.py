"""Random states, observables and processes, valid by construction.

All generators take a ``numpy.random.Generator``; reproducibility is the
caller's job (see :func:`spawn`).
"""

from __future__ import annotations

import numpy as np

from .core import SampleSpace
from .process import Channel, ClassicalProcess, Instrument, Measurement


def spawn(seed: int, n: int) -> list[np.random.Generator]:
    """``n`` independent generators derived from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def ginibre(rng, rows: int, cols: int) -> np.ndarray:
    return (rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))) / np.sqrt(2)


def random_state(d: int, rng, rank: int | None = None) -> np.ndarray:
    """Ginibre-induced density matrix; ``rank < d`` gives a singular state."""
    G = ginibre(rng, d, rank or d)
    rho = G @ G.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_observable(d: int, rng, scale: float = 1.0) -> np.ndarray:
    G = ginibre(rng, d, d)
    return scale * (G + G.conj().T) / 2


def random_distribution(n: int, rng) -> np.ndarray:
    return rng.dirichlet(np.ones(n))


def random_isometry(rng, rows: int, cols: int) -> np.ndarray:
    Q, R = np.linalg.qr(ginibre(rng, rows, cols))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def _kraus_blocks(rng, d_in: int, d_out: int, n_outcomes: int, kraus_per: int):
    # the dilation must be an isometry, so it needs at least d_in rows
    kraus_per = max(kraus_per, -(-d_in // (n_outcomes * d_out)))
    V = random_isometry(rng, n_outcomes * kraus_per * d_out, d_in)
    blocks = V.reshape(n_outcomes, kraus_per, d_out, d_in)
    return [list(b) for b in blocks]


def random_povm(d: int, n: int, rng, kraus_per: int = 2, values=None) -> Measurement:
    """Effects ``V^dag (P_w (x) Id) V`` for a random isometry ``V``."""
    effects = [sum(K.conj().T @ K for K in ks) for ks in _kraus_blocks(rng, d, d, n, kraus_per)]
    space = SampleSpace.from_values(values) if values is not None else SampleSpace.range(n)
    return Measurement.from_effects(effects, space=space)


def random_real_povm(d: int, n: int, rng, kraus_per: int = 2) -> Measurement:
    """Random POVM whose outcomes carry distinct random real values."""
    values = np.sort(rng.normal(size=n) * 2)[::-1]
    return random_povm(d, n, rng, kraus_per, values=values)


def random_instrument(d: int, n: int, rng, kraus_per: int = 2, d_out: int | None = None,
                      values=None) -> Instrument:
    blocks = _kraus_blocks(rng, d, d_out or d, n, kraus_per)
    space = SampleSpace.from_values(values) if values is not None else SampleSpace.range(n)
    return Instrument.from_kraus(blocks, space=space)


def random_channel(d: int, rng, kraus_count: int = 3, d_out: int | None = None) -> Channel:
    return Channel.from_kraus(_kraus_blocks(rng, d, d_out or d, 1, kraus_count)[0])


def random_stochastic(in_space: SampleSpace, out_space: SampleSpace, rng) -> ClassicalProcess:
    K = rng.dirichlet(np.ones(len(out_space)), size=len(in_space)).T
    return ClassicalProcess(in_space, out_space, K).validate()


def random_function(n: int, rng, scale: float = 1.0) -> np.ndarray:
    return scale * rng.normal(size=n)


def representable_observable(M: Measurement, rng, scale: float = 1.0):
    """``(A, f)`` with ``A = M'(f)`` for a random ``f``, so ``A`` is representable over every state."""
    f = random_function(len(M.space), rng, scale)
    return M.adjoint_apply(f), f
