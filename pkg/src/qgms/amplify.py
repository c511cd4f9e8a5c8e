"""Amplitude amplification: the operator loop and its closed-form curve.

The iterate is the standard one: reflect phases of marked basis states,
then reflect about the prepared state A|0>. With a uniform preparation
over N states and r marked, the success probability after t rounds is
sin^2((2t+1) theta) with sin^2 theta = r/N, which the tests hold the
simulated loop against.
"""

from __future__ import annotations

import math

import numpy as np

from .circuit import Circuit
from .sim import StateVector, run


def grover_probability(n_states: int, marked: int, t: int) -> float:
    """Closed-form success probability sin^2((2t+1) theta)."""
    if not 0 < marked <= n_states:
        raise ValueError("marked count out of range")
    theta = math.asin(math.sqrt(marked / n_states))
    return math.sin((2 * t + 1) * theta) ** 2


def _as_mask(marked, size: int) -> np.ndarray:
    if isinstance(marked, np.ndarray):
        if marked.dtype != bool or marked.shape != (size,):
            raise ValueError("mask must be a boolean array over all basis states")
        return marked
    if callable(marked):
        return np.fromiter((bool(marked(i)) for i in range(size)), bool, size)
    return np.isin(np.arange(size), list(marked))


def amplitude_amplify(
    prep: Circuit,
    marked,
    iterations: int,
    initial: StateVector | None = None,
) -> StateVector:
    """Apply the amplification iterate ``iterations`` times.

    ``marked`` may be a predicate on basis indices, a collection of
    indices, or a boolean mask. The reflection axis is always the
    prepared state prep|0>; ``initial`` optionally starts the iteration
    from a different state than the one being reflected about, which is
    how amplification from an arbitrary starting state is modelled.
    """
    anchor = run(prep)
    state = anchor if initial is None else initial
    mask = _as_mask(marked, len(anchor.amps))
    amps = state.amps.copy()
    ref = anchor.amps
    for _ in range(iterations):
        amps[mask] *= -1.0
        amps = 2.0 * np.vdot(ref, amps) * ref - amps
    return StateVector(anchor.qubit_count, amps)


def success_curve(
    prep: Circuit, marked, t_max: int, initial: StateVector | None = None
) -> list[float]:
    """Marked-subspace probability after t = 0..t_max iterations."""
    anchor = run(prep)
    state = anchor if initial is None else initial
    mask = _as_mask(marked, len(anchor.amps))
    amps = state.amps.copy()
    ref = anchor.amps
    out = [float(np.sum(np.abs(amps[mask]) ** 2))]
    for _ in range(t_max):
        amps[mask] *= -1.0
        amps = 2.0 * np.vdot(ref, amps) * ref - amps
        out.append(float(np.sum(np.abs(amps[mask]) ** 2)))
    return out


def uniform_prep(qubits: int) -> Circuit:
    """H on every qubit: the uniform superposition preparation."""
    circ = Circuit(qubits)
    for q in range(qubits):
        circ.h(q)
    return circ
