"""Circuit simulators: dense statevector, sparse statevector, basis tracker.

Basis-state encoding is LSB-first throughout: bit k of an integer index is
the value of qubit k. A matrix register laid out as qubit i*cols + j for
entry (i, j) therefore packs to the same integer as its BitMatrix rows
concatenated, which the tests lean on heavily.

Three engines share the encoding:

* ``run`` evolves a dense numpy amplitude vector and handles every gate
  kind. Memory is 2^q complex doubles, so a configurable qubit cap guards
  against accidental blowups.
* ``run_sparse`` keeps a dict of nonzero amplitudes. Circuits whose
  support stays polynomial (few Hadamards, mostly permutation gates) run
  far beyond the dense cap.
* ``run_basis`` pushes a single computational basis state through a
  permutation-only circuit as one integer. This is what makes exhaustive
  truth-table tests of the big reversible constructions cheap.
"""

from __future__ import annotations

import cmath
import math
import os
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, Gate

DEFAULT_QUBIT_CAP = 24

_SQRT_HALF = 1.0 / math.sqrt(2.0)
_T_PHASE = cmath.exp(1j * math.pi / 4)


class QubitCapExceeded(Exception):
    """Dense simulation would allocate more qubits than the configured cap."""


class UnresolvedOracle(Exception):
    """An ORACLE gate names a function the circuit does not carry."""


def qubit_cap() -> int:
    """Dense-simulation qubit limit; override with QGMS_QUBIT_CAP."""
    raw = os.environ.get("QGMS_QUBIT_CAP")
    if raw is None:
        return DEFAULT_QUBIT_CAP
    cap = int(raw)
    if cap < 1:
        raise ValueError("qubit cap must be positive")
    return cap


def _oracle_fn(oracles: dict[str, object], gate: Gate):
    fn = oracles.get(gate.name or "")
    if fn is None or not callable(fn):
        raise UnresolvedOracle(f"no callable bound for oracle {gate.name!r}")
    return fn


def _oracle_table(fn, n_in: int) -> list[int]:
    return [int(fn(x)) for x in range(1 << n_in)]


# ---------------------------------------------------------------------------
# Dense engine


@dataclass
class StateVector:
    """Dense state over ``qubit_count`` qubits; ``amps[i]`` is basis i."""

    qubit_count: int
    amps: np.ndarray

    @classmethod
    def basis(cls, qubit_count: int, bits: int = 0) -> StateVector:
        amps = np.zeros(1 << qubit_count, dtype=np.complex128)
        amps[bits] = 1.0
        return cls(qubit_count, amps)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def probability(self, bits: int) -> float:
        return float(abs(self.amps[bits]) ** 2)

    def marginal(self, qubits: list[int]) -> np.ndarray:
        """Probabilities of the listed qubits, traced over the rest.

        Index b of the result packs qubits[j] into bit j.
        """
        probs = self.probabilities()
        idx = np.arange(1 << self.qubit_count)
        key = np.zeros_like(idx)
        for j, q in enumerate(qubits):
            key |= ((idx >> q) & 1) << j
        out = np.zeros(1 << len(qubits))
        np.add.at(out, key, probs)
        return out

    def reduced_purity(self, qubits: list[int]) -> float:
        """Tr(rho^2) of the reduced state on ``qubits``."""
        keep = list(qubits)
        rest = [q for q in range(self.qubit_count) if q not in keep]
        # Rearrange amplitudes into a (kept, rest) matrix.
        idx = np.arange(1 << self.qubit_count)
        row = np.zeros_like(idx)
        col = np.zeros_like(idx)
        for j, q in enumerate(keep):
            row |= ((idx >> q) & 1) << j
        for j, q in enumerate(rest):
            col |= ((idx >> q) & 1) << j
        m = np.zeros((1 << len(keep), 1 << len(rest)), dtype=np.complex128)
        m[row, col] = self.amps
        rho = m @ m.conj().T
        return float(np.real(np.trace(rho @ rho)))


def run(
    circ: Circuit,
    initial: int = 0,
    cap: int | None = None,
    state: StateVector | None = None,
) -> StateVector:
    """Dense simulation of the full circuit.

    Starts from basis state ``initial`` unless ``state`` supplies a full
    input StateVector (which must match the circuit width). The input
    state is not modified.

    Raises:
        QubitCapExceeded: if the circuit is wider than the cap allows.
    """
    limit = qubit_cap() if cap is None else cap
    q = circ.qubit_count
    if q > limit:
        raise QubitCapExceeded(f"{q} qubits exceeds cap {limit}")
    if state is not None:
        if state.qubit_count != q:
            raise ValueError("state width does not match circuit")
        amps = state.amps.copy()
    else:
        amps = np.zeros(1 << q, dtype=np.complex128)
        amps[initial] = 1.0
    base = np.arange(1 << q, dtype=np.int64)
    tables: dict[str, list[int]] = {}
    for gate in circ.gates:
        amps = _dense_apply(amps, base, circ, gate, tables)
    return StateVector(q, amps)


def _control_mask(gate: Gate) -> int:
    mask = 0
    for c in gate.controls:
        mask |= 1 << c
    return mask


def _dense_apply(
    amps: np.ndarray,
    base: np.ndarray,
    circ: Circuit,
    gate: Gate,
    tables: dict[str, list[int]],
) -> np.ndarray:
    kind = gate.kind
    if kind in ("X", "CNOT", "TOFFOLI", "MCX"):
        t_bit = 1 << gate.targets[0]
        cmask = _control_mask(gate)
        sel = base[
            ((base & cmask) == cmask) & ((base & t_bit) == 0)
        ]
        flip = sel ^ t_bit
        amps[sel], amps[flip] = amps[flip], amps[sel]
        return amps
    if kind == "H":
        t_bit = 1 << gate.targets[0]
        lo = base[(base & t_bit) == 0]
        hi = lo ^ t_bit
        a0 = amps[lo]
        a1 = amps[hi]
        amps[lo] = (a0 + a1) * _SQRT_HALF
        amps[hi] = (a0 - a1) * _SQRT_HALF
        return amps
    if kind in ("S", "T", "TDG"):
        t_bit = 1 << gate.targets[0]
        phase = {"S": 1j, "T": _T_PHASE, "TDG": _T_PHASE.conjugate()}[kind]
        amps[(base & t_bit) != 0] *= phase
        return amps
    if kind == "ORACLE":
        name = gate.name or ""
        if name not in tables:
            tables[name] = _oracle_table(
                _oracle_fn(circ.oracles, gate), len(gate.controls)
            )
        table = np.asarray(tables[name], dtype=np.int64)
        in_val = np.zeros_like(base)
        for j, c in enumerate(gate.controls):
            in_val |= ((base >> c) & 1) << j
        delta = table[in_val]
        xor = np.zeros_like(base)
        for j, t in enumerate(gate.targets):
            xor |= ((delta >> j) & 1) << t
        return amps[base ^ xor]
    raise ValueError(f"unhandled gate kind {kind}")


def full_distribution(state: StateVector, qubits: list[int]) -> np.ndarray:
    """Born-rule measurement table for the listed qubits.

    Entry b is the probability of reading outcome b (qubits[j] packed into
    bit j); sums to 1 for a normalized state.
    """
    return state.marginal(qubits)


def measure(
    state: StateVector, qubits: list[int], rng
) -> tuple[int, StateVector]:
    """Sample a measurement of ``qubits`` and collapse.

    Returns the packed outcome and the renormalized post-measurement
    state. ``rng`` is a numpy Generator (or anything default_rng accepts).
    """
    gen = np.random.default_rng(rng)
    probs = state.marginal(qubits)
    outcome = int(gen.choice(len(probs), p=probs / probs.sum()))
    idx = np.arange(1 << state.qubit_count)
    key = np.zeros_like(idx)
    for j, q in enumerate(qubits):
        key |= ((idx >> q) & 1) << j
    amps = np.where(key == outcome, state.amps, 0.0)
    norm = np.sqrt(np.sum(np.abs(amps) ** 2))
    return outcome, StateVector(state.qubit_count, amps / norm)


def dump_state(
    state: StateVector,
    registers: dict[str, tuple[int, ...]] | None = None,
    threshold: float = 1e-12,
) -> dict:
    """JSON-ready snapshot: significant amplitudes plus the register map."""
    entries = [
        [int(i), float(a.real), float(a.imag)]
        for i, a in enumerate(state.amps)
        if abs(a) > threshold
    ]
    return {
        "qubit_count": state.qubit_count,
        "amplitudes": entries,
        "registers": {k: list(v) for k, v in (registers or {}).items()},
    }


# ---------------------------------------------------------------------------
# Sparse engine


def run_sparse(
    circ: Circuit,
    initial: int = 0,
    prune: float = 1e-13,
) -> dict[int, complex]:
    """Sparse simulation as a dict of nonzero amplitudes.

    Amplitudes below ``prune`` in magnitude are dropped after each
    Hadamard, where cancellation happens. Permutation and phase gates only
    relabel or rotate existing entries, so support never grows through
    them and never exceeds twice its pre-Hadamard size overall.
    """
    return sparse_apply({initial: 1.0 + 0.0j}, circ.gates, circ.oracles, prune)


def sparse_apply(
    state: dict[int, complex],
    gates: list[Gate],
    oracles: dict[str, object],
    prune: float = 1e-13,
) -> dict[int, complex]:
    """Apply a gate list to a sparse state; returns a new dict."""
    tables: dict[str, list[int]] = {}
    for gate in gates:
        kind = gate.kind
        if kind in ("X", "CNOT", "TOFFOLI", "MCX"):
            t_bit = 1 << gate.targets[0]
            cmask = _control_mask(gate)
            state = {
                (k ^ t_bit if (k & cmask) == cmask else k): a
                for k, a in state.items()
            }
        elif kind == "H":
            t_bit = 1 << gate.targets[0]
            nxt: dict[int, complex] = {}
            for k, a in state.items():
                h = a * _SQRT_HALF
                k0 = k & ~t_bit
                k1 = k0 | t_bit
                nxt[k0] = nxt.get(k0, 0.0) + h
                nxt[k1] = nxt.get(k1, 0.0) + (h if k == k0 else -h)
            state = {k: a for k, a in nxt.items() if abs(a) > prune}
        elif kind in ("S", "T", "TDG"):
            t_bit = 1 << gate.targets[0]
            phase = {"S": 1j, "T": _T_PHASE, "TDG": _T_PHASE.conjugate()}[kind]
            state = {
                k: (a * phase if k & t_bit else a) for k, a in state.items()
            }
        elif kind == "ORACLE":
            name = gate.name or ""
            if name not in tables:
                tables[name] = _oracle_table(
                    _oracle_fn(oracles, gate), len(gate.controls)
                )
            table = tables[name]
            nxt = {}
            for k, a in state.items():
                in_val = 0
                for j, c in enumerate(gate.controls):
                    in_val |= ((k >> c) & 1) << j
                delta = table[in_val]
                xor = 0
                for j, t in enumerate(gate.targets):
                    xor |= ((delta >> j) & 1) << t
                nxt[k ^ xor] = a
            state = nxt
        else:
            raise ValueError(f"unhandled gate kind {kind}")
    return state


def sparse_marginal(state: dict[int, complex], qubits: list[int]) -> dict[int, float]:
    """Measurement distribution of ``qubits`` from a sparse state."""
    out: dict[int, float] = {}
    for k, a in state.items():
        key = 0
        for j, q in enumerate(qubits):
            key |= ((k >> q) & 1) << j
        out[key] = out.get(key, 0.0) + abs(a) ** 2
    return out


def sparse_to_dense(state: dict[int, complex], qubit_count: int) -> StateVector:
    amps = np.zeros(1 << qubit_count, dtype=np.complex128)
    for k, a in state.items():
        amps[k] = a
    return StateVector(qubit_count, amps)


# ---------------------------------------------------------------------------
# Basis tracker


def run_basis(circ: Circuit, bits: int) -> int:
    """Track one basis state through a permutation-only circuit.

    Raises:
        ValueError: on H, S, T or TDG, which do not permute basis states.
    """
    tables: dict[str, list[int]] = {}
    for gate in circ.gates:
        kind = gate.kind
        if kind in ("X", "CNOT", "TOFFOLI", "MCX"):
            cmask = _control_mask(gate)
            if (bits & cmask) == cmask:
                bits ^= 1 << gate.targets[0]
        elif kind == "ORACLE":
            name = gate.name or ""
            if name not in tables:
                tables[name] = _oracle_table(
                    _oracle_fn(circ.oracles, gate), len(gate.controls)
                )
            in_val = 0
            for j, c in enumerate(gate.controls):
                in_val |= ((bits >> c) & 1) << j
            delta = tables[name][in_val]
            for j, t in enumerate(gate.targets):
                if (delta >> j) & 1:
                    bits ^= 1 << t
        else:
            raise ValueError(f"{kind} is not a permutation gate")
    return bits


def pack_bits(values: list[int], qubits: list[int]) -> int:
    """Place values[j] on qubit qubits[j] in a basis index."""
    bits = 0
    for v, q in zip(values, qubits):
        if v & 1:
            bits |= 1 << q
    return bits


def extract_bits(bits: int, qubits: list[int]) -> int:
    """Collect the listed qubits of a basis index into a packed integer."""
    out = 0
    for j, q in enumerate(qubits):
        out |= ((bits >> q) & 1) << j
    return out
