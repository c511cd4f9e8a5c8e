"""Reversible circuit IR: gates, registers, resource accounting.

The gate set is deliberately small: X, H, S, T, T-dagger, CNOT, Toffoli,
multi-controlled X, and opaque oracle blocks that XOR a classical function
of one register into another. Everything downstream (simulation, cost
models, text export) works off this one representation.

Costs are reported against a Clifford+T compilation convention: a Toffoli
expands to 7 T gates, 6 CNOTs, 2 Hadamards and an S with T-depth 7, and a
k-controlled X expands to a ladder of 2(k-1) Toffolis plus one CNOT using
k-1 temporarily borrowed ancillas that come back clean. The expansion is
never materialized as gates; the profile applies it arithmetically.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace


class RegisterMismatch(Exception):
    """Raised when a gate references qubits outside or overlapping wrongly."""


# Gate kinds with fixed shapes. ORACLE is the only named kind.
_SELF_INVERSE = {"X", "H", "CNOT", "TOFFOLI", "MCX", "ORACLE"}
_KINDS = _SELF_INVERSE | {"S", "T", "TDG"}

TOFFOLI_T_COUNT = 7
TOFFOLI_T_DEPTH = 7
TOFFOLI_CNOT_COUNT = 6


@dataclass(frozen=True)
class Gate:
    """One gate: kind, target qubits, control qubits, optional oracle name."""

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    name: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = self.targets + self.controls
        if len(set(qubits)) != len(qubits):
            raise RegisterMismatch(f"duplicate qubit in {self}")
        if any(q < 0 for q in qubits):
            raise RegisterMismatch(f"negative qubit in {self}")
        n_t, n_c = len(self.targets), len(self.controls)
        if self.kind in {"X", "H", "S", "T", "TDG"} and (n_t, n_c) != (1, 0):
            raise RegisterMismatch(f"{self.kind} takes one target, no controls")
        if self.kind == "CNOT" and (n_t, n_c) != (1, 1):
            raise RegisterMismatch("CNOT takes one target, one control")
        if self.kind == "TOFFOLI" and (n_t, n_c) != (1, 2):
            raise RegisterMismatch("TOFFOLI takes one target, two controls")
        if self.kind == "MCX" and (n_t != 1 or n_c < 3):
            raise RegisterMismatch("MCX takes one target, three or more controls")
        if self.kind == "ORACLE" and (not self.name or n_t == 0 or n_c == 0):
            raise RegisterMismatch("ORACLE needs a name, inputs and outputs")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls

    def inverse(self) -> Gate:
        if self.kind in _SELF_INVERSE:
            return self
        if self.kind == "T":
            return replace(self, kind="TDG")
        if self.kind == "TDG":
            return replace(self, kind="T")
        raise ValueError(f"{self.kind} has no inverse in the gate set")


@dataclass
class ResourceProfile:
    """Clifford+T cost estimate for one circuit.

    ``cnot`` counts expanded CNOTs (explicit ones plus 6 per expanded
    Toffoli plus the ladder CNOT of each MCX); ``raw_cnot`` keeps the
    pre-expansion count for reconciliation against per-stage tallies.
    ``ancilla`` includes both the circuit's own ancilla qubits and the
    peak transient need of the widest MCX ladder.
    """

    cnot: int
    toffoli: int
    t_depth: int
    ancilla: int
    total_qubits: int
    raw_cnot: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "cnot": self.cnot,
            "toffoli": self.toffoli,
            "t_depth": self.t_depth,
            "ancilla": self.ancilla,
            "total_qubits": self.total_qubits,
            "raw_cnot": self.raw_cnot,
        }


@dataclass
class Circuit:
    """Gate list over ``qubit_count`` qubits with named registers.

    ``registers`` maps a name to the tuple of qubit indices it covers;
    ``ancilla_count`` is how many of the qubits are workspace rather than
    problem data. ``oracles`` maps oracle-block names to their function
    objects (anything with the oracle protocol; see qgms.oracles).
    """

    qubit_count: int
    gates: list[Gate] = field(default_factory=list)
    registers: dict[str, tuple[int, ...]] = field(default_factory=dict)
    ancilla_count: int = 0
    oracles: dict[str, object] = field(default_factory=dict)

    def _check(self, gate: Gate) -> None:
        top = max(gate.qubits)
        if top >= self.qubit_count:
            raise RegisterMismatch(
                f"gate touches qubit {top}, circuit has {self.qubit_count}"
            )

    def append(self, gate: Gate) -> None:
        self._check(gate)
        self.gates.append(gate)

    def extend(self, gates: list[Gate]) -> None:
        for g in gates:
            self.append(g)

    # Convenience constructors for each kind.
    def x(self, q: int) -> None:
        self.append(Gate("X", (q,)))

    def h(self, q: int) -> None:
        self.append(Gate("H", (q,)))

    def s(self, q: int) -> None:
        self.append(Gate("S", (q,)))

    def t(self, q: int) -> None:
        self.append(Gate("T", (q,)))

    def tdg(self, q: int) -> None:
        self.append(Gate("TDG", (q,)))

    def cnot(self, control: int, target: int) -> None:
        self.append(Gate("CNOT", (target,), (control,)))

    def toffoli(self, c1: int, c2: int, target: int) -> None:
        self.append(Gate("TOFFOLI", (target,), (c1, c2)))

    def mcx(self, controls: list[int], target: int) -> None:
        """Multi-controlled X. Two controls lower to a plain Toffoli."""
        if len(controls) == 1:
            self.cnot(controls[0], target)
        elif len(controls) == 2:
            self.toffoli(controls[0], controls[1], target)
        else:
            self.append(Gate("MCX", (target,), tuple(controls)))

    def oracle_block(
        self, name: str, fn: object, ins: list[int], outs: list[int]
    ) -> None:
        """XOR fn(ins) into outs. Involution, so it is its own inverse."""
        existing = self.oracles.get(name)
        if existing is not None and existing is not fn:
            raise RegisterMismatch(f"oracle name {name!r} already bound")
        self.oracles[name] = fn
        self.append(Gate("ORACLE", tuple(outs), tuple(ins), name=name))

    def inverse_gates(self) -> list[Gate]:
        """Gates of the inverse circuit (reversed order, each inverted)."""
        return [g.inverse() for g in reversed(self.gates)]

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g in self.gates:
            out[g.kind] = out.get(g.kind, 0) + 1
        return out

    def to_text(self) -> str:
        """Line-oriented export: header, registers, then one gate per line."""
        lines = [f"circuit {self.qubit_count}"]
        for name, qubits in self.registers.items():
            lines.append("reg " + name + " " + " ".join(map(str, qubits)))
        for g in self.gates:
            if g.kind == "ORACLE":
                head = f"ORACLE {g.name} "
            else:
                head = f"{g.kind} "
            line = head + " ".join(map(str, g.targets))
            if g.controls:
                line += " ; " + " ".join(map(str, g.controls))
            lines.append(line)
        return "\n".join(lines) + "\n"


def resource_profile(circ: Circuit) -> ResourceProfile:
    """Cost the circuit under the Clifford+T expansion convention."""
    raw_cnot = 0
    toffoli = 0
    mcx_cnot = 0
    peak_ladder = 0
    for g in circ.gates:
        if g.kind == "CNOT":
            raw_cnot += 1
        elif g.kind == "TOFFOLI":
            toffoli += 1
        elif g.kind == "MCX":
            k = len(g.controls)
            toffoli += 2 * (k - 1)
            mcx_cnot += 1
            peak_ladder = max(peak_ladder, k - 1)
    return ResourceProfile(
        cnot=raw_cnot + mcx_cnot + TOFFOLI_CNOT_COUNT * toffoli,
        toffoli=toffoli,
        t_depth=TOFFOLI_T_DEPTH * toffoli,
        ancilla=circ.ancilla_count + peak_ladder,
        total_qubits=circ.qubit_count + peak_ladder,
        raw_cnot=raw_cnot + mcx_cnot,
    )
