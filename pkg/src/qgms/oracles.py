"""Oracle constructions: periodic functions and the whitened-cipher family.

Two function families feed the circuits. A Simon oracle is a 2-to-1
function with a hidden XOR period. The cipher family models a block
cipher wrapped in XOR whitening keys, Enc(x) = E(k, x xor k1) xor k2,
where E is a keyed family of independent seeded random permutations; the
key-recovery residual f(k', x) = Enc(x) xor E(k', x) has period k1 when
k' is the true core key, which is what the search exploits.

Desk-scale block widths make a real cipher meaningless here, so E is
explicitly an ideal random-permutation family with a reproducible seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import Circuit
from . import sim


class ZeroPeriod(Exception):
    """A periodic oracle with s = 0 is not 2-to-1; refuse to build it."""


class ZeroWhiteningKey(Exception):
    """k1 = 0 would make the recovery period trivial; refuse to build it."""


@dataclass(frozen=True)
class SimonOracle:
    """2-to-1 function f on n bits with f(x) = f(x xor s), s != 0.

    ``table[x]`` is f(x); calling the oracle makes it usable directly as a
    circuit oracle block over n input and n output qubits.
    """

    n: int
    s: int
    table: tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.table[x]


def build_simon_oracle(n: int, s: int, rng=None) -> SimonOracle:
    """Random oracle with hidden period s: distinct values per {x, x+s} coset.

    Raises:
        ZeroPeriod: if s = 0.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 < s < (1 << n):
        raise ZeroPeriod(f"period must be a nonzero {n}-bit value")
    gen = np.random.default_rng(rng)
    values = [int(v) for v in gen.permutation(1 << n)]
    table = [0] * (1 << n)
    assigned: dict[int, int] = {}
    for x in range(1 << n):
        rep = min(x, x ^ s)
        if rep not in assigned:
            assigned[rep] = values[len(assigned)]
        table[x] = assigned[rep]
    return SimonOracle(n, s, tuple(table))


@dataclass(frozen=True)
class FxOracle:
    """Whitened cipher plus the key-recovery residual f(k', x).

    ``m`` core-key bits, ``n`` block bits; (key, k1, k2) is the secret.
    ``perms[k]`` is the underlying ideal permutation E(k, .) drawn from
    ``cipher_seed``. Calling the oracle evaluates the residual with k' in
    the low m bits and x above it, matching a circuit oracle block whose
    inputs are the key register followed by the block register.
    """

    m: int
    n: int
    key: int
    k1: int
    k2: int
    cipher_seed: int
    perms: tuple[tuple[int, ...], ...]

    def encrypt(self, x: int) -> int:
        return self.perms[self.key][x ^ self.k1] ^ self.k2

    def residual(self, k_prime: int, x: int) -> int:
        """f(k', x) = Enc(x) xor E(k', x); period k1 at k' = key."""
        return self.encrypt(x) ^ self.perms[k_prime][x]

    def residual_table(self, k_prime: int) -> list[int]:
        return [self.residual(k_prime, x) for x in range(1 << self.n)]

    def __call__(self, packed: int) -> int:
        k_prime = packed & ((1 << self.m) - 1)
        x = packed >> self.m
        return self.residual(k_prime, x)


def build_fx_oracle(
    m: int, n: int, key: int, k1: int, k2: int, cipher_seed: int = 0
) -> FxOracle:
    """Whitened-cipher oracle over an ideal seeded permutation family.

    Raises:
        ZeroWhiteningKey: if k1 = 0 (the hidden period would be 0).
    """
    if m < 1 or n < 1:
        raise ValueError("widths must be positive")
    if not 0 <= key < (1 << m):
        raise ValueError("key out of range")
    if not 0 < k1 < (1 << n):
        raise ZeroWhiteningKey("k1 must be a nonzero block-width value")
    if not 0 <= k2 < (1 << n):
        raise ValueError("k2 out of range")
    perms = _permutation_family(m, n, cipher_seed)
    return FxOracle(m, n, key, k1, k2, cipher_seed, perms)


@lru_cache(maxsize=32)
def _permutation_family(m: int, n: int, seed: int) -> tuple[tuple[int, ...], ...]:
    gen = np.random.default_rng(seed)
    return tuple(
        tuple(int(v) for v in gen.permutation(1 << n)) for _ in range(1 << m)
    )


# ---------------------------------------------------------------------------
# Oracle diagnostics (used by tests and seed selection)


def is_two_to_one(table: list[int] | tuple[int, ...]) -> bool:
    from collections import Counter

    return all(c == 2 for c in Counter(table).values())


def periods_of(table: list[int] | tuple[int, ...], n: int) -> list[int]:
    """All nonzero p with f(x) = f(x xor p) for every x."""
    return [
        p
        for p in range(1, 1 << n)
        if all(table[x] == table[x ^ p] for x in range(1 << n))
    ]


def y_marginal(table: list[int] | tuple[int, ...], n: int) -> list[float]:
    """Exact y-register distribution of one H / query / H round over f.

    P(y) = sum_v |sum_{x: f(x)=v} (-1)^(x.y)|^2 / 4^n. A permutation table
    gives the uniform distribution; a 2-to-1 table with period s gives the
    uniform distribution on the subspace orthogonal to s; a constant table
    concentrates everything on y = 0.
    """
    size = 1 << n
    out = []
    for y in range(size):
        total = 0.0
        by_value: dict[int, int] = {}
        for x in range(size):
            sign = -1 if bin(x & y).count("1") % 2 else 1
            by_value[table[x]] = by_value.get(table[x], 0) + sign
        for acc in by_value.values():
            total += float(acc * acc)
        out.append(total / (size * size))
    return out


# ---------------------------------------------------------------------------
# Period-finding rounds


def simon_round_circuit(oracle: SimonOracle) -> Circuit:
    """One period-finding round: H, query, H on a 2n-qubit register pair.

    Qubits 0..n-1 start as the query register and hold y afterwards;
    qubits n..2n-1 hold the function value.
    """
    n = oracle.n
    circ = Circuit(2 * n)
    circ.registers = {
        "y": tuple(range(n)),
        "f": tuple(range(n, 2 * n)),
    }
    for q in range(n):
        circ.h(q)
    circ.oracle_block(
        "f", oracle, ins=list(range(n)), outs=list(range(n, 2 * n))
    )
    for q in range(n):
        circ.h(q)
    return circ


def simon_round(oracle: SimonOracle) -> sim.StateVector:
    """State after one round; the y-marginal is uniform on s-perp."""
    return sim.run(simon_round_circuit(oracle))


def parallel_simon_circuit(oracle: SimonOracle, l: int) -> Circuit:
    """l independent rounds side by side (2nl qubits).

    Round j occupies qubits 2nj..2n(j+1)-1, laid out as in
    simon_round_circuit; registers "y0", "f0", "y1", ... name the parts.
    """
    n = oracle.n
    circ = Circuit(2 * n * l)
    regs = {}
    for j in range(l):
        base = 2 * n * j
        ys = list(range(base, base + n))
        fs = list(range(base + n, base + 2 * n))
        regs[f"y{j}"] = tuple(ys)
        regs[f"f{j}"] = tuple(fs)
        for q in ys:
            circ.h(q)
        circ.oracle_block("f", oracle, ins=ys, outs=fs)
        for q in ys:
            circ.h(q)
    circ.registers = regs
    return circ


def parallel_simon(oracle: SimonOracle, l: int) -> sim.StateVector:
    """Tensor power of simon_round across l register pairs."""
    return sim.run(parallel_simon_circuit(oracle, l))
