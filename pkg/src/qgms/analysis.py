"""Key search over a whitened cipher with period-finding marking.

The experiment under study: a key register in uniform superposition
drives l parallel period-finding rounds against the cipher residual
f(k', x), every measurement is deferred, and amplitude amplification is
run on top with a marking predicate that checks the measured-later
y rows for a rank-(n-1) system whose kernel vector passes plaintext
checks. The module builds that state, runs the amplified search exactly,
and computes the closed-form quantities that explain why its success
probability stays far below the immediate-measurement baseline.

Conventions:
  - data register layout: key qubits first, then per round a y block and
    an f block; basis indices are bit-packed in qubit order.
  - amplitude statistics use the full data space (every basis index,
    populated or not) unless a report says otherwise; the idealized
    two-to-one accounting from the closed-form model is reported
    separately for comparison.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from . import sim
from .amplify import grover_probability
from .circuit import Circuit
from .gf2 import BitMatrix, BitVector, nullspace_basis, rank
from .counting import CountReport, count_rank_n_minus_1, rank_deficit_one_formula
from .oracles import FxOracle, build_simon_oracle, y_marginal
from .synth import _Builder, kernel_core


class DegenerateUnmarkedMean(Exception):
    """The truncated iteration series needs a nonzero unmarked mean."""


POPULATION_WARN_RATIO = 0.1


# ---------------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class GmsConfig:
    """Shape and oracle of one combined-search experiment."""

    m: int
    n: int
    l: int
    oracle: FxOracle
    t: int = 20
    c_check: int = 2

    def __post_init__(self):
        if self.l < 1:
            raise ValueError("l must be at least 1")
        if self.oracle.m != self.m or self.oracle.n != self.n:
            raise ValueError("oracle widths disagree with config")
        if not 1 <= self.c_check <= (1 << self.n):
            raise ValueError("plaintext count out of range")

    @property
    def data_qubits(self) -> int:
        return self.m + 2 * self.n * self.l

    @property
    def plaintexts(self) -> list[int]:
        return list(range(self.c_check))

    def required_qubits(self) -> int:
        """Registers that hold state across an iteration: data + solution + flag."""
        return self.data_qubits + self.n + 1

    def layout(self) -> tuple[list[int], list[list[int]], list[list[int]]]:
        key = list(range(self.m))
        ys, fs = [], []
        for j in range(self.l):
            base = self.m + 2 * self.n * j
            ys.append(list(range(base, base + self.n)))
            fs.append(list(range(base + self.n, base + 2 * self.n)))
        return key, ys, fs


def _check_cap(cfg: GmsConfig) -> None:
    cap = sim.qubit_cap()
    need = cfg.required_qubits()
    if need > cap:
        raise sim.QubitCapExceeded(
            f"configuration needs {need} qubits (m + 2nl + n + 1); cap is {cap}"
        )


# ---------------------------------------------------------------------------
# State preparation


def prep_circuit(cfg: GmsConfig) -> Circuit:
    """Uniform key register plus l period-finding rounds, data qubits only."""
    key, ys, fs = cfg.layout()
    circ = Circuit(cfg.data_qubits)
    regs = {"key": tuple(key)}
    for j in range(cfg.l):
        regs[f"y{j}"] = tuple(ys[j])
        regs[f"f{j}"] = tuple(fs[j])
    circ.registers = regs
    for q in key:
        circ.h(q)
    for j in range(cfg.l):
        for q in ys[j]:
            circ.h(q)
        circ.oracle_block("f", cfg.oracle, ins=key + ys[j], outs=fs[j])
        for q in ys[j]:
            circ.h(q)
    return circ


def prepare_initial_state(cfg: GmsConfig) -> sim.StateVector:
    """Exact state before any amplification iteration."""
    _check_cap(cfg)
    return sim.run(prep_circuit(cfg))


# ---------------------------------------------------------------------------
# The classical marking predicate


def ug_classifier(k_prime, y_matrix: BitMatrix, oracle: FxOracle, plaintexts) -> int:
    """1 iff the y rows pin down a single candidate period that checks out.

    The rank must be exactly n-1 so the kernel holds one nonzero vector s;
    the oracle residual at k' must then collide on p and p xor s for every
    provided plaintext p. Anything else returns 0.
    """
    if not plaintexts:
        raise ValueError("plaintexts must be nonempty")
    kp = k_prime.bits if isinstance(k_prime, BitVector) else int(k_prime)
    n = y_matrix.cols
    if rank(y_matrix) != n - 1:
        return 0
    basis = nullspace_basis(y_matrix)
    s = basis[0].bits
    for p in plaintexts:
        if oracle.residual(kp, p) != oracle.residual(kp, p ^ s):
            return 0
    return 1


@lru_cache(maxsize=8)
def _accept_table(cfg: GmsConfig) -> tuple[tuple[int, ...], ...]:
    """accept[k'][packed Y] for every key value and row content."""
    n, l = cfg.n, cfg.l
    plaintexts = cfg.plaintexts
    out = []
    for kp in range(1 << cfg.m):
        row = []
        for ybits in range(1 << (n * l)):
            rows = [(ybits >> (n * j)) & ((1 << n) - 1) for j in range(l)]
            mat = BitMatrix(l, n, tuple(rows))
            row.append(ug_classifier(kp, mat, cfg.oracle, plaintexts))
        out.append(tuple(row))
    return tuple(out)


def _data_fields(cfg: GmsConfig, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split data-space indices into key value and packed y rows."""
    kp = idx & ((1 << cfg.m) - 1)
    ybits = np.zeros_like(idx)
    for j in range(cfg.l):
        yj = (idx >> (cfg.m + 2 * cfg.n * j)) & ((1 << cfg.n) - 1)
        ybits |= yj << (cfg.n * j)
    return kp, ybits


def classifier_mask(cfg: GmsConfig) -> np.ndarray:
    """Data-space states the phase oracle flips (any key value)."""
    accept = np.array(_accept_table(cfg), dtype=bool)
    idx = np.arange(1 << cfg.data_qubits)
    kp, ybits = _data_fields(cfg, idx)
    return accept[kp, ybits]


def success_mask(cfg: GmsConfig) -> np.ndarray:
    """Data-space states counted as success: correct key and accepted rows."""
    idx = np.arange(1 << cfg.data_qubits)
    kp, _ = _data_fields(cfg, idx)
    return classifier_mask(cfg) & (kp == cfg.oracle.key)


def rank_only_mask(cfg: GmsConfig) -> np.ndarray:
    """Correct key and rank-(n-1) rows, without the plaintext filter."""
    n, l = cfg.n, cfg.l
    rank_ok = np.zeros(1 << (n * l), dtype=bool)
    for ybits in range(1 << (n * l)):
        rows = tuple((ybits >> (n * j)) & ((1 << n) - 1) for j in range(l))
        rank_ok[ybits] = rank(BitMatrix(l, n, rows)) == n - 1
    idx = np.arange(1 << cfg.data_qubits)
    kp, ybits = _data_fields(cfg, idx)
    return rank_ok[ybits] & (kp == cfg.oracle.key)


# ---------------------------------------------------------------------------
# The reversible search circuit


def build_gms_circuit(cfg: GmsConfig) -> tuple[Circuit, dict[str, tuple[int, int]]]:
    """Full circuit with gate slices: prep, then one amplification round.

    The round slice decomposes as compute / phase / uncompute / diffusion.
    Compute extracts the kernel vector and rank flag from the y rows,
    makes c_check plaintext comparisons through the oracle, and lands the
    verdict on an accept qubit; phase applies Z there; uncompute runs the
    exact inverse; diffusion inverts the data register about its mean.
    Scratch is pooled, so one round returns every helper to zero and the
    state stays supported on the data register between rounds.
    """
    key, ys, fs = cfg.layout()
    n = cfg.n
    circ = Circuit(cfg.data_qubits)
    bld = _Builder(circ)

    slices: dict[str, tuple[int, int]] = {}

    def mark(name, start):
        slices[name] = (start, len(circ.gates))

    # --- prep
    start = len(circ.gates)
    for q in key:
        circ.h(q)
    for j in range(cfg.l):
        for q in ys[j]:
            circ.h(q)
        circ.oracle_block("f", cfg.oracle, ins=key + ys[j], outs=fs[j])
        for q in ys[j]:
            circ.h(q)
    mark("prep", start)

    # --- compute: kernel extraction plus plaintext checks
    start = len(circ.gates)
    s_out = [bld.fresh() for _ in range(n)]
    flag = bld.fresh()
    circ.registers = dict(circ.registers or {})
    circ.registers.update(
        {"key": tuple(key), "s": tuple(s_out), "flag": (flag,)}
    )
    for j in range(cfg.l):
        circ.registers[f"y{j}"] = tuple(ys[j])
        circ.registers[f"f{j}"] = tuple(fs[j])
    kernel_core(bld, ys, s_out, flag)

    eqs = []
    for p in cfg.plaintexts:
        xin = [bld.pool_alloc() for _ in range(n)]
        out = [bld.pool_alloc() for _ in range(n)]
        for b in range(n):
            if (p >> b) & 1:
                circ.x(xin[b])
        circ.oracle_block("f", cfg.oracle, ins=key + xin, outs=out)
        for b in range(n):
            circ.cnot(s_out[b], xin[b])
        circ.oracle_block("f", cfg.oracle, ins=key + xin, outs=out)
        # out now holds f(k',p) xor f(k',p xor s); equality means all zero
        eq = bld.fresh()
        for q in out:
            circ.x(q)
        circ.mcx(out, eq)
        for q in out:
            circ.x(q)
        eqs.append(eq)
        # return the query scratch to zero
        circ.oracle_block("f", cfg.oracle, ins=key + xin, outs=out)
        for b in range(n):
            circ.cnot(s_out[b], xin[b])
        circ.oracle_block("f", cfg.oracle, ins=key + xin, outs=out)
        for b in range(n):
            if (p >> b) & 1:
                circ.x(xin[b])
        for q in xin + out:
            bld.pool_release(q)

    accept = bld.fresh()
    circ.registers["accept"] = (accept,)
    circ.mcx([flag] + eqs, accept)
    compute_gates = circ.gates[start:]
    mark("compute", start)

    # --- phase flip on the accept qubit (Z = H X H)
    start = len(circ.gates)
    circ.h(accept)
    circ.x(accept)
    circ.h(accept)
    mark("phase", start)

    # --- uncompute
    start = len(circ.gates)
    circ.extend(g.inverse() for g in reversed(compute_gates))
    mark("uncompute", start)

    # --- diffusion about the mean over the data register
    start = len(circ.gates)
    data = list(range(cfg.data_qubits))
    for q in data:
        circ.h(q)
    for q in data:
        circ.x(q)
    circ.h(data[-1])
    circ.mcx(data[:-1], data[-1])
    circ.h(data[-1])
    for q in data:
        circ.x(q)
    for q in data:
        circ.h(q)
    mark("diffusion", start)

    return circ, slices


def _slice(circ: Circuit, lo: int, hi: int) -> Circuit:
    piece = Circuit(circ.qubit_count)
    piece.gates = list(circ.gates[lo:hi])
    piece.oracles = circ.oracles
    return piece


def run_gms(cfg: GmsConfig, t_max: int | None = None, engine: str = "sparse") -> list[float]:
    """Exact success probability of the deferred-measurement search.

    Returns the probability of measuring the correct key together with
    accepted y rows, for iteration counts t = 0..t_max. No measurement
    happens along the way; t = 0 is the freshly prepared state.
    """
    if engine not in ("sparse", "dense"):
        raise ValueError(f"unknown engine {engine!r}")
    _check_cap(cfg)
    t_iters = cfg.t if t_max is None else t_max
    circ, slices = build_gms_circuit(cfg)
    success = success_mask(cfg)
    data_size = 1 << cfg.data_qubits

    def marked_mass_sparse(state):
        scratch = 0.0
        mass = 0.0
        for idx, amp in state.items():
            w = (amp * amp.conjugate()).real
            if idx >= data_size:
                scratch += w
            elif success[idx]:
                mass += w
        if scratch > 1e-9:
            raise RuntimeError("scratch register failed to uncompute")
        return mass

    lo, hi = slices["prep"]
    round_lo, round_hi = slices["compute"][0], slices["diffusion"][1]
    if engine == "sparse":
        state: dict[int, complex] = {0: 1.0 + 0.0j}
        state = sim.sparse_apply(state, circ.gates[lo:hi], circ.oracles)
        curve = [marked_mass_sparse(state)]
        for _ in range(t_iters):
            state = sim.sparse_apply(state, circ.gates[round_lo:round_hi], circ.oracles)
            curve.append(marked_mass_sparse(state))
        return curve

    if circ.qubit_count > sim.qubit_cap():
        raise sim.QubitCapExceeded(
            f"dense engine needs {circ.qubit_count} qubits; cap is {sim.qubit_cap()}"
        )
    state = sim.run(_slice(circ, lo, hi))
    probs = state.probabilities()

    def marked_mass_dense(probs):
        scratch = probs[data_size:].sum()
        if scratch > 1e-9:
            raise RuntimeError("scratch register failed to uncompute")
        return float(probs[:data_size][success].sum())

    curve = [marked_mass_dense(probs)]
    round_circ = _slice(circ, round_lo, round_hi)
    for _ in range(t_iters):
        state = sim.run(round_circ, state=state)
        probs = state.probabilities()
        curve.append(marked_mass_dense(probs))
    return curve


# ---------------------------------------------------------------------------
# Amplitude statistics


@dataclass(frozen=True)
class AmplitudeStats:
    """Initial-amplitude summary of a marked/unmarked split.

    p_max is the ceiling on the marked-subspace probability achievable by
    amplitude amplification from this initial state: 1 - (N - r) sigma2_l,
    with sigma2_l the variance of the unmarked amplitudes.
    """

    n_states: int
    marked: int
    k0_mean: complex
    l0_mean: complex
    sigma2_l: float
    p_max: float

    def as_dict(self) -> dict:
        return {
            "N": self.n_states,
            "r": self.marked,
            "k0_mean": [self.k0_mean.real, self.k0_mean.imag],
            "l0_mean": [self.l0_mean.real, self.l0_mean.imag],
            "sigma2": self.sigma2_l,
            "p_max": self.p_max,
        }


def amplitude_stats(state, marked) -> AmplitudeStats:
    """Exact amplitude statistics over the full basis.

    state may be a StateVector or a plain amplitude array; marked is a
    boolean mask of the same size. Basis states with zero amplitude count
    toward the means and the variance: the statistics describe the whole
    space the diffusion acts on, not only the populated part.
    """
    amps = state.amps if isinstance(state, sim.StateVector) else np.asarray(state)
    marked = np.asarray(marked, dtype=bool)
    if amps.shape != marked.shape:
        raise ValueError("state and mask sizes disagree")
    n_states = amps.size
    r = int(np.count_nonzero(marked))
    k_amps = amps[marked]
    l_amps = amps[~marked]
    k0 = complex(k_amps.mean()) if r else 0.0 + 0.0j
    l0 = complex(l_amps.mean()) if r < n_states else 0.0 + 0.0j
    sigma2 = float((np.abs(l_amps - l0) ** 2).mean()) if r < n_states else 0.0
    p_max = 1.0 - (n_states - r) * sigma2
    return AmplitudeStats(n_states, r, k0, l0, sigma2, p_max)


def two_to_one_model(m: int, n: int, l: int) -> dict:
    """Closed-form accounting that idealizes the correct-key residual.

    This is the model behind the headline estimate: the correct-key
    residual is treated as exactly 2-to-1, so its branch populates
    2^(2(n-1)l) basis states, each wrong key populates 2^(2nl), and only
    populated states are counted. The marked count folds the f-register
    multiplicity 2^((n-1)l) over the rank-(n-1) row matrices. Real
    permutation ciphers at block width 2 violate the 2-to-1 idealization
    (their correct-key residual is constant), which is why these numbers
    are reported alongside, not instead of, the exact statistics.
    """
    hyperplane = [x for x in range(1 << n) if bin(x & 1).count("1") % 2 == 0]
    matrices = 0
    for rows in product(hyperplane, repeat=l):
        if rank(BitMatrix(l, n, tuple(rows))) == n - 1:
            matrices += 1
    n_states = (2**m - 1) * 2 ** (2 * n * l) + 2 ** (2 * (n - 1) * l)
    r = 2 ** ((n - 1) * l) * matrices
    sum_l_sq = (2**m - 1) / 2**m + (2 ** (2 * (n - 1) * l) - r) / (
        2**m * 2 ** (2 * (n - 1) * l)
    )
    sum_l = math.sqrt(2**m)
    sigma2 = sum_l_sq / (n_states - r) - (sum_l / (n_states - r)) ** 2
    p_max = 1.0 - (n_states - r) * sigma2
    return {
        "N": n_states,
        "r": r,
        "rank_matrices": matrices,
        "sum_l_sq": sum_l_sq,
        "sum_l": sum_l,
        "sigma2": sigma2,
        "p_max": p_max,
    }


def optimal_iterations(k0_mean, l0_mean, n_states: int, r: int) -> float:
    """Truncated-series estimate of the best iteration count.

    T = -(1/2) k0/l0 + (pi/4) sqrt(N/r) - (pi/24) sqrt(r/N), valid when
    the marked fraction is small; a warning is issued past r/N = 0.1.
    """
    if r < 1:
        raise ValueError("need at least one marked state")
    if abs(complex(l0_mean)) == 0.0:
        raise DegenerateUnmarkedMean("unmarked mean amplitude is zero")
    if r / n_states > POPULATION_WARN_RATIO:
        warnings.warn(
            f"marked fraction {r / n_states:.3f} exceeds {POPULATION_WARN_RATIO}; "
            "the truncated series is unreliable",
            stacklevel=2,
        )
    ratio = complex(k0_mean) / complex(l0_mean)
    return (
        -0.5 * ratio.real
        + (math.pi / 4) * math.sqrt(n_states / r)
        - (math.pi / 24) * math.sqrt(r / n_states)
    )


# ---------------------------------------------------------------------------
# Character sums


def character_sum(ys, n: int) -> int:
    """Product of the full-space sign sums sum_x (-1)^(x.y_i).

    Each factor is computed by direct enumeration; the product equals the
    joint sum over independent x_i. Zero unless every y_i is zero, in
    which case it is 2^(n l).
    """
    total = 1
    for y in ys:
        yv = y.bits if isinstance(y, BitVector) else int(y)
        inner = 0
        for x in range(1 << n):
            inner += -1 if bin(x & yv).count("1") % 2 else 1
        total *= inner
    return total


def coset_character_sum(y, n: int, s: int) -> int:
    """Sign sum restricted to the coset half X1 fixed by the period s.

    X1 keeps the inputs whose bit at the lowest set bit of s is zero, one
    representative per {x, x xor s} pair. At y = 0 the sum is 2^(n-1).
    """
    if not 0 < s < (1 << n):
        raise ValueError("s must be a nonzero n-bit value")
    yv = y.bits if isinstance(y, BitVector) else int(y)
    pivot = (s & -s).bit_length() - 1
    total = 0
    for x in range(1 << n):
        if (x >> pivot) & 1:
            continue
        total += -1 if bin(x & yv).count("1") % 2 else 1
    return total


# ---------------------------------------------------------------------------
# Query-ratio bound


@dataclass(frozen=True)
class QueryRatio:
    """Exact search-space-to-marked ratio and the iteration bounds it implies."""

    m: int
    n: int
    ratio: Fraction
    bound: int
    t_lower: float
    t_exhaustive: float

    @property
    def exceeds_bound(self) -> bool:
        return self.ratio > self.bound

    @property
    def slower_than_exhaustive(self) -> bool:
        return self.t_lower > self.t_exhaustive

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "ratio": [self.ratio.numerator, self.ratio.denominator],
            "bound": self.bound,
            "t_lower": self.t_lower,
            "t_exhaustive": self.t_exhaustive,
            "exceeds_bound": self.exceeds_bound,
            "slower_than_exhaustive": self.slower_than_exhaustive,
        }


def query_ratio(m: int, n: int) -> QueryRatio:
    """Iteration-count lower bound at the canonical register count l = n.

    The exact ratio N/r uses the idealized populated-state count and the
    closed-form rank-(n-1) matrix count; it always exceeds
    2^(m+2n) - 2^(2n), so the implied iteration count (pi/4) sqrt(bound)
    beats exhaustive key search (pi/4) sqrt(2^(m+n)) for every m, n here.
    """
    l = n
    n_states = (2**m - 1) * 2 ** (2 * n * l) + 2 ** (2 * (n - 1) * l)
    r = 2 ** ((n - 1) * l) * rank_deficit_one_formula(n)
    ratio = Fraction(n_states, r)
    bound = 2 ** (m + 2 * n) - 2 ** (2 * n)
    return QueryRatio(
        m,
        n,
        ratio,
        bound,
        (math.pi / 4) * math.sqrt(bound),
        (math.pi / 4) * math.sqrt(2 ** (m + n)),
    )


# ---------------------------------------------------------------------------
# Deferred vs immediate measurement


@dataclass(frozen=True)
class DeferredComparison:
    dist_immediate: dict
    dist_deferred: dict
    max_abs_diff: float
    p_correct: float
    r: int


def deferred_vs_immediate(n: int, l: int, s: int, seed: int = 0) -> DeferredComparison:
    """Joint (rows, solution) distribution both ways, and their distance.

    Immediate: measure the y rows after the rounds, then solve classically
    (solution 0 unless the rank is n-1). Deferred: wire the reversible
    solver after the rounds and measure rows and solution together at the
    end. The two joint distributions are identical; the correct-period
    probability is r / 2^((n-1)l) with r counted by enumeration.
    """
    oracle = build_simon_oracle(n, s, rng=seed)
    per_copy = y_marginal(oracle.table, n)

    def solve(rows):
        mat = BitMatrix(l, n, tuple(rows))
        if rank(mat) != n - 1:
            return 0
        return nullspace_basis(mat)[0].bits

    dist_immediate: dict[tuple[int, int], float] = {}
    for rows in product(range(1 << n), repeat=l):
        p = 1.0
        for y in rows:
            p *= per_copy[y]
        if p == 0.0:
            continue
        ybits = 0
        for j, y in enumerate(rows):
            ybits |= y << (n * j)
        key = (ybits, solve(rows))
        dist_immediate[key] = dist_immediate.get(key, 0.0) + p

    # deferred: rounds, then the reversible kernel solver, measured at the end
    circ = Circuit(2 * n * l)
    ys = []
    for j in range(l):
        base = 2 * n * j
        y_ids = list(range(base, base + n))
        f_ids = list(range(base + n, base + 2 * n))
        ys.append(y_ids)
        for q in y_ids:
            circ.h(q)
        circ.oracle_block("f", oracle, ins=y_ids, outs=f_ids)
        for q in y_ids:
            circ.h(q)
    bld = _Builder(circ)
    s_out = [bld.fresh() for _ in range(n)]
    flag = bld.fresh()
    kernel_core(bld, ys, s_out, flag)

    state: dict[int, complex] = {0: 1.0 + 0.0j}
    state = sim.sparse_apply(state, circ.gates, circ.oracles)
    dist_deferred: dict[tuple[int, int], float] = {}
    for idx, amp in state.items():
        w = (amp * amp.conjugate()).real
        if w == 0.0:
            continue
        ybits = 0
        for j in range(l):
            yj = sum(((idx >> q) & 1) << b for b, q in enumerate(ys[j]))
            ybits |= yj << (n * j)
        sv = sum(((idx >> q) & 1) << b for b, q in enumerate(s_out))
        key = (ybits, sv)
        dist_deferred[key] = dist_deferred.get(key, 0.0) + w

    keys = set(dist_immediate) | set(dist_deferred)
    max_abs_diff = max(
        abs(dist_immediate.get(k, 0.0) - dist_deferred.get(k, 0.0)) for k in keys
    )

    hyperplane = [x for x in range(1 << n) if bin(x & s).count("1") % 2 == 0]
    r = sum(
        1
        for rows in product(hyperplane, repeat=l)
        if rank(BitMatrix(l, n, tuple(rows))) == n - 1
    )
    p_correct = sum(p for (ybits, sv), p in dist_immediate.items() if sv == s)
    return DeferredComparison(dist_immediate, dist_deferred, max_abs_diff, p_correct, r)


# ---------------------------------------------------------------------------
# Immediate-measurement baseline


@dataclass(frozen=True)
class HybridReport:
    """Exact accounting of the measure-then-search contrast experiment."""

    accept_probs: tuple[float, ...]
    p_true: float
    false_positive_keys: tuple[int, ...]
    reps: int
    t_star: int
    grover_p: float
    success: float


def hybrid_accept(k_prime: int, rows, oracle: FxOracle, plaintexts) -> int:
    """1 iff some nonzero kernel candidate of the rows passes every check.

    Classical postprocessing is free to try each candidate period in the
    kernel (two oracle evaluations per plaintext each); when the rank is
    n-1 this reduces to the single-candidate classifier.
    """
    n = oracle.n
    for cand in range(1, 1 << n):
        if any(bin(row & cand).count("1") % 2 for row in rows):
            continue
        if all(
            oracle.residual(k_prime, p) == oracle.residual(k_prime, p ^ cand)
            for p in plaintexts
        ):
            return 1
    return 0


def hybrid_baseline(cfg: GmsConfig, reps: int = 4) -> HybridReport:
    """Immediate measurement plus classical search over keys, solved exactly.

    Per key, the accept probability is summed over the exact y-row
    distribution of l measured rounds. A key counts as marked when any of
    `reps` independent rounds accepts; the reported success is the chance
    that exactly the true key is marked and the key search finds it at its
    best iteration count t_star.
    """
    n, l = cfg.n, cfg.l
    plaintexts = cfg.plaintexts
    accept_probs = []
    for kp in range(1 << cfg.m):
        table = cfg.oracle.residual_table(kp)
        per_copy = y_marginal(table, n)
        total = 0.0
        for rows in product(range(1 << n), repeat=l):
            p = 1.0
            for y in rows:
                p *= per_copy[y]
            if p == 0.0:
                continue
            if hybrid_accept(kp, rows, cfg.oracle, plaintexts):
                total += p
        accept_probs.append(total)

    key = cfg.oracle.key
    p_true = accept_probs[key]
    wrong = [p for kp, p in enumerate(accept_probs) if kp != key]
    false_positive_keys = tuple(
        kp for kp, p in enumerate(accept_probs) if kp != key and p > 0.0
    )
    n_keys = 1 << cfg.m
    sweep = int(math.ceil((math.pi / 4) * math.sqrt(n_keys))) + 2
    t_star = max(range(sweep + 1), key=lambda t: grover_probability(n_keys, 1, t))
    grover_p = grover_probability(n_keys, 1, t_star)
    success = (1.0 - (1.0 - p_true) ** reps) * grover_p
    for p in wrong:
        success *= (1.0 - p) ** reps
    return HybridReport(
        tuple(accept_probs),
        p_true,
        false_positive_keys,
        reps,
        t_star,
        grover_p,
        success,
    )


# ---------------------------------------------------------------------------
# Report assembly


def analysis_report(cfg: GmsConfig, t_max: int | None = None) -> dict:
    """Everything the command-line report needs, as one JSON-ready dict."""
    curve = run_gms(cfg, t_max=t_max)
    state = prepare_initial_state(cfg)
    stats = amplitude_stats(state, success_mask(cfg))
    accept_stats = amplitude_stats(state, classifier_mask(cfg))
    rank_stats = amplitude_stats(state, rank_only_mask(cfg))
    ideal = two_to_one_model(cfg.m, cfg.n, cfg.l)
    report_warnings: list[str] = []
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            t_est = optimal_iterations(
                stats.k0_mean, stats.l0_mean, stats.n_states, stats.marked
            )
            report_warnings.extend(str(w.message) for w in caught)
    except (DegenerateUnmarkedMean, ValueError) as exc:
        t_est = None
        report_warnings.append(str(exc))
    hybrid = hybrid_baseline(cfg)
    counts = count_rank_n_minus_1(cfg.n) if cfg.n <= 5 else count_rank_n_minus_1(
        cfg.n, mode="formula"
    )
    report = {
        "schema": 1,
        "config": {
            "m": cfg.m,
            "n": cfg.n,
            "l": cfg.l,
            "key": cfg.oracle.key,
            "k1": cfg.oracle.k1,
            "k2": cfg.oracle.k2,
            "cipher_seed": cfg.oracle.cipher_seed,
            "c_check": cfg.c_check,
            "plaintexts": cfg.plaintexts,
        },
        **stats.as_dict(),
        "t_curve": [[t, p] for t, p in enumerate(curve)],
        "theorem3_T": t_est,
        "query_ratio": query_ratio(cfg.m, cfg.n).as_dict(),
        "counts": counts.as_dict(),
        "r_phase_marked": accept_stats.marked,
        "p_max_phase_marked": accept_stats.p_max,
        "r_rank_only": rank_stats.marked,
        "p_max_rank_only": rank_stats.p_max,
        "two_to_one_model": ideal,
        "hybrid": {
            "accept_probs": list(hybrid.accept_probs),
            "p_true": hybrid.p_true,
            "false_positive_keys": list(hybrid.false_positive_keys),
            "reps": hybrid.reps,
            "t_star": hybrid.t_star,
            "grover_p": hybrid.grover_p,
            "success": hybrid.success,
        },
        "warnings": report_warnings,
    }
    return report
