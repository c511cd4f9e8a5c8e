"""Counting n-by-n binary matrices of rank n-1 with rows from a hyperplane.

The count of interest: matrices whose n rows are all drawn from the
(n-1)-dimensional subspace V orthogonal to a fixed nonzero vector s, and
whose rank is exactly n-1 (the largest possible under that row
constraint). The closed form is

    2^((n-2)(n-1)/2) * (2^n - 1) * prod_{i=1}^{n-1} (2^i - 1)

and the brute-force check enumerates all 2^((n-1)n) row choices. The
count does not depend on which s is chosen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class EnumerationTooLarge(Exception):
    """Brute-force enumeration of 2^((n-1)n) matrices refused for n > 5."""


BRUTE_LIMIT = 5


@dataclass(frozen=True)
class CountReport:
    n: int
    brute_count: int | None
    formula_count: int
    agreement: bool | None

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "brute_count": self.brute_count,
            "formula_count": self.formula_count,
            "agreement": self.agreement,
        }


def rank_deficit_one_formula(n: int) -> int:
    """Closed-form count of rank-(n-1) matrices with rows from V."""
    if n < 2:
        raise ValueError("n must be at least 2")
    out = 2 ** ((n - 2) * (n - 1) // 2) * (2**n - 1)
    for i in range(1, n):
        out *= 2**i - 1
    return out


def relaxation_bound(n: int) -> int:
    """Loose upper bound 2^(n(n-1)) on the same count."""
    return 2 ** (n * (n - 1))


def _hyperplane(n: int, s: int) -> list[int]:
    return [x for x in range(1 << n) if bin(x & s).count("1") % 2 == 0]


def brute_count_rank_n_minus_1(n: int, s: int = 1) -> int:
    """Enumerate every row choice and count rank-(n-1) outcomes.

    Rank is computed without row reduction: a matrix has rank n-1 exactly
    when the XOR-span of its rows contains 2^(n-1) distinct values. The
    span is built incrementally as a (matrices, subsets) array, so the
    whole enumeration is a handful of vectorized passes.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if n > BRUTE_LIMIT:
        raise EnumerationTooLarge(
            f"2^{(n - 1) * n} matrices is past the enumeration limit (n <= {BRUTE_LIMIT})"
        )
    if not 0 < s < (1 << n):
        raise ValueError("s must be a nonzero n-bit value")
    hyperplane = np.array(_hyperplane(n, s), dtype=np.uint8)
    bits = n - 1
    mask = (1 << bits) - 1
    total = 1 << (bits * n)
    index = np.arange(total, dtype=np.int64)
    spans = np.zeros((total, 1), dtype=np.uint8)
    for i in range(n):
        row = hyperplane[(index >> (bits * i)) & mask]
        spans = np.concatenate([spans, spans ^ row[:, None]], axis=1)
    spans.sort(axis=1)
    distinct = 1 + np.count_nonzero(spans[:, 1:] != spans[:, :-1], axis=1)
    return int(np.count_nonzero(distinct == 1 << bits))


def count_rank_n_minus_1(n: int, mode: str = "both", s: int = 1) -> CountReport:
    """Compare brute-force and closed-form counts.

    mode selects which sides run: "brute", "formula", or "both". The
    agreement flag is only set when both are available.
    """
    if mode not in ("brute", "formula", "both"):
        raise ValueError(f"unknown mode {mode!r}")
    formula = rank_deficit_one_formula(n)
    brute = None
    if mode in ("brute", "both"):
        brute = brute_count_rank_n_minus_1(n, s)
    agreement = None if brute is None else brute == formula
    return CountReport(n, brute, formula, agreement)
