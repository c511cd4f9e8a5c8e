"""Tests for the rank-(n-1) matrix count."""

import itertools

import pytest

from qgms import gf2
from qgms.counting import (
    EnumerationTooLarge,
    brute_count_rank_n_minus_1,
    count_rank_n_minus_1,
    rank_deficit_one_formula,
    relaxation_bound,
)


def slow_count(n, s):
    """Independent pure-python count via the packed matrix rank routine."""
    hyperplane = [x for x in range(1 << n) if bin(x & s).count("1") % 2 == 0]
    hits = 0
    for rows in itertools.product(hyperplane, repeat=n):
        mat = gf2.BitMatrix.from_rows([[(r >> c) & 1 for c in range(n)] for r in rows])
        if gf2.rank(mat) == n - 1:
            hits += 1
    return hits


def test_formula_values():
    assert rank_deficit_one_formula(2) == 3
    assert rank_deficit_one_formula(3) == 42
    assert rank_deficit_one_formula(4) == 2520
    assert rank_deficit_one_formula(5) == 624960


def test_brute_matches_independent_count():
    for n in (2, 3):
        for s in range(1, 1 << n):
            assert brute_count_rank_n_minus_1(n, s) == slow_count(n, s)


def test_brute_matches_formula_small():
    for n in (2, 3, 4):
        report = count_rank_n_minus_1(n)
        assert report.brute_count == report.formula_count
        assert report.agreement is True


def test_count_is_hyperplane_independent():
    for s in (1, 2, 3):
        assert brute_count_rank_n_minus_1(2, s) == 3
    for s in (1, 5, 7):
        assert brute_count_rank_n_minus_1(3, s) == 42


def test_enumeration_refused_past_limit():
    with pytest.raises(EnumerationTooLarge):
        brute_count_rank_n_minus_1(6)
    report = count_rank_n_minus_1(6, mode="formula")
    assert report.brute_count is None
    assert report.agreement is None


def test_relaxation_bound_holds():
    for n in range(2, 13):
        assert rank_deficit_one_formula(n) < relaxation_bound(n)


def test_mode_validation():
    with pytest.raises(ValueError):
        count_rank_n_minus_1(3, mode="exact")
    with pytest.raises(ValueError):
        rank_deficit_one_formula(1)
    with pytest.raises(ValueError):
        brute_count_rank_n_minus_1(3, s=8)
