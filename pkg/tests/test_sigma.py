from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dendrodyn.sigma import (
    EMPTY,
    WordError,
    collapse_time,
    first_empty_time,
    format_word,
    geometric_collapse,
    parse_word,
    periodic_endpoint_check,
    realize,
    region_exactness,
    sigma,
    sigma_orbit,
    sigma_power,
    verify_collapse,
    word,
)

pairs = st.tuples(st.integers(1, 7), st.integers(1, 7))
words = st.lists(pairs, min_size=1, max_size=5).map(tuple)


def _naive_power(w, steps):
    for _ in range(steps):
        w = sigma(w)
    return w


def test_rules():
    assert sigma(word((3, 2))) == word((2, 2))
    assert sigma(word((1, 2))) == EMPTY
    assert sigma(word((1, 3), (2, 5))) == word((4, 5))
    assert sigma(EMPTY) == EMPTY


def test_first_empty_before_m():
    c = verify_collapse(word((1, 3)))
    assert c.m == 3 and c.collapsed and c.first_empty == 1


@settings(max_examples=300)
@given(words, st.integers(0, 40))
def test_power_matches_iteration(w, k):
    assert sigma_power(w, k) == _naive_power(w, k)


@settings(max_examples=300)
@given(words)
def test_collapse_identity(w):
    m = collapse_time(w)
    assert _naive_power(w, m) == EMPTY
    assert first_empty_time(w) == m - w[-1][1] + 1
    assert _naive_power(w, first_empty_time(w) - 1) != EMPTY


@settings(max_examples=100)
@given(st.lists(pairs, min_size=1, max_size=3).map(tuple), st.integers(1, 4))
def test_endpoint_shadow(w, n):
    assert periodic_endpoint_check(w, n)
    assert _naive_power(w * (n + 1), collapse_time(w)) == w * n


@given(words)
def test_format_round_trip(w):
    assert parse_word(format_word(w)) == w


@pytest.mark.parametrize("bad", ["(0,1)", "(1,2)x", "(1)", "abc"])
def test_parse_errors(bad):
    with pytest.raises(WordError):
        parse_word(bad)


def test_parse_empty():
    assert parse_word("-") == EMPTY


def test_orbit_listing():
    assert sigma_orbit(word((2, 1)), 2) == [word((2, 1)), word((1, 1)), EMPTY]


@pytest.mark.parametrize("w", [word((1, 1)), word((2, 3)), word((1, 2), (2, 1))])
def test_region_exactness(w):
    rc = region_exactness(w, 2)
    assert rc and rc.checked == 1 + 4 + 16


@pytest.mark.parametrize("w", [word((1, 1)), word((2, 2)), word((1, 3), (2, 1)), word((3, 1), (1, 2))])
def test_geometric_collapse(w):
    assert geometric_collapse(w)


def test_realize_edge_lengths():
    f, names = realize([word((1, 2))])
    t = f.tree
    assert t.distance(t.vertex(names[EMPTY]), t.vertex(names[word((1, 2))])) == Fraction(1, 8)
    assert f(t.vertex(names[word((1, 2))])) == t.vertex(names[EMPTY])
