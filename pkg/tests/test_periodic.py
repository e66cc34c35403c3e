from fractions import Fraction as F

import pytest

from dendrodyn.periodic import (
    PeriodicArc,
    PeriodicOrbit,
    PreconditionError,
    SearchInconclusive,
    density_certificate,
    enumerate_periodic,
    fixed_points,
    locate_periodic_in_component,
    minimal_period,
    periodic_arcs,
    periodic_orbits,
    window_candidates,
)
from dendrodyn.tree import at
from helpers import (
    collapse,
    ident,
    random_interval_map,
    rotation3,
    swap,
    tent,
    tent_pair,
    three_fold,
)
from oracles import fixed_points_of_power, periodic_points_by_roots


def _found(f, N):
    out = {}
    for o in periodic_orbits(enumerate_periodic(f, N)):
        for x in o.points:
            out[f.tree.coordinate(x, "e")] = o.period
    return out


CASES = [tent, three_fold, tent_pair, collapse] + [
    (lambda s=s, k=k: random_interval_map(s, k)) for s, k in [(6, 3), (1, 4), (0, 5), (3, 5), (19, 4)]
]


@pytest.mark.parametrize("make", CASES)
@pytest.mark.parametrize("N", [1, 3, 5])
def test_orbits_match_power_roots(make, N):
    f = make()
    expected = periodic_points_by_roots(f, N)
    items = enumerate_periodic(f, N)
    if periodic_arcs(items):
        found = _found(f, N)
        assert set(found.items()) <= set(expected.items()) | {
            (x, n) for x, n in found.items() if any(a <= x <= b for a, b in fixed_points_of_power(f, n)[1])
        }
        return
    assert _found(f, N) == expected


def test_tent_counts():
    items = enumerate_periodic(tent(), 2)
    assert [o.period for o in items] == [1, 1, 2]
    assert fixed_points(tent()) == [at(tent().tree, 0), at(tent().tree, F(2, 3))]
    o = items[2]
    assert isinstance(o, PeriodicOrbit)
    assert {tent().tree.coordinate(x, "e") for x in o.points} == {F(2, 5), F(4, 5)}


def test_identity_gives_arc():
    items = enumerate_periodic(ident(), 2)
    arcs = periodic_arcs(items)
    assert arcs and isinstance(arcs[0], PeriodicArc) and arcs[0].period == 1


def test_swap_period_two_arcs():
    items = enumerate_periodic(swap(), 2)
    orbits = periodic_orbits(items)
    # 1/2 is fixed; the partition orbit {0, 1} is listed as an isolated orbit
    assert [o.period for o in orbits] == [1, 2]
    assert orbits[1].base == swap().tree.vertex("a")
    assert {a.period for a in periodic_arcs(items)} == {2}


def test_rotation_orbits_on_star():
    f = rotation3()
    for o in periodic_orbits(enumerate_periodic(f, 3)):
        assert f.iterate(o.base, o.period) == o.base
        assert minimal_period(f, o.base) == o.period


def test_density_tent_and_three_fold():
    for f in (tent(), three_fold()):
        cert = density_certificate(f, F(1, 64), 12)
        assert cert.status == "certified"
        assert cert.period_reached <= 12


def test_density_gap_for_collapse():
    cert = density_certificate(collapse(), F(1, 8), 6)
    assert cert.status == "gap"
    assert cert.witness is not None


def test_density_swap_certified():
    assert density_certificate(swap(), F(1, 8), 4).status == "certified"


def test_density_inconclusive_on_small_budget():
    assert density_certificate(tent(), F(1, 64), 2).status == "inconclusive"


def test_locate_in_component():
    f = tent()
    t = f.tree
    o = locate_periodic_in_component(f, at(t, F(3, 5)), at(t, F(9, 10)), 1, 3)
    assert o.base == at(t, F(2, 3))
    with pytest.raises(PreconditionError):
        locate_periodic_in_component(f, at(t, F(3, 5)), at(t, F(7, 10)), 1, 1)


def test_window_candidates_least_period():
    f = tent()
    t = f.tree
    n, pts = window_candidates(f, 0, F(3, 5), F(7, 10))
    roots = periodic_points_by_roots(f, n)
    inside = sorted(x for x, p in roots.items() if F(3, 10) < x < F(7, 20))
    assert [t.coordinate(p, "e") for p in pts] == inside
    assert all(roots[x] == n for x in inside)
    assert not any(F(3, 10) < x < F(7, 20) and p < n for x, p in roots.items())


def test_window_candidates_exhausted():
    with pytest.raises(SearchInconclusive):
        window_candidates(collapse(), 1, F(1, 3), F(2, 3), max_period=5)
