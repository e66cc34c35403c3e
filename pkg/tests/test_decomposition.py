import pytest

from dendrodyn.covering import build_graph, primitivity_horizon
from dendrodyn.decomposition import (
    Decomposition,
    NotTransitive,
    piece_horizons,
    refinement_relation,
    terminal_decomposition,
    trivial,
    verify_decomposition,
)
from helpers import ident, random_interval_map, rotation3, tent, tent_pair


def test_rotation3_terminal_length_three():
    f = rotation3()
    D = terminal_decomposition(f)
    assert D.length == 3
    rep = verify_decomposition(f, D)
    assert rep.ok, rep.text()
    assert all(h is not None for h in piece_horizons(f, D))


def test_rotation3_cube_primitive_on_pieces_by_hand():
    f = rotation3()
    D = terminal_decomposition(f)
    f3 = f.power(3)
    g = build_graph(f3)
    for i in range(3):
        sub = D.subtree(f, i)
        keep = [J.index for J in f3.intervals if sub.contains(J.arc.point_at(J.length / 2))]
        assert primitivity_horizon(g.restrict(keep)) is not None


def test_tent_pair_two_pieces():
    f = tent_pair()
    D = terminal_decomposition(f)
    assert D.length == 2
    assert verify_decomposition(f, D).ok
    # the halves swap: each piece is the other's image
    assert f.image_of(D.subtree(f, 0)) == D.subtree(f, 1)


def test_mixing_map_is_trivially_terminal():
    f = tent()
    D = terminal_decomposition(f)
    assert D == trivial(f)
    assert verify_decomposition(f, D).ok


def test_wrong_decomposition_fails():
    f = tent_pair()
    rep = verify_decomposition(f, Decomposition.of({0, 1}, {1, 2}))
    assert not rep.ok and "finite intersections" in rep.failures
    rep = verify_decomposition(f, Decomposition.of({0}, {1}))
    assert "cover" in rep.failures
    rep = verify_decomposition(f, Decomposition.of({0, 1}, {2}))
    assert "shift" in rep.failures


def test_not_transitive_rejected():
    with pytest.raises(NotTransitive):
        terminal_decomposition(ident())


def test_refinement_of_trivial():
    f = rotation3()
    D = terminal_decomposition(f)
    r = refinement_relation(D, trivial(f))
    assert r.refines and r.multiplicity == 3
    assert not refinement_relation(trivial(f), D).refines


@pytest.mark.parametrize("seed", [6, 7, 25, 31])
def test_random_transitive_maps_verify(seed):
    f = random_interval_map(seed, 3)
    D = terminal_decomposition(f)
    assert verify_decomposition(f, D).ok
