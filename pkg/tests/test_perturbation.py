from fractions import Fraction as F

import pytest

from dendrodyn.covering import classify
from dendrodyn.decomposition import NotTransitive
from dendrodyn.markov import MarkovMap, identity, sup_distance
from dendrodyn.periodic import enumerate_periodic, periodic_orbits
from dendrodyn.perturbation import (
    AttachSpec,
    ConstructionError,
    StageState,
    attach,
    dendrite_stage,
    spread_time,
    star_mixing,
    three_fold_cell,
    totalize,
)
from dendrodyn.tree import MetricTree, Subtree, hausdorff_distance
from helpers import ident, rotation3, tent, tent_pair


@pytest.mark.parametrize("eps", [F(1, 2), F(1, 8), F(1, 20)])
def test_totalize_pair(eps):
    f = tent_pair()
    res = totalize(f, eps)
    g = res.map
    assert classify(g).mixing
    assert res.distance == sup_distance(g, f) < eps
    assert all(g(p) == f(p) for p in f.partition)


def test_totalize_rotation():
    f = rotation3()
    res = totalize(f, F(1, 4))
    assert classify(res.map).mixing
    assert sup_distance(res.map, f) < F(1, 4)
    assert all(res.map(p) == f(p) for p in f.partition)


def test_totalize_mixing_unchanged():
    f = tent()
    assert totalize(f, F(1, 3)).map is f


def test_totalize_rejects_non_transitive():
    with pytest.raises(NotTransitive):
        totalize(ident(), F(1, 2))


def _two_halves():
    # three-fold maps on [a, m] and [m, b], glued at m
    t = MetricTree(["a", "m", "b"], [("e1", "a", "m", F(1, 2)), ("e2", "m", "b", F(1, 2))], "H")
    images = {}
    images.update(three_fold_cell(t.vertex("a"), t.vertex("m"), t))
    images.update(three_fold_cell(t.vertex("m"), t.vertex("b"), t))
    return t, MarkovMap(t, list(images), images)


@pytest.mark.parametrize("eps", [F(1, 2), F(1, 10)])
def test_attach_two_halves(eps):
    t, f = _two_halves()
    assert not classify(f).transitive
    left = Subtree(t, [("e1", 0, F(1, 2))])
    right = Subtree(t, [("e2", 0, F(1, 2))])
    res = attach(f, AttachSpec(left, (right,), (t.vertex("m"),)), eps)
    assert classify(res.map).mixing
    assert sup_distance(res.map, f) == res.distance < eps
    assert all(res.map(p) == f(p) for p in f.partition)


def test_attach_checks_seams():
    t, f = _two_halves()
    left = Subtree(t, [("e1", 0, F(1, 2))])
    right = Subtree(t, [("e2", 0, F(1, 2))])
    with pytest.raises(ValueError):
        attach(f, AttachSpec(left, (right,), (t.vertex("a"),)), F(1, 2))
    with pytest.raises(ValueError):
        attach(f, AttachSpec(left, (right, right), (t.vertex("m"),)), F(1, 2))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_star_mixing(n):
    res = star_mixing(n, F(1, 4))
    f = res.map
    t = f.tree
    assert classify(f).mixing
    assert sup_distance(f, identity(t)) == res.distance < F(1, 4)
    fixed = {o.base for o in periodic_orbits(enumerate_periodic(f, 1))}
    assert {t.vertex(v) for v in t.vertices} <= fixed


def test_star_mixing_larger_eps_fewer_cells():
    res = star_mixing(1, F(1, 2))
    assert res.log[0].startswith("cells: 3 ")


def test_spread_time_tent():
    f = tent()
    m = spread_time(f, F(1, 2))
    assert m >= 1
    W = Subtree.whole(f.tree)
    J = Subtree(f.tree, [("e", F(1, 3), F(1, 2))])
    for _ in range(m):
        J = f.image_of(J)
    assert hausdorff_distance(f.tree, J, W) < F(1, 4)


def test_stage_needs_mixing():
    with pytest.raises(ConstructionError):
        StageState.initial(tent_pair(), 1)


def test_stage_none_is_identity():
    s = StageState.initial(tent(), 1)
    assert dendrite_stage(s, None) is s


def test_stage_rejects_vertex():
    s = StageState.initial(tent(), 1)
    with pytest.raises(ValueError):
        dendrite_stage(s, s.tree.vertex("a"))


def test_one_stage_from_tent():
    f = tent()
    s = StageState.initial(f, 1)
    s2 = dendrite_stage(s, f.tree.point("e", F(2, 5) + F(1, 10**5)))
    g, T = s2.map, s2.tree
    assert classify(g).mixing
    (orb,) = s2.pinned
    pts = [T.vertex(v) for v in orb]
    assert [g(x) for x in pts] == pts[1:] + pts[:1]
    assert all(T.degree(v) == 3 for v in orb)
    (rec,) = s2.history
    assert sup_distance(g, f, rec.embedding) < rec.delta / 2
    assert rec.delta == F(1, 28)


def test_stage_degree_four():
    f = tent()
    s2 = dendrite_stage(StageState.initial(f, 1), f.tree.point("e", F(2, 5)), degree=4)
    assert all(s2.tree.degree(v) == 4 for v in s2.pinned[0])
    assert classify(s2.map).mixing
