import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dendrodyn.tree import (
    MetricTree,
    Subtree,
    TreeError,
    disjoint_family_bound,
    free_arcs,
    hausdorff_distance,
    interval,
    star,
)
from helpers import random_point, random_tree
from oracles import dijkstra_distance


def test_endpoint_offsets_are_vertices():
    t = interval(2)
    assert t.point("e", 0) == t.vertex("a")
    assert t.point("e", 2) == t.vertex("b")
    assert hash(t.point("e", F(4, 2))) == hash(t.vertex("b"))
    assert t.point("e", 1).vertex is None


def test_floats_refused():
    t = interval()
    with pytest.raises(TypeError):
        t.point("e", 0.5)


def test_off_tree_point():
    t = interval()
    with pytest.raises(TreeError):
        t.point("e", 2)
    with pytest.raises(TreeError):
        t.point("nope", F(1, 2))


def test_rejects_cycles_and_bad_lengths():
    with pytest.raises(TreeError):
        MetricTree(["a", "b"], [("e", "a", "b", 1), ("f", "b", "a", 1)])
    with pytest.raises(TreeError):
        MetricTree(["a", "b"], [("e", "a", "b", 0)])


@pytest.mark.parametrize("seed", range(8))
def test_distance_matches_dijkstra(seed):
    t = random_tree(seed)
    rng = random.Random(seed)
    for _ in range(40):
        a, b = random_point(t, rng), random_point(t, rng)
        d = t.distance(a, b)
        assert d == dijkstra_distance(t, a, b)
        assert t.path(a, b).length == d


def test_star_geometry():
    s = star(3)
    assert s.branch_points == ["c"]
    assert sorted(s.endpoints) == ["t0", "t1", "t2"]
    assert s.distance(s.point("b0", F(1, 2)), s.point("b2", F(1, 3))) == F(5, 6)


def test_path_positions():
    s = star(3)
    x, y = s.point("b0", F(1, 2)), s.point("b1", F(1, 4))
    arc = s.path(x, y)
    assert arc.point_at(F(1, 2)) == s.vertex("c")
    assert arc.position(y) == F(3, 4)
    assert arc.contains(s.vertex("c"))
    assert not arc.contains(s.vertex("t2"))


def test_subdivide_keeps_distances():
    t = random_tree(3)
    rng = random.Random(3)
    cuts = [random_point(t, rng) for _ in range(6)]
    new, emb = t.subdivide(cuts)
    for c in cuts:
        assert emb(c).vertex is not None
    for _ in range(30):
        a, b = random_point(t, rng), random_point(t, rng)
        assert new.distance(emb(a), emb(b)) == t.distance(a, b)
        assert emb.back(emb(a)) == a


def test_subdivide_twice_same_edge():
    t = interval()
    t1, e1 = t.subdivide([t.point("e", F(1, 2))])
    t2, e2 = t1.subdivide([t1.point("e", F(1, 4)), t1.point("e~1", F(1, 4))])
    assert len(t2.edges) == 4
    emb = e1.compose(e2)
    assert emb(t.point("e", F(3, 4))).vertex is not None


def test_subtree_basics():
    s = star(3)
    S = Subtree(s, [("b0", 0, F(1, 2)), ("b1", 0, 1)])
    assert S.is_connected()
    assert S.diameter() == F(3, 2)
    assert S.contains(s.vertex("c"))
    assert not S.contains(s.vertex("t0"))
    T = Subtree(s, [("b2", F(1, 2), 1)])
    assert not S.intersects(T)
    assert not S.union(T).is_connected()
    assert S.distance_to(s.vertex("t2")) == 1


def test_ball_and_hausdorff():
    s = star(3)
    B = Subtree.ball(s, s.vertex("c"), F(1, 2))
    assert B.diameter() == 1
    W = Subtree.whole(s)
    assert hausdorff_distance(s, B, W) == F(1, 2)
    assert hausdorff_distance(s, W, W) == 0


def test_free_arcs():
    s = star(3)
    assert sorted(a.length for a in free_arcs(s)) == [1, 1, 1]
    assert len(free_arcs(interval(3))) == 1


def _disjoint_family(t, rng, tries=60):
    family = []
    for _ in range(tries):
        S = Subtree.ball(t, random_point(t, rng), F(rng.randint(1, 12), 4))
        if all(not S.intersects(R) for R in family):
            family.append(S)
    return family


@pytest.mark.parametrize("eps", [F(1, 2), F(1), F(3)])
def test_disjoint_family_bound_random(eps):
    t = random_tree(11)
    n, cuts = disjoint_family_bound(t, eps)
    assert n == len(cuts)
    rng = random.Random(int(eps * 4))
    for _ in range(20):
        fam = _disjoint_family(t, rng)
        assert sum(S.diameter() >= eps for S in fam) <= n


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_distance_symmetric_and_triangle(seed):
    t = random_tree(seed % 50, edges=8)
    rng = random.Random(seed)
    a, b, c = (random_point(t, rng) for _ in range(3))
    assert t.distance(a, b) == t.distance(b, a)
    assert t.distance(a, c) <= t.distance(a, b) + t.distance(b, c)
