"""Small maps and random generators shared by the test modules."""
from __future__ import annotations

import random
from fractions import Fraction as F

from dendrodyn.markov import MarkovMap
from dendrodyn.tree import MetricTree, at, interval, star


def interval_map(xs, ys, length=1) -> MarkovMap:
    t = interval(length)
    pts = [at(t, x) for x in xs]
    return MarkovMap(t, pts, {p: at(t, y) for p, y in zip(pts, ys)})


def tent():
    return interval_map([0, F(1, 2), 1], [0, 1, 0])


def three_fold():
    return interval_map([0, F(1, 3), F(2, 3), 1], [0, 1, 0, 1])


def ident():
    return interval_map([0, 1], [0, 1])


def swap():
    # x -> 1 - x
    return interval_map([0, F(1, 2), 1], [1, F(1, 2), 0])


def tent_pair():
    # [0,1/2] <-> [1/2,1], its square is mixing on each half
    return interval_map([0, F(1, 2), F(3, 4), 1], [1, F(1, 2), 0, F(1, 2)])


def collapse():
    # everything falls onto 0 except the attracting [0,1/2] fold; periodic points are 0 only
    return interval_map([0, F(1, 2), 1], [0, 0, F(1, 2)])


def rotation3() -> MarkovMap:
    s = star(3)
    c, t0, t1, t2 = (s.vertex(v) for v in ("c", "t0", "t1", "t2"))
    m2 = s.point("b2", F(1, 2))
    return MarkovMap(s, [c, t0, t1, t2, m2], {c: c, t0: t1, t1: t2, m2: t0, t2: c})


def random_interval_map(seed: int, size: int = 5) -> MarkovMap:
    """Partition of ``size+1`` equally spaced points with random images in it."""
    rng = random.Random(seed)
    xs = [F(k, size) for k in range(size + 1)]
    return interval_map(xs, [rng.choice(xs) for _ in xs])


def random_tree(seed: int, edges: int = 20) -> MetricTree:
    rng = random.Random(seed)
    verts = ["v0"]
    es = []
    for k in range(1, edges + 1):
        parent = rng.choice(verts)
        v = f"v{k}"
        es.append((f"e{k}", parent, v, F(rng.randint(1, 8), rng.randint(1, 4))))
        verts.append(v)
    return MetricTree(verts, es, f"R{seed}")


def random_point(t: MetricTree, rng: random.Random):
    e = t.edges[rng.choice(sorted(t.edges))]
    return t.point(e.id, e.length * F(rng.randint(0, 12), 12))


def transitivity_corpus() -> list[tuple[str, MarkovMap]]:
    """Handcrafted maps plus seeded random ones, mixing all three verdicts."""
    return [
        ("tent", tent()),
        ("three-fold", three_fold()),
        ("identity", ident()),
        ("swap", swap()),
        ("rotation3", rotation3()),
        ("tent-pair", tent_pair()),
        ("collapse", collapse()),
        ("random-3-6", random_interval_map(6, 3)),
        ("random-4-1", random_interval_map(1, 4)),
        ("random-5-0", random_interval_map(0, 5)),
        ("random-5-3", random_interval_map(3, 5)),
    ]
