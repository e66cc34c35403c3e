"""The ten acceptance criteria, each at its stated tolerance (exact unless noted).

Run ``pytest tests/test_acceptance.py -v``; the terminal summary lists one
PASS/FAIL line per criterion.
"""
import random
import time
from fractions import Fraction as F

import pytest

from conftest import ACCEPTANCE
from dendrodyn.covering import build_graph, classify, is_transitive, primitivity_horizon
from dendrodyn.decomposition import _power_pieces, terminal_decomposition, verify_decomposition
from dendrodyn.hyperspace import (
    almost_meshed_reduction,
    extract_periodic_from_free_arc,
    finite_periodic_sets,
)
from dendrodyn.markov import identity, sup_distance
from dendrodyn.periodic import density_certificate, enumerate_periodic, minimal_period, periodic_orbits
from dendrodyn.perturbation import StageState, dendrite_stage, star_mixing, totalize
from dendrodyn.sigma import EMPTY, box, collapse_time, sigma_power
from dendrodyn.tree import Subtree, disjoint_family_bound, free_arcs
from helpers import random_point, random_tree, rotation3, swap, tent, tent_pair, three_fold, transitivity_corpus
from oracles import grid_periodic_sets, visits_everything


def record(name, ok, detail=""):
    ACCEPTANCE.append((name, bool(ok), detail))
    print(f"{name}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def test_criterion_1_collapse_box():
    start = time.perf_counter()
    count, bad = 0, []
    for w in box(4, 5):
        count += 1
        if sigma_power(w, collapse_time(w)) != EMPTY:
            bad.append(w)
    took = time.perf_counter() - start
    assert record("criterion 1", not bad and took < 10, f"{count} words, {len(bad)} failures, {took:.1f}s")


def test_criterion_2_endpoint_shadow():
    start = time.perf_counter()
    count, bad = 0, []
    for w in box(2, 4):
        m = collapse_time(w)
        for n in range(1, 4):
            count += 1
            if sigma_power(w * (n + 1), m) != w * n:
                bad.append((w, n))
    took = time.perf_counter() - start
    assert record("criterion 2", not bad and took < 5, f"{count} cases, {len(bad)} failures, {took:.2f}s")


def test_criterion_3_transitivity_oracle():
    corpus = transitivity_corpus()
    assert len(corpus) >= 10
    mismatch = [name for name, f in corpus if bool(is_transitive(f)) != visits_everything(f)]
    verdicts = {bool(is_transitive(f)) for _, f in corpus}
    assert record(
        "criterion 3",
        not mismatch and verdicts == {True, False},
        f"{len(corpus)} maps, mismatches: {mismatch or 'none'}",
    )


def test_criterion_4_totalization():
    f = tent_pair()
    details, ok = [], True
    for eps in (F(1, 2), F(1, 8)):
        g = totalize(f, eps).map
        d = sup_distance(g, f)
        ok &= classify(g).mixing and d < eps and all(g(p) == f(p) for p in f.partition)
        details.append(f"eps={eps} distance={d}")
    assert record("criterion 4", ok, ", ".join(details))


def test_criterion_5_star_mixing():
    start = time.perf_counter()
    ok, details = True, []
    for n in (1, 3, 5):
        g = star_mixing(n, F(1, 4)).map
        t = g.tree
        fixed = {o.base for o in periodic_orbits(enumerate_periodic(g, 1))}
        d = sup_distance(g, identity(t))
        ok &= {t.vertex(v) for v in t.vertices} <= fixed and classify(g).mixing and d < F(1, 4)
        details.append(f"n={n} distance={d}")
    took = time.perf_counter() - start
    ok &= took < 30
    assert record("criterion 5", ok, ", ".join(details) + f", {took:.1f}s")


def test_criterion_6_stage():
    # one construction step T1 -> T2 from the tent; a second step is feasible
    # but takes ~50 s because delta shrinks super-exponentially
    f1 = tent()
    state = StageState.initial(f1, 1)
    s2 = dendrite_stage(state, f1.tree.point("e", F(2, 5) + F(1, 10**5)), degree=3)
    f2, T2 = s2.map, s2.tree
    (orbit,) = s2.pinned
    pts = [T2.vertex(v) for v in orbit]
    is_orbit = all(f2(pts[i]) == pts[(i + 1) % len(pts)] for i in range(len(pts)))
    branch = all(T2.degree(v) == 3 for v in orbit)
    (rec,) = s2.history
    d = sup_distance(f2, f1, rec.embedding)
    ok = classify(f2).mixing and is_orbit and branch and d < rec.delta / 2
    assert record("criterion 6", ok, f"pinned {','.join(orbit)}, rho={d} < delta_1/2={rec.delta / 2}")


def test_criterion_7_density():
    start = time.perf_counter()
    certs = [density_certificate(f, F(1, 64), 12) for f in (tent(), three_fold())]
    took = time.perf_counter() - start
    ok = all(c.status == "certified" and c.period_reached <= 12 for c in certs) and took < 10
    detail = ", ".join(f"{name}: {c.status} at period {c.period_reached}" for name, c in zip(("tent", "three-fold"), certs))
    assert record("criterion 7", ok, f"{detail}, {took:.2f}s")


def test_criterion_8_decomposition():
    f = rotation3()
    D = terminal_decomposition(f)
    rep = verify_decomposition(f, D)
    primitive = all(primitivity_horizon(g) is not None for g in _power_pieces(f, D))
    ok = D.length == 3 and rep.ok and primitive
    assert record("criterion 8", ok, f"length {D.length}, checks {'pass' if rep.ok else rep.failures}")


TENT_DENOMS = sorted({2**n + s for n in range(1, 5) for s in (-1, 1)})


def test_criterion_9a_finite_sets_grid():
    f = tent()
    ok = True
    for N, card in ((2, 2), (3, 5), (4, 6)):
        got = {frozenset(f.tree.coordinate(x, "e") for x in A): p for A, p in finite_periodic_sets(f, N, card)}
        ok &= got == grid_periodic_sets(f, N, card, TENT_DENOMS)
    assert record("criterion 9a", ok, "finite_periodic_sets vs grid oracle on the tent")


def _two_flips():
    from helpers import interval_map

    xs = [0, F(1, 5), F(2, 5), F(3, 5), F(4, 5), 1]
    return interval_map(xs, [F(1, 5), F(2, 5), F(1, 5), F(4, 5), F(3, 5), F(4, 5)])


def test_criterion_9b_extraction_inside_arcs():
    ok, tested = True, 0
    for f in (tent(), three_fold(), rotation3(), _two_flips()):
        for r in almost_meshed_reduction(f, 6).arcs:
            tested += 1
            e = r.extraction
            ok &= e is not None and r.arc.interior_contains(e.point)
            ok &= e is not None and f.iterate(e.point, e.orbit.period) == e.point
            ok &= e is not None and minimal_period(f, e.point) == e.orbit.period
    f = _two_flips()
    t = f.tree
    (arc,) = free_arcs(t)
    A1, A2 = Subtree(t, [("e", F(1, 5), F(2, 5))]), Subtree(t, [("e", F(3, 5), F(4, 5))])
    e = extract_periodic_from_free_arc(f, arc, A1, A2, 1, 1)
    tested += 1
    ok &= arc.interior_contains(e.point) and f.iterate(e.point, e.orbit.period) == e.point
    assert record("criterion 9b", ok, f"{tested} free arcs, periodic point strictly inside each")


@pytest.mark.xfail(
    strict=True,
    reason="x -> 1-x has every point periodic (period <= 2); sparse periodicity cannot be reported truthfully",
)
def test_criterion_9c_swap_sparse():
    f = swap()
    rep = almost_meshed_reduction(f, 6)
    ok = not rep.dense
    record("criterion 9c", ok, "swap-isometry: " + rep.text(f).splitlines()[-1])
    assert ok


def test_criterion_10_disjoint_families():
    t = random_tree(2024, edges=20)
    rng = random.Random(7)
    worst = 0
    ok = True
    eps_values = (F(1, 2), F(1), F(2))
    bounds = {eps: disjoint_family_bound(t, eps)[0] for eps in eps_values}
    for k in range(100):
        eps = eps_values[k % 3]
        family = []
        for _ in range(80):
            S = Subtree.ball(t, random_point(t, rng), F(rng.randint(1, 12), 16))
            if not any(S.intersects(R) for R in family):
                family.append(S)
        big = sum(S.diameter() >= eps for S in family)
        worst = max(worst, big)
        ok &= big <= bounds[eps]
    detail = f"100 families, bounds {', '.join(f'N({e})={n}' for e, n in bounds.items())}, largest count {worst}"
    assert record("criterion 10", ok, detail)
