"""The induced map on closed subsets, and periodic points extracted from
periodic hyperspace elements sitting inside a free arc.

Elements are either finite point sets (``frozenset`` of points) or connected
:class:`Subtree` objects.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Union

from .markov import MarkovMap
from .periodic import (
    PeriodicOrbit,
    _orbit,
    _rebase,
    enumerate_periodic,
    minimal_period,
    periodic_arcs,
    periodic_orbits,
)
from .tree import Arc, Subtree, TreeError, TreePoint, free_arcs, point_label, sorted_points

HyperElement = Union[frozenset, Subtree]

MAX_SUBSET_INTERVALS = 16


class HyperspaceError(ValueError):
    pass


def is_finite(A: HyperElement) -> bool:
    return isinstance(A, frozenset) or A.is_finite


def induced_image(f: MarkovMap, A: HyperElement) -> HyperElement:
    if isinstance(A, (frozenset, set, list, tuple)):
        return frozenset(f(x) for x in A)
    img = f.image_of(A)
    if A.is_connected() and not img.is_connected():
        raise AssertionError("image of a connected set came out disconnected")
    return img


def induced_iterate(f: MarkovMap, A: HyperElement, n: int) -> HyperElement:
    for _ in range(n):
        A = induced_image(f, A)
    return A


def finite_periodic_sets(f: MarkovMap, max_period: int, max_cardinality: int) -> list[tuple[frozenset, int]]:
    """Finite ``A`` with ``f^n(A) = A``: unions of periodic orbits.

    Each pair is ``(A, p)`` with ``p`` the lcm of the orbit periods, the
    least ``n`` for which ``f^n`` fixes ``A`` pointwise (as a set, ``f``
    already maps ``A`` onto itself).  Arcs of periodic points are skipped: they carry
    infinitely many such sets.
    """
    orbits = [o for o in periodic_orbits(enumerate_periodic(f, max_period)) if o.period <= max_cardinality]
    out = []
    for r in range(1, len(orbits) + 1):
        for combo in itertools.combinations(orbits, r):
            size = sum(o.period for o in combo)
            if size > max_cardinality:
                continue
            p = lcm(*(o.period for o in combo))
            if p <= max_period:
                out.append((frozenset(x for o in combo for x in o.points), p))
    out.sort(key=lambda item: (item[1], len(item[0]), [f.tree.key(x) for x in sorted_points(item[0], f.tree)]))
    return out


def invariant_subtrees(f: MarkovMap) -> list[Subtree]:
    """Connected closed sets ``S`` with ``f(S) = S`` that are unions of basic
    intervals, plus the isolated fixed points.  When ``f`` is onto, the whole tree
    comes first.
    """
    n = len(f.intervals)
    if n > MAX_SUBSET_INTERVALS:
        raise HyperspaceError(f"subset search limited to {MAX_SUBSET_INTERVALS} basic intervals")
    found = []
    for mask in range((1 << n) - 1, 0, -1):
        members = [i for i in range(n) if mask >> i & 1]
        S = Subtree(f.tree, [s for i in members for s in f.intervals[i].arc.segments])
        if S.is_connected() and f.image_of(S) == S:
            found.append(S)
    for o in periodic_orbits(enumerate_periodic(f, 1)):
        found.append(Subtree.from_points(f.tree, [o.base]))
    return found


# -- periodic points from periodic elements inside a free arc ------------------


@dataclass(frozen=True)
class Extraction:
    orbit: PeriodicOrbit
    via: str  # "finite" | "case3" | "case4" | "case5" | "case6"

    @property
    def point(self) -> TreePoint:
        return self.orbit.base


def _check_free(f: MarkovMap, arc: Arc) -> None:
    if arc.is_degenerate:
        raise HyperspaceError("a free arc needs distinct endpoints")
    t = f.tree
    for eid, a, b in arc.segments:
        for off in (a, b):
            x = t.point(eid, off)
            if x not in (arc.start, arc.end) and t.order(x) != 2:
                raise HyperspaceError(f"{x!r} is a branch point inside the arc")


class _ArcCoords:
    """Positions along a fixed arc."""

    def __init__(self, f: MarkovMap, arc: Arc):
        self.f, self.arc = f, arc

    def pos(self, x: TreePoint) -> Fraction:
        p = self.arc.position(x)
        if p is None:
            raise HyperspaceError(f"{x!r} is not on the arc")
        return p

    def at(self, s: Fraction) -> TreePoint:
        return self.arc.point_at(s)

    def span(self, A: HyperElement) -> tuple[Fraction, Fraction]:
        pts = A if isinstance(A, frozenset) else A.extreme_points()
        ps = [self.pos(x) for x in pts]
        return min(ps), max(ps)


def _preimage_ranges(g: MarkovMap, co: _ArcCoords, y: TreePoint, lo: Fraction, hi: Fraction):
    """``g^{-1}(y) ∩ [lo, hi]`` as sorted position ranges along the arc."""
    out = set()
    pts, _ = g.inverse_points(y)
    for x in pts:
        p = co.arc.position(x)
        if p is not None and lo <= p <= hi:
            out.add((p, p))
    stops = sorted({lo, hi} | {p for p in (co.arc.position(q) for q in g.partition) if p is not None and lo < p < hi})
    for s, t in zip(stops, stops[1:]):
        if all(g(co.at(u)) == y for u in (s, t, (s + t) / 2)):
            out.add((s, t))
    return sorted(out)


def _min_in(ranges, lo, hi):
    vals = [max(a, lo) for a, b in ranges if b >= lo and a <= hi]
    return min(vals) if vals else None


def _max_in(ranges, lo, hi):
    vals = [min(b, hi) for a, b in ranges if b >= lo and a <= hi]
    return max(vals) if vals else None


def _claim_points(g: MarkovMap, co: _ArcCoords, c: Fraction, d: Fraction) -> tuple[Fraction, Fraction]:
    """``c', d'`` in ``[c, d]`` with ``g(c') = c``, ``g(d') = d`` and no
    preimage of ``{c, d}`` strictly between them."""
    pc = _preimage_ranges(g, co, co.at(c), c, d)
    pd = _preimage_ranges(g, co, co.at(d), c, d)
    x, y = _max_in(pc, c, d), _min_in(pd, c, d)
    if x is None or y is None:
        raise HyperspaceError("the power map does not cover the element's hull")
    if x < y:
        return x, y
    c1 = _min_in(pc, y, x)
    d1 = _max_in(pd, y, c1)
    return c1, d1


def _fixed_point(g: MarkovMap, co: _ArcCoords, u: Fraction, v: Fraction) -> Fraction | None:
    """Leftmost fixed point of ``g`` on the arc positions ``[u, v]``, by exact linear solves."""
    lo, hi = min(u, v), max(u, v)
    stops = sorted({lo, hi} | {p for p in (co.arc.position(q) for q in g.partition) if p is not None and lo < p < hi})

    def h(s):
        p = co.arc.position(g(co.at(s)))
        return None if p is None else p - s

    vals = [h(s) for s in stops]
    for k, s in enumerate(stops):
        if vals[k] == 0:
            return s
        if k + 1 < len(stops) and vals[k] is not None and vals[k + 1] is not None and vals[k] * vals[k + 1] < 0:
            t = stops[k + 1]
            return s + (t - s) * vals[k] / (vals[k] - vals[k + 1])
    return None


def _onto_hull(g: MarkovMap, co: _ArcCoords, c1: Fraction, d1: Fraction, c: Fraction, d: Fraction) -> bool:
    img = g.image_of(Subtree.from_arc(co.arc.tree.path(co.at(min(c1, d1)), co.at(max(c1, d1)))))
    hull = Subtree.from_arc(co.arc.tree.path(co.at(c), co.at(d)))
    return img == hull


def _validate_element(f: MarkovMap, co: _ArcCoords, A: HyperElement, n: int, name: str):
    if isinstance(A, (set, list, tuple)):
        A = frozenset(A)
    if isinstance(A, Subtree) and A.is_finite:
        A = frozenset(A.points)
    if isinstance(A, frozenset):
        if not A:
            raise HyperspaceError(f"{name} is empty")
    elif not A.is_connected():
        raise HyperspaceError(f"{name} must be finite or connected")
    if induced_iterate(f, A, n) != A:
        raise HyperspaceError(f"{name} is not invariant under the {n}-th induced iterate")
    lo, hi = co.span(A)
    if isinstance(A, Subtree):
        for eid, a, b in A.segments:
            for off in (a, b, (a + b) / 2):
                co.pos(f.tree.point(eid, off))
    if lo <= 0 or hi >= co.arc.length:
        raise HyperspaceError(f"{name} is not inside the open arc")
    return A, lo, hi


def _orbit_at(f: MarkovMap, x: TreePoint) -> PeriodicOrbit:
    # based at x itself, so the reported point is the one found inside the arc
    return _rebase(_orbit(f, x, minimal_period(f, x)), x)


def extract_periodic_from_free_arc(
    f: MarkovMap, arc: Arc, A1: HyperElement, A2: HyperElement, n1: int, n2: int
) -> Extraction:
    """A periodic point strictly inside the free arc ``arc``.

    ``A1`` and ``A2`` are periodic elements of the induced map lying inside
    the open arc with ``A1`` strictly before ``A2`` in the arc's order.
    """
    _check_free(f, arc)
    if n1 < 1 or n2 < 1:
        raise HyperspaceError("periods must be positive")
    co = _ArcCoords(f, arc)
    A1, c1, d1 = _validate_element(f, co, A1, n1, "A1")
    A2, c2, d2 = _validate_element(f, co, A2, n2, "A2")
    if not d1 < c2:
        raise HyperspaceError("A1 must lie strictly before A2 along the arc")
    for A in (A1, A2):
        if isinstance(A, frozenset):
            x = sorted_points(A, f.tree)[0]
            return Extraction(_orbit_at(f, x), "finite")
    n = lcm(n1, n2)
    g = f.power(n)
    claims = []
    for (c, d), label in (((c1, d1), "case3"), ((c2, d2), "case5")):
        cp, dp = _claim_points(g, co, c, d)
        claims.append((cp, dp))
        if _onto_hull(g, co, cp, dp, c, d):
            s = _fixed_point(g, co, cp, dp)
            if s is None:
                raise AssertionError("no sign change on an arc mapped onto its hull")
            x = co.at(s)
            return Extraction(_orbit_at(f, x), label)
    # Both images leave the open hulls.  Unreachable on trees, where a
    # connected set through c and d contains [c, d]; kept for completeness.
    g2 = f.power(2 * n)
    (cp1, dp1), _ = claims
    s = _fixed_point(g2, co, cp1, dp1)
    if s is None:
        raise HyperspaceError("crossing construction found no fixed point")
    x = co.at(s)
    return Extraction(_orbit_at(f, x), "case4")


# -- almost meshed reduction ---------------------------------------------------


@dataclass(frozen=True)
class ArcReport:
    index: int
    arc: Arc
    extraction: Extraction | None
    note: str = ""

    def line(self, f: MarkovMap) -> str:
        if self.extraction is None:
            return f"arc {self.index}: no periodic point found{self.note}"
        e = self.extraction
        return f"arc {self.index}: periodic point {point_label(f.tree, e.point)} period {e.orbit.period} via {e.via}"


@dataclass(frozen=True)
class MeshReport:
    arcs: tuple[ArcReport, ...]
    max_period: int

    @property
    def dense(self) -> bool:
        return all(r.extraction is not None for r in self.arcs)

    def text(self, f: MarkovMap) -> str:
        lines = [r.line(f) for r in self.arcs]
        verdict = "every free arc meets Per(f)" if self.dense else "sparse: some free arc misses Per(f)"
        lines.append(f"periodic density: {verdict} (period <= {self.max_period})")
        return "\n".join(lines) + "\n"


def _elements_inside(f: MarkovMap, co: _ArcCoords, max_period: int):
    """Periodic elements inside the open arc, as ``(A, n, lo, hi)``."""
    items = enumerate_periodic(f, max_period)
    out = []
    for o in periodic_orbits(items):
        for x in o.points:
            p = co.arc.position(x)
            if p is not None and 0 < p < co.arc.length:
                out.append((frozenset([x]), o.period, p, p))
    for a in periodic_arcs(items):
        for k in range(a.period):
            u, v = a.endpoints(f, k)
            piece = co.arc.tree.path(u, v)
            for frac in (Fraction(1, 3), Fraction(2, 3)):
                x = piece.point_at(piece.length * frac)
                p = co.arc.position(x)
                if p is not None and 0 < p < co.arc.length:
                    out.append((frozenset([x]), a.period, p, p))
    out.sort(key=lambda e: (e[1], e[2]))
    return out


def almost_meshed_reduction(f: MarkovMap, max_period: int = 6) -> MeshReport:
    """Per maximal free arc, a periodic point extracted from two periodic
    elements of the induced map, or a note that none were found."""
    reports = []
    for idx, arc in enumerate(free_arcs(f.tree)):
        co = _ArcCoords(f, arc)
        elems = _elements_inside(f, co, max_period)
        pair = next(
            ((a, b) if a[3] < b[2] else (b, a) for a, b in itertools.combinations(elems, 2) if a[3] < b[2] or b[3] < a[2]),
            None,
        )
        if pair is None:
            reports.append(ArcReport(idx, arc, None, f" up to period {max_period}"))
            continue
        (A1, n1, _, _), (A2, n2, _, _) = pair
        try:
            ex = extract_periodic_from_free_arc(f, arc, A1, A2, n1, n2)
        except (HyperspaceError, TreeError) as err:
            reports.append(ArcReport(idx, arc, None, f" ({err})"))
            continue
        reports.append(ArcReport(idx, arc, ex))
    return MeshReport(tuple(reports), max_period)
