"""Piecewise-linear and Markov self-maps of metric trees.

A map is given by a finite partition ``P`` and the images of its points.
On each ``P``-basic interval ``[u, v]`` the map runs along the arc
``[f(u), f(v)]`` at constant speed, so everything stays exact.
"""
from __future__ import annotations

import bisect

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .tree import (
    Arc,
    Embedding,
    InvalidPoint,
    MetricTree,
    Subtree,
    TreePoint,
    as_fraction,
    bisect_piece,
    connected_components_minus,
    edge_pieces,
    sorted_points,
)


class MapError(ValueError):
    """Ill-posed map data."""


class RefinementDiverges(MapError):
    """A forward orbit never closes up, so no finite Markov partition absorbs it."""


class InvalidHomeomorphism(MapError):
    pass


MAX_ORBIT = 10_000


@dataclass(frozen=True)
class BasicInterval:
    index: int
    start: TreePoint
    end: TreePoint
    arc: Arc

    @property
    def length(self) -> Fraction:
        return self.arc.length

    def __repr__(self) -> str:
        return f"I{self.index}[{self.start!r},{self.end!r}]"


class PLMap:
    """Continuous map, linear (in arc length) on every ``P``-basic interval."""

    def __init__(self, tree: MetricTree, partition: Iterable[TreePoint], images: Mapping[TreePoint, TreePoint]):
        self.tree = tree
        self.partition: tuple[TreePoint, ...] = tuple(sorted_points((tree.validate(p) for p in partition), tree))
        pset = set(self.partition)
        missing = [tree.vertex(v) for v in tree.vertices if tree.degree(v) != 2 and tree.vertex(v) not in pset]
        if missing:
            raise MapError(f"partition misses endpoints/branch points {missing}")
        self.images: dict[TreePoint, TreePoint] = {}
        for p in self.partition:
            if p not in images:
                raise MapError(f"no image given for partition point {p!r}")
            self.images[p] = tree.validate(images[p])
        self.intervals: tuple[BasicInterval, ...] = self._basic_intervals()
        self.image_arcs: tuple[Arc, ...] = tuple(
            tree.path(self.images[J.start], self.images[J.end]) for J in self.intervals
        )
        self._pieces = edge_pieces(tree, self.partition)
        self._piece_owner: dict[tuple[str, int], int] = {}
        for J in self.intervals:
            for eid, a, b in J.arc.segments:
                offs = self._pieces[eid]
                lo, hi = min(a, b), max(a, b)
                i = bisect.bisect_left(offs, lo)
                while offs[i] < hi:
                    self._piece_owner[(eid, i)] = J.index
                    i += 1

    def _basic_intervals(self) -> tuple[BasicInterval, ...]:
        out = []
        if not self.tree.edges:
            return ()
        for region in connected_components_minus(self.tree, self.partition):
            if len(region.boundary) != 2:
                raise MapError(f"component {region.segments} is not an open arc between two partition points")
            a, b = region.boundary
            out.append((a, b, self.tree.path(a, b)))
        out.sort(key=lambda r: (self.tree.key(r[0]), self.tree.key(r[1])))
        return tuple(BasicInterval(i, a, b, arc) for i, (a, b, arc) in enumerate(out))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(|P|={len(self.partition)}, {len(self.intervals)} intervals)"

    # -- evaluation ----------------------------------------------------

    def interval_of(self, x: TreePoint) -> int:
        """Index of a basic interval containing ``x`` (the first one, for partition points)."""
        for eid, off in self.tree.locate(x):
            offs = self._pieces[eid]
            i = bisect_piece(offs, off)
            return self._piece_owner[(eid, i)]
        raise InvalidPoint(f"{x!r} is on no edge")

    def intervals_at(self, x: TreePoint) -> list[int]:
        """All basic intervals containing ``x``."""
        out = set()
        for eid, off in self.tree.locate(x):
            offs = self._pieces[eid]
            i = bisect_piece(offs, off)
            out.add(self._piece_owner[(eid, i)])
            if offs[i] == off and i > 0:
                out.add(self._piece_owner[(eid, i - 1)])
            if i + 1 < len(offs) - 1 and offs[i + 1] == off:
                out.add(self._piece_owner[(eid, i + 1)])
        return sorted(out)

    def slope(self, i: int) -> Fraction:
        return self.image_arcs[i].length / self.intervals[i].length

    def eval_on(self, i: int, x: TreePoint) -> TreePoint:
        J = self.intervals[i]
        t = J.arc.position(x)
        if t is None:
            raise InvalidPoint(f"{x!r} not in {J!r}")
        arc = self.image_arcs[i]
        return arc.point_at(arc.length * t / J.length)

    def __call__(self, x: TreePoint) -> TreePoint:
        img = self.images.get(x)
        if img is not None:
            return img
        self.tree.validate(x)
        return self.eval_on(self.interval_of(x), x)

    eval = __call__

    def iterate(self, x: TreePoint, n: int) -> TreePoint:
        if n < 0:
            raise ValueError("n must be >= 0")
        for _ in range(n):
            x = self(x)
        return x

    def image_of(self, S: Subtree) -> Subtree:
        """Exact image of a closed set (segments and points)."""
        segs, pts = [], [self(p) for p in S.points]
        for eid, lo, hi in S.segments:
            offs = self._pieces[eid]
            cuts = [lo] + [o for o in offs if lo < o < hi] + [hi]
            for a, b in zip(cuts, cuts[1:]):
                pa, pb = self.tree.point(eid, a), self.tree.point(eid, b)
                i = self._piece_owner[(eid, bisect_piece(offs, (a + b) / 2))]
                arc = self.tree.path(self.eval_on(i, pa), self.eval_on(i, pb))
                segs.extend(arc.segments)
                pts.append(arc.start)
        return Subtree(self.tree, segs, pts)

    def inverse_points(self, y: TreePoint) -> tuple[list[TreePoint], list[int]]:
        """Preimages of ``y``: isolated points, and indices of intervals sent entirely to ``y``."""
        pts, flat = set(), []
        for J, arc in zip(self.intervals, self.image_arcs):
            if arc.is_degenerate:
                if arc.start == y:
                    flat.append(J.index)
                continue
            s = arc.position(y)
            if s is not None:
                pts.add(J.arc.point_at(J.length * s / arc.length))
        return sorted_points(pts, self.tree), flat


class MarkovMap(PLMap):
    """A ``P``-Markov, ``P``-linear tree map: ``f(P) ⊆ P``."""

    def __init__(self, tree, partition, images):
        super().__init__(tree, partition, images)
        pset = set(self.partition)
        bad = [p for p, q in self.images.items() if q not in pset]
        if bad:
            raise MapError(f"images of {bad} are not partition points")

    def refine(self, extra: Iterable[TreePoint]) -> "MarkovMap":
        """Same map, with the forward orbits of ``extra`` added to the partition."""
        pts = set(self.partition)
        images = dict(self.images)
        for x in extra:
            self.tree.validate(x)
            seen: dict[TreePoint, None] = {}
            while x not in pts and x not in seen:
                if len(seen) >= MAX_ORBIT:
                    raise RefinementDiverges(f"orbit of {next(iter(seen))!r} does not close up")
                seen[x] = None
                x = self(x)
            for p in seen:
                pts.add(p)
                images[p] = self(p)
        if len(pts) == len(self.partition):
            return self
        return MarkovMap(self.tree, pts, images)

    def preimage_closure(self, levels: int) -> list[TreePoint]:
        """``Q_levels`` with ``Q_1 = P`` and ``Q_{k+1} = P ∪ f^{-1}(Q_k)``."""
        current = set(self.partition)
        for _ in range(levels - 1):
            nxt = set(self.partition)
            for y in current:
                nxt.update(self.inverse_points(y)[0])
            current = nxt
        return sorted_points(current, self.tree)

    def power(self, n: int) -> "MarkovMap":
        """``f^n`` as a Markov map on the pulled-back partition."""
        if n < 1:
            raise ValueError("power needs n >= 1")
        if n == 1:
            return self
        pts = self.preimage_closure(n)
        return MarkovMap(self.tree, pts, {p: self.iterate(p, n) for p in pts})

    def transport(self, emb: Embedding, extra: Mapping[TreePoint, TreePoint] = ()) -> "MarkovMap":
        """Copy onto ``emb.target``; ``extra`` gives images for new partition points."""
        pts = [emb(p) for p in self.partition]
        images = {emb(p): emb(q) for p, q in self.images.items()}
        images.update(dict(extra))
        pts.extend(dict(extra))
        return MarkovMap(emb.target, pts, images)


def build(tree: MetricTree, partition, images) -> MarkovMap:
    return MarkovMap(tree, partition, images)


def eval_map(f: PLMap, x: TreePoint) -> TreePoint:
    return f(x)


def iterate(f: PLMap, x: TreePoint, n: int) -> TreePoint:
    return f.iterate(x, n)


def refine(f: MarkovMap, extra) -> MarkovMap:
    return f.refine(extra)


def sup_distance(f: PLMap, g: PLMap, embedding: Embedding | None = None) -> Fraction:
    """``sup_x d(f(x), g(x))``, exact.

    Along common refinement pieces both maps trace geodesics at constant
    speed, and distance between such paths in a tree is convex, so the sup
    is attained on the finite candidate set of breakpoints.

    With ``embedding``, ``g`` lives on ``embedding.source`` and the sup runs
    over that subtree of ``f``'s tree.
    """
    if embedding is None:
        if f.tree != g.tree:
            raise MapError("maps live on different trees")
        cand = set(f.partition) | set(g.partition)
        return max(f.tree.distance(f(x), g(x)) for x in cand)
    if embedding.target != f.tree or embedding.source != g.tree:
        raise MapError("embedding does not match the maps")
    cand = {embedding(p) for p in g.partition}
    cand |= {embedding(g.tree.vertex(v)) for v in g.tree.vertices}
    cand |= {p for p in f.partition if embedding.back(p) is not None}
    return max(f.tree.distance(f(x), embedding(g(embedding.back(x)))) for x in cand)


def identity(tree: MetricTree, partition=None) -> MarkovMap:
    pts = partition or [tree.vertex(v) for v in tree.vertices]
    return MarkovMap(tree, pts, {p: p for p in pts})


def homeomorphism(tree: MetricTree, partition, images) -> PLMap:
    """A piecewise-linear homeomorphism; bijectivity is checked exactly."""
    g = PLMap(tree, partition, images)
    if len(set(g.images.values())) != len(g.partition):
        raise InvalidHomeomorphism("not injective on breakpoints")
    pieces = []
    total = Fraction(0)
    for arc in g.image_arcs:
        if arc.is_degenerate:
            raise InvalidHomeomorphism("collapses a basic interval")
        pieces.extend(arc.segments)
        total += arc.length
    covered = Subtree(tree, pieces).length
    if covered != total or total != tree.total_length:
        raise InvalidHomeomorphism("basic interval images overlap or miss part of the tree")
    return g


def inverse(g: PLMap) -> PLMap:
    return PLMap(g.tree, list(g.images.values()), {q: p for p, q in g.images.items()})


def conjugate(f: MarkovMap, g: PLMap) -> MarkovMap:
    """``g ∘ f ∘ g⁻¹``.

    ``f`` is first refined by ``g``'s breakpoints ``P'`` and then by
    ``f^{-1}(P')``, so that ``f`` sends every piece into a single interval
    on which ``g`` is linear; the result is Markov and linear on the image
    of that partition under ``g``.
    """
    if f.tree != g.tree:
        raise MapError("conjugacy must act on the same tree")
    homeomorphism(g.tree, g.partition, g.images)
    fr = f.refine(g.partition)
    pulled = set(fr.partition)
    for y in g.partition:
        pulled.update(fr.inverse_points(y)[0])
    fr = fr.refine(pulled)
    pts = [g(p) for p in fr.partition]
    return MarkovMap(f.tree, pts, {g(p): g(fr(p)) for p in fr.partition})
