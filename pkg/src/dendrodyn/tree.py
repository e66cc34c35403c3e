"""Finite metric trees with exact rational edge lengths.

Points live either at a vertex or strictly inside an edge; distances are
taxicab distances along the unique arc joining two points.
"""
from __future__ import annotations

import bisect
import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator


class TreeError(ValueError):
    """Structural problem with a tree or subtree."""


class InvalidPoint(TreeError):
    """A point does not lie on the tree."""


def as_fraction(value) -> Fraction:
    """Exact conversion of ints, Fractions and ``"p/q"`` strings.

    Floats are refused: every quantity in this package is exact.
    """
    if isinstance(value, float):
        raise TypeError(f"refusing inexact value {value!r}; use Fraction or 'p/q'")
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


@dataclass(frozen=True)
class TreePoint:
    """A location on a tree.

    Canonical form: a point at offset 0 or at the full length of an edge is
    always stored as the corresponding vertex, so ``==`` and ``hash`` agree
    with geometric equality.  Build points through :meth:`MetricTree.point`.
    """

    vertex: str | None = None
    edge: str | None = None
    offset: Fraction | None = None

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    @property
    def sort_key(self) -> tuple:
        if self.vertex is not None:
            return (self.vertex, Fraction(-1))
        return (self.edge, self.offset)

    def __repr__(self) -> str:
        if self.vertex is not None:
            return f"<{self.vertex}>"
        return f"<{self.edge}:{self.offset}>"


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    length: Fraction


def sorted_points(points: Iterable[TreePoint], tree: "MetricTree | None" = None) -> list[TreePoint]:
    """Deterministic order; geometric ``(edge, offset)`` order when ``tree`` is given."""
    key = tree.key if tree is not None else (lambda p: p.sort_key)
    return sorted(set(points), key=key)


@dataclass(frozen=True)
class Arc:
    """The unique arc from ``start`` to ``end``.

    ``segments`` lists ``(edge, from_offset, to_offset)`` in travel order;
    a degenerate arc (``start == end``) has no segments.
    """

    tree: "MetricTree" = field(repr=False, compare=False)
    start: TreePoint
    end: TreePoint
    segments: tuple = ()

    @property
    def length(self) -> Fraction:
        return sum((abs(b - a) for _, a, b in self.segments), Fraction(0))

    @property
    def is_degenerate(self) -> bool:
        return not self.segments

    def point_at(self, s) -> TreePoint:
        """Point at arc-length ``s`` from ``start``."""
        s = as_fraction(s)
        if s < 0 or s > self.length:
            raise InvalidPoint(f"arc parameter {s} outside [0, {self.length}]")
        if s == 0:
            return self.start
        for edge, a, b in self.segments:
            span = abs(b - a)
            if s <= span:
                off = a + s if b >= a else a - s
                return self.tree.point(edge, off)
            s -= span
        return self.end

    def position(self, x: TreePoint) -> Fraction | None:
        """Arc-length of ``x`` from ``start``, or ``None`` if ``x`` is off the arc."""
        if x == self.start:
            return Fraction(0)
        done = Fraction(0)
        for edge, a, b in self.segments:
            lo, hi = min(a, b), max(a, b)
            for e, off in self.tree.locate(x):
                if e == edge and lo <= off <= hi:
                    return done + abs(off - a)
            done += abs(b - a)
        return None

    def contains(self, x: TreePoint) -> bool:
        return self.position(x) is not None

    def interior_contains(self, x: TreePoint) -> bool:
        pos = self.position(x)
        return pos is not None and 0 < pos < self.length

    def reversed(self) -> "Arc":
        segs = tuple((e, b, a) for e, a, b in reversed(self.segments))
        return Arc(self.tree, self.end, self.start, segs)


class MetricTree:
    """A finite tree whose edges carry positive rational lengths.

    Each edge has a fixed orientation ``tail -> head``; offsets along an edge
    are measured from its tail.
    """

    def __init__(self, vertices: Iterable[str], edges: Iterable[tuple], name: str = "T"):
        self.name = name
        self.vertices: tuple[str, ...] = tuple(sorted(set(vertices)))
        if not self.vertices:
            raise TreeError("a tree needs at least one vertex")
        self.edges: dict[str, Edge] = {}
        for eid, tail, head, length in edges:
            length = as_fraction(length)
            if eid in self.edges:
                raise TreeError(f"duplicate edge id {eid!r}")
            if tail not in self.vertices or head not in self.vertices:
                raise TreeError(f"edge {eid!r} joins unknown vertices")
            if tail == head:
                raise TreeError(f"edge {eid!r} is a loop")
            if length <= 0:
                raise TreeError(f"edge {eid!r} has non-positive length {length}")
            self.edges[eid] = Edge(eid, tail, head, length)
        self.edges = dict(sorted(self.edges.items()))
        self.adjacency: dict[str, list[tuple[str, str]]] = {v: [] for v in self.vertices}
        for e in self.edges.values():
            self.adjacency[e.tail].append((e.id, e.head))
            self.adjacency[e.head].append((e.id, e.tail))
        for v in self.adjacency:
            self.adjacency[v].sort()
        if len(self.edges) != len(self.vertices) - 1 or not self._connected():
            raise TreeError("graph is not a tree (must be connected and acyclic)")
        self._bfs_cache: dict[str, tuple[dict, dict]] = {}

    def _connected(self) -> bool:
        seen = {self.vertices[0]}
        todo = [self.vertices[0]]
        while todo:
            v = todo.pop()
            for _, w in self.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) == len(self.vertices)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MetricTree):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.vertices, tuple(self.edges.values())))

    def __repr__(self) -> str:
        return f"MetricTree({self.name!r}, {len(self.vertices)} vertices, {len(self.edges)} edges)"

    # -- combinatorics -------------------------------------------------

    def degree(self, v: str) -> int:
        return len(self.adjacency[v])

    @property
    def endpoints(self) -> list[str]:
        return [v for v in self.vertices if self.degree(v) <= 1]

    @property
    def branch_points(self) -> list[str]:
        return [v for v in self.vertices if self.degree(v) >= 3]

    @property
    def total_length(self) -> Fraction:
        return sum((e.length for e in self.edges.values()), Fraction(0))

    # -- points --------------------------------------------------------

    def vertex(self, v: str) -> TreePoint:
        if v not in self.adjacency:
            raise InvalidPoint(f"unknown vertex {v!r}")
        return TreePoint(vertex=v)

    def point(self, edge: str, offset) -> TreePoint:
        """Canonical point at ``offset`` from the tail of ``edge``."""
        if edge not in self.edges:
            raise InvalidPoint(f"unknown edge {edge!r}")
        e = self.edges[edge]
        offset = as_fraction(offset)
        if offset < 0 or offset > e.length:
            raise InvalidPoint(f"offset {offset} outside edge {edge!r} of length {e.length}")
        if offset == 0:
            return TreePoint(vertex=e.tail)
        if offset == e.length:
            return TreePoint(vertex=e.head)
        return TreePoint(edge=edge, offset=offset)

    def validate(self, x: TreePoint) -> TreePoint:
        if x.vertex is not None:
            if x.vertex not in self.adjacency:
                raise InvalidPoint(f"vertex {x.vertex!r} is not on {self.name}")
        else:
            e = self.edges.get(x.edge)
            if e is None or not (0 < x.offset < e.length):
                raise InvalidPoint(f"{x!r} is not a canonical point of {self.name}")
        return x

    def locate(self, x: TreePoint) -> list[tuple[str, Fraction]]:
        """All ``(edge, offset)`` descriptions of ``x``."""
        if x.vertex is not None:
            out = []
            for eid, _ in self.adjacency.get(x.vertex, ()):
                e = self.edges[eid]
                out.append((eid, Fraction(0) if e.tail == x.vertex else e.length))
            return out
        return [(x.edge, x.offset)]

    def key(self, x: TreePoint) -> tuple:
        """Sort key ``(edge, offset)``; a vertex uses its smallest description."""
        if x.vertex is not None:
            locs = self.locate(x)
            return min(locs) if locs else (x.vertex, Fraction(-1))
        return (x.edge, x.offset)

    def coordinate(self, x: TreePoint, edge: str) -> Fraction:
        """Offset of ``x`` along ``edge``; raises if ``x`` is not on that edge."""
        for e, off in self.locate(x):
            if e == edge:
                return off
        raise InvalidPoint(f"{x!r} is not on edge {edge!r}")

    def order(self, x: TreePoint) -> int:
        """Order of a point: vertex degree, or 2 inside an edge."""
        self.validate(x)
        return self.degree(x.vertex) if x.vertex is not None else 2

    def classify_point(self, x: TreePoint) -> tuple[str, int]:
        k = self.order(x)
        if k <= 1:
            return ("endpoint", k)
        if k == 2:
            return ("cut point", 2)
        return ("branch point", k)

    # -- metric --------------------------------------------------------

    def _bfs(self, root: str) -> tuple[dict, dict]:
        cached = self._bfs_cache.get(root)
        if cached is None:
            dist = {root: Fraction(0)}
            parent = {root: None}
            todo = deque([root])
            while todo:
                v = todo.popleft()
                for eid, w in self.adjacency[v]:
                    if w not in dist:
                        dist[w] = dist[v] + self.edges[eid].length
                        parent[w] = (v, eid)
                        todo.append(w)
            cached = self._bfs_cache[root] = (dist, parent)
        return cached

    def _anchors(self, x: TreePoint) -> list[tuple[str, Fraction, tuple | None]]:
        # (vertex, distance to it, segment leading from x to it)
        self.validate(x)
        if x.vertex is not None:
            return [(x.vertex, Fraction(0), None)]
        e = self.edges[x.edge]
        return [
            (e.tail, x.offset, (e.id, x.offset, Fraction(0))),
            (e.head, e.length - x.offset, (e.id, x.offset, e.length)),
        ]

    def _shared_edge(self, a: TreePoint, b: TreePoint):
        la = dict(self.locate(a))
        for e, ob in self.locate(b):
            if e in la and (a.vertex is None or b.vertex is None or la[e] != ob):
                return e, la[e], ob
        return None

    def distance(self, a: TreePoint, b: TreePoint) -> Fraction:
        if a == b:
            return Fraction(0)
        shared = self._shared_edge(a, b)
        if shared is not None:
            return abs(shared[2] - shared[1])
        best = None
        for u, du, _ in self._anchors(a):
            dist, _ = self._bfs(u)
            for v, dv, _ in self._anchors(b):
                d = du + dist[v] + dv
                if best is None or d < best:
                    best = d
        return best

    def path(self, a: TreePoint, b: TreePoint) -> Arc:
        """The unique arc ``[a, b]``; its length is ``distance(a, b)``."""
        self.validate(a)
        self.validate(b)
        if a == b:
            return Arc(self, a, b, ())
        shared = self._shared_edge(a, b)
        if shared is not None:
            return Arc(self, a, b, (shared,))
        best = None
        for u, du, sa in self._anchors(a):
            dist, _ = self._bfs(u)
            for v, dv, sb in self._anchors(b):
                d = du + dist[v] + dv
                if best is None or d < best[0]:
                    best = (d, u, sa, v, sb)
        _, u, sa, v, sb = best
        segs = [] if sa is None else [sa]
        segs.extend(self._vertex_segments(u, v))
        if sb is not None:
            eid, off, end = sb
            segs.append((eid, end, off))
        return Arc(self, a, b, tuple(segs))

    def _vertex_segments(self, u: str, v: str) -> list[tuple]:
        _, parent = self._bfs(u)
        chain = []
        w = v
        while parent[w] is not None:
            prev, eid = parent[w]
            e = self.edges[eid]
            if e.tail == prev:
                chain.append((eid, Fraction(0), e.length))
            else:
                chain.append((eid, e.length, Fraction(0)))
            w = prev
        chain.reverse()
        return chain

    def all_points(self, points: Iterable[TreePoint]) -> Iterator[TreePoint]:
        for p in points:
            yield self.validate(p)

    # -- surgery -------------------------------------------------------

    def subdivide(self, points: Iterable[TreePoint], names: Iterable[str] | None = None):
        """Make edge-interior ``points`` into vertices.

        Returns ``(new_tree, embedding)``.  Split edges keep their id for the
        piece next to the tail; later pieces are named ``<id>~1``, ``<id>~2``...
        (skipping ids already in use).
        """
        pts = [p for p in sorted_points(points, self) if p.vertex is None]
        for p in pts:
            self.validate(p)
        names = iter(names) if names is not None else None
        fresh = _fresh_names(self.vertices, "v")
        cuts: dict[str, list[tuple[Fraction, str]]] = {}
        new_names = {}
        for p in pts:
            nm = next(names) if names is not None else next(fresh)
            new_names[p] = nm
            cuts.setdefault(p.edge, []).append((p.offset, nm))
        vertices = list(self.vertices) + list(new_names.values())
        edges = []
        taken = set(self.edges)
        chunks: dict[str, list[tuple[str, Fraction, Fraction]]] = {}
        for e in self.edges.values():
            stops = sorted(cuts.get(e.id, []))
            if not stops:
                edges.append((e.id, e.tail, e.head, e.length))
                chunks[e.id] = [(e.id, Fraction(0), e.length)]
                continue
            ends = [(Fraction(0), e.tail)] + stops + [(e.length, e.head)]
            chunks[e.id] = []
            for k, ((o1, v1), (o2, v2)) in enumerate(zip(ends, ends[1:])):
                nid = e.id if k == 0 else next(n for n in (f"{e.id}~{c}" for c in itertools.count(k)) if n not in taken)
                taken.add(nid)
                edges.append((nid, v1, v2, o2 - o1))
                chunks[e.id].append((nid, o1, o2))
        new = MetricTree(vertices, edges, self.name)
        return new, Embedding(self, new, chunks)

    def graft(self, new_edges: Iterable[tuple]):
        """Attach pendant edges ``(id, existing_vertex, new_vertex, length)``."""
        new_edges = list(new_edges)
        vertices = list(self.vertices) + [nv for _, _, nv, _ in new_edges]
        edges = [(e.id, e.tail, e.head, e.length) for e in self.edges.values()] + new_edges
        new = MetricTree(vertices, edges, self.name)
        chunks = {e.id: [(e.id, Fraction(0), e.length)] for e in self.edges.values()}
        return new, Embedding(self, new, chunks)


def _fresh_names(taken, prefix: str) -> Iterator[str]:
    taken = set(taken)
    for k in itertools.count():
        nm = f"{prefix}{k}"
        if nm not in taken:
            yield nm


class Embedding:
    """Isometric inclusion of one tree into a subdivided/enlarged copy."""

    def __init__(self, source: MetricTree, target: MetricTree, chunks: dict):
        self.source = source
        self.target = target
        self.chunks = chunks
        self._back = {}
        for old, parts in chunks.items():
            for nid, lo, hi in parts:
                self._back[nid] = (old, lo)

    def __call__(self, x: TreePoint) -> TreePoint:
        if x.vertex is not None:
            return self.target.vertex(x.vertex)
        for nid, lo, hi in self.chunks[x.edge]:
            if lo <= x.offset <= hi:
                return self.target.point(nid, x.offset - lo)
        raise InvalidPoint(f"{x!r} not on source tree")

    def back(self, y: TreePoint) -> TreePoint | None:
        """Preimage of ``y`` in the source tree, or ``None``."""
        if y.vertex is not None:
            if y.vertex in self.source.adjacency:
                return self.source.vertex(y.vertex)
            # a subdivision vertex sits inside an old edge
            for eid, off in self.target.locate(y):
                if eid in self._back:
                    old, lo = self._back[eid]
                    return self.source.point(old, lo + off)
            return None
        if y.edge not in self._back:
            return None
        old, lo = self._back[y.edge]
        return self.source.point(old, lo + y.offset)

    def compose(self, after: "Embedding") -> "Embedding":
        """``after ∘ self``: source of self into target of ``after``."""
        chunks = {}
        for old, parts in self.chunks.items():
            out = []
            for nid, lo, hi in parts:
                for nid2, lo2, hi2 in after.chunks[nid]:
                    out.append((nid2, lo + lo2, lo + hi2))
            chunks[old] = out
        return Embedding(self.source, after.target, chunks)


# ---------------------------------------------------------------------------
# Subtrees (closed unions of edge segments plus isolated points)


def _merge(intervals):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


class Subtree:
    """A closed subset of a tree: finitely many edge segments plus points.

    Most operations expect a connected set (a subtree proper); finite point
    sets are also representable.
    """

    def __init__(self, tree: MetricTree, segments=(), points=()):
        self.tree = tree
        per_edge: dict[str, list] = {}
        for eid, a, b in segments:
            a, b = as_fraction(a), as_fraction(b)
            lo, hi = min(a, b), max(a, b)
            if eid not in tree.edges or lo < 0 or hi > tree.edges[eid].length:
                raise InvalidPoint(f"segment ({eid}, {a}, {b}) not on tree")
            if lo < hi:
                per_edge.setdefault(eid, []).append((lo, hi))
            else:
                points = list(points) + [tree.point(eid, lo)]
        self.segments = tuple(
            (eid, lo, hi) for eid in sorted(per_edge) for lo, hi in _merge(per_edge[eid])
        )
        self._by_edge: dict[str, list] = {}
        for eid, lo, hi in self.segments:
            self._by_edge.setdefault(eid, []).append((lo, hi))
        self.points = frozenset(
            p for p in (tree.validate(q) for q in points) if not self._on_segments(p)
        )

    # constructors
    @classmethod
    def whole(cls, tree: MetricTree) -> "Subtree":
        return cls(tree, [(e.id, 0, e.length) for e in tree.edges.values()], [tree.vertex(tree.vertices[0])])

    @classmethod
    def from_arc(cls, arc: Arc) -> "Subtree":
        return cls(arc.tree, arc.segments, [arc.start])

    @classmethod
    def from_points(cls, tree: MetricTree, points) -> "Subtree":
        return cls(tree, (), points)

    @classmethod
    def ball(cls, tree: MetricTree, center: TreePoint, radius) -> "Subtree":
        """Closed ball ``{x : d(center, x) <= radius}``."""
        radius = as_fraction(radius)
        segs = []
        for e in tree.edges.values():
            dt = tree.distance(center, tree.vertex(e.tail))
            dh = tree.distance(center, tree.vertex(e.head))
            if center.edge == e.id:
                c = center.offset
                segs.append((e.id, max(Fraction(0), c - radius), min(e.length, c + radius)))
                continue
            if dt <= radius:
                segs.append((e.id, 0, min(e.length, radius - dt)))
            if dh <= radius:
                segs.append((e.id, max(Fraction(0), e.length - (radius - dh)), e.length))
        return cls(tree, segs, [center])

    def _on_segments(self, p: TreePoint) -> bool:
        for eid, off in self.tree.locate(p):
            for lo, hi in self._by_edge.get(eid, ()):
                if lo <= off <= hi:
                    return True
        return False

    def contains(self, p: TreePoint) -> bool:
        return p in self.points or self._on_segments(p)

    @property
    def is_empty(self) -> bool:
        return not self.segments and not self.points

    @property
    def is_finite(self) -> bool:
        return not self.segments

    @property
    def length(self) -> Fraction:
        return sum((hi - lo for _, lo, hi in self.segments), Fraction(0))

    def extreme_points(self) -> list[TreePoint]:
        """Segment ends and isolated points: all candidates for extremal distances."""
        pts = set(self.points)
        for eid, lo, hi in self.segments:
            pts.add(self.tree.point(eid, lo))
            pts.add(self.tree.point(eid, hi))
        return sorted_points(pts, self.tree)

    def union(self, other: "Subtree") -> "Subtree":
        return Subtree(self.tree, self.segments + other.segments, self.points | other.points)

    def is_connected(self) -> bool:
        nodes = self.extreme_points()
        if not nodes:
            return False
        parent = {p: p for p in nodes}

        def find(p):
            while parent[p] != p:
                parent[p] = parent[parent[p]]
                p = parent[p]
            return p

        for eid, lo, hi in self.segments:
            a, b = find(self.tree.point(eid, lo)), find(self.tree.point(eid, hi))
            parent[a] = b
        return len({find(p) for p in nodes}) == 1

    def diameter(self) -> Fraction:
        pts = self.extreme_points()
        return max((self.tree.distance(a, b) for a, b in itertools.combinations(pts, 2)), default=Fraction(0))

    def intersects(self, other: "Subtree") -> bool:
        for p in self.extreme_points():
            if other.contains(p):
                return True
        for p in other.extreme_points():
            if self.contains(p):
                return True
        return False

    def distance_to(self, x: TreePoint) -> Fraction:
        """``d(x, S)``; exact for connected ``S`` or finite ``S``."""
        if self.contains(x):
            return Fraction(0)
        return min(self.tree.distance(x, p) for p in self.extreme_points())

    def _key(self):
        return (self.segments, tuple(p.sort_key for p in sorted_points(self.points)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subtree):
            return NotImplemented
        return self.tree == other.tree and self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        parts = [f"{e}[{lo},{hi}]" for e, lo, hi in self.segments]
        parts += [repr(p) for p in sorted_points(self.points)]
        return "Subtree(" + ", ".join(parts) + ")"


# ---------------------------------------------------------------------------
# Operations


def path(t: MetricTree, a: TreePoint, b: TreePoint) -> Arc:
    return t.path(a, b)


def classify_point(t: MetricTree, x: TreePoint) -> tuple[str, int]:
    return t.classify_point(x)


def first_point_map(t: MetricTree, sub: Subtree, x: TreePoint) -> TreePoint:
    """Retraction onto ``sub``: the point of ``sub`` on every arc from ``x`` into it."""
    if sub.tree != t:
        raise TreeError("subtree lives on another tree")
    if sub.is_empty or not sub.is_connected():
        raise TreeError("first point map needs a nonempty connected subtree")
    t.validate(x)
    if sub.contains(x):
        return x
    return min(sub.extreme_points(), key=lambda p: (t.distance(x, p), t.key(p)))


@dataclass(frozen=True)
class Region:
    """A connected component of the tree minus a finite cut set (open)."""

    segments: tuple
    boundary: tuple

    def closure(self, tree: MetricTree) -> Subtree:
        return Subtree(tree, self.segments)

    def contains(self, tree: MetricTree, x: TreePoint) -> bool:
        if x in self.boundary:
            return False
        for eid, off in tree.locate(x):
            for e, lo, hi in self.segments:
                if e == eid and lo <= off <= hi:
                    return True
        return False


def edge_pieces(t: MetricTree, points: Iterable[TreePoint]) -> dict[str, list[Fraction]]:
    """Sorted breakpoints per edge: edge ends plus interior ``points``."""
    stops = {eid: {Fraction(0), e.length} for eid, e in t.edges.items()}
    for p in points:
        if p.vertex is None:
            stops[p.edge].add(p.offset)
    return {eid: sorted(s) for eid, s in stops.items()}


def connected_components_minus(t: MetricTree, cuts: Iterable[TreePoint]) -> list[Region]:
    cuts = set(t.validate(c) for c in cuts)
    stops = edge_pieces(t, cuts)
    pieces = []
    for eid, offs in stops.items():
        for lo, hi in zip(offs, offs[1:]):
            pieces.append((eid, lo, hi))
    parent = list(range(len(pieces)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    at: dict[TreePoint, list[int]] = {}
    for k, (eid, lo, hi) in enumerate(pieces):
        for end in (t.point(eid, lo), t.point(eid, hi)):
            if end not in cuts:
                at.setdefault(end, []).append(k)
    for ks in at.values():
        for k in ks[1:]:
            parent[find(k)] = find(ks[0])
    groups: dict[int, list[int]] = {}
    for k in range(len(pieces)):
        groups.setdefault(find(k), []).append(k)
    regions = []
    for ks in groups.values():
        segs = tuple(pieces[k] for k in ks)
        bnd = set()
        for eid, lo, hi in segs:
            for end in (t.point(eid, lo), t.point(eid, hi)):
                if end in cuts:
                    bnd.add(end)
        regions.append(Region(segs, tuple(sorted_points(bnd, t))))
    regions.sort(key=lambda r: r.segments)
    return regions


def free_arcs(t: MetricTree) -> list[Arc]:
    """Maximal free arcs: closures of the components of ``t`` minus its branch points."""
    if not t.edges:
        return []
    branch = [t.vertex(v) for v in t.branch_points]
    arcs = []
    for region in connected_components_minus(t, branch):
        ends = list(region.boundary)
        for v in t.endpoints:
            if region.contains(t, t.vertex(v)):
                ends.append(t.vertex(v))
        a, b = sorted_points(ends, t)
        arcs.append(t.path(a, b))
    return arcs


def hausdorff_distance(t: MetricTree, A: Subtree, B: Subtree) -> Fraction:
    """Exact Hausdorff distance between two nonempty subtrees.

    ``x -> d(x, B)`` is convex along geodesics when ``B`` is connected, so the
    excess of ``A`` over ``B`` is attained at an extreme point of ``A``.
    """
    if A.is_empty or B.is_empty:
        raise TreeError("Hausdorff distance needs nonempty sets")
    for S, other in ((A, B), (B, A)):
        if not S.is_finite and not other.is_connected():
            raise TreeError("excess over a disconnected set is not supported")

    def excess(S, R):
        return max(R.distance_to(p) for p in S.extreme_points())

    return max(excess(A, B), excess(B, A))


def region_diameter(t: MetricTree, region: Region) -> Fraction:
    return region.closure(t).diameter()


def disjoint_family_bound(t: MetricTree, eps) -> tuple[int, list[TreePoint]]:
    """A bound ``N`` on how many pairwise disjoint connected sets of diameter
    ``>= eps`` fit in ``t``, with the cut points that certify it.

    Cuts at every non-leaf vertex and at spacing ``<= eps/2`` along each edge
    leave components of diameter ``< eps``; a connected set of diameter
    ``>= eps`` must then contain a cut point, and disjoint sets contain
    distinct ones.
    """
    eps = as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    step = eps / 2
    cuts = [t.vertex(v) for v in t.vertices if t.degree(v) >= 2]
    for e in t.edges.values():
        k = -(-e.length // step)  # ceil
        k = int(k)
        for i in range(1, k):
            cuts.append(t.point(e.id, e.length * i / k))
    cuts = sorted_points(cuts, t)
    for region in connected_components_minus(t, cuts):
        if region_diameter(t, region) >= eps:
            raise AssertionError("cut set too coarse")  # guarded by construction
    return len(cuts), cuts


# ---------------------------------------------------------------------------
# Builders


def interval(length=1, name: str = "I") -> MetricTree:
    """The arc ``[0, length]`` as a one-edge tree ``a --e--> b``."""
    return MetricTree(["a", "b"], [("e", "a", "b", as_fraction(length))], name)


def at(t: MetricTree, x, edge: str = "e") -> TreePoint:
    """Point at offset ``x`` along ``edge`` (defaults suit :func:`interval`)."""
    return t.point(edge, x)


@dataclass(frozen=True)
class StarSpec:
    beams: int
    lengths: tuple = ()
    center: str = "c"

    def build(self, name: str = "S") -> MetricTree:
        if self.beams < 1:
            raise TreeError("a star needs at least one beam")
        lengths = self.lengths or (Fraction(1),) * self.beams
        if len(lengths) != self.beams or any(as_fraction(x) <= 0 for x in lengths):
            raise TreeError("need one positive length per beam")
        verts = [self.center] + [f"t{i}" for i in range(self.beams)]
        edges = [(f"b{i}", self.center, f"t{i}", as_fraction(lengths[i])) for i in range(self.beams)]
        return MetricTree(verts, edges, name)


def star(n: int, lengths=()) -> MetricTree:
    """``n`` beams ``b0..`` from center ``c`` to tips ``t0..`` (unit length by default)."""
    return StarSpec(n, tuple(lengths)).build()


def point_label(t: MetricTree, x: TreePoint) -> str:
    """``<edge>:<p/q>`` form, using the first incident edge for vertices."""
    eid, off = sorted(t.locate(x))[0] if x.vertex is not None else (x.edge, x.offset)
    return f"{eid}:{off}"


def bisect_piece(offsets: list[Fraction], off: Fraction) -> int:
    """Index of the piece ``[offsets[i], offsets[i+1]]`` containing ``off``."""
    i = bisect.bisect_right(offsets, off) - 1
    return min(max(i, 0), len(offsets) - 2)
