"""Exact periodic orbits of Markov tree maps.

Every periodic orbit either lies entirely in the partition ``P`` (which is
forward invariant) or avoids it entirely.  Orbits of the first kind are the
cycles of ``f`` restricted to ``P``.  An orbit of the second kind has a
well-defined itinerary, a closed walk in the covering graph, and on the
corresponding cylinder ``f^n`` is affine in the interval parameter, so its
fixed points come from a single linear equation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import Iterable, Iterator, Sequence

from .covering import CoveringGraph, build_graph, strongly_connected_components
from .markov import MarkovMap
from .tree import Region, TreePoint, as_fraction, connected_components_minus, point_label


class PreconditionError(ValueError):
    pass


class SearchInconclusive(RuntimeError):
    """The search budget ran out; this says nothing about existence."""


DEFAULT_BUDGET = 64
MAX_WALKS = 2_000_000


@dataclass(frozen=True)
class PeriodicOrbit:
    base: TreePoint
    period: int
    itinerary: tuple[int, ...]
    points: tuple[TreePoint, ...]

    def listing(self, f: MarkovMap) -> str:
        its = ",".join(f"I{i}" for i in self.itinerary)
        return f"orbit period={self.period} base={point_label(f.tree, self.base)} itinerary={its}"


@dataclass(frozen=True)
class PeriodicArc:
    """A nondegenerate arc on which ``f^period`` is the identity.

    ``pieces`` lists ``(interval, t_lo, t_hi)`` for the arc and each of its
    images, with ``t`` the normalized parameter along the basic interval.
    """

    period: int
    itinerary: tuple[int, ...]
    pieces: tuple[tuple[int, Fraction, Fraction], ...]

    def endpoints(self, f: MarkovMap, k: int = 0) -> tuple[TreePoint, TreePoint]:
        i, lo, hi = self.pieces[k]
        J = f.intervals[i]
        return J.arc.point_at(J.length * lo), J.arc.point_at(J.length * hi)

    def listing(self, f: MarkovMap) -> str:
        a, b = self.endpoints(f)
        its = ",".join(f"I{i}" for i in self.itinerary)
        return (
            f"arc period={self.period} from={point_label(f.tree, a)} "
            f"to={point_label(f.tree, b)} itinerary={its}"
        )


def minimal_period(f: MarkovMap, x: TreePoint, bound: int = 10_000) -> int | None:
    y = f(x)
    for n in range(1, bound + 1):
        if y == x:
            return n
        y = f(y)
    return None


def _orbit(f: MarkovMap, x: TreePoint, n: int) -> PeriodicOrbit:
    pts = [x]
    for _ in range(n - 1):
        pts.append(f(pts[-1]))
    base = min(pts, key=f.tree.key)
    k = pts.index(base)
    pts = pts[k:] + pts[:k]
    return PeriodicOrbit(base, n, tuple(f.interval_of(p) for p in pts), tuple(pts))


class _StepMaps(dict):
    """Affine maps ``u = a*t + b`` from the parameter on ``I`` to the one on
    ``J``, for edges ``I -> J``; computed on first use."""

    def __init__(self, f: MarkovMap):
        super().__init__()
        self.f = f

    def __missing__(self, key):
        i, j = key
        arc = self.f.image_arcs[i]
        J = self.f.intervals[j]
        pa, pb = arc.position(J.start), arc.position(J.end)
        self[key] = val = (arc.length / (pb - pa), -pa / (pb - pa))
        return val


def _step_maps(f: MarkovMap, g: CoveringGraph) -> dict[tuple[int, int], tuple[Fraction, Fraction]]:
    return _StepMaps(f)


def _clip(a: Fraction, b: Fraction, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    # t-range in [lo, hi] with 0 <= a*t + b <= 1 (a != 0)
    r1, r2 = -b / a, (1 - b) / a
    if r1 > r2:
        r1, r2 = r2, r1
    return max(lo, r1), min(hi, r2)


def _closed_walk_solutions(
    f: MarkovMap,
    g: CoveringGraph,
    steps,
    n: int,
    starts: Sequence[int] | None,
    max_walks: int,
    window: tuple[Fraction, Fraction] = (Fraction(0), Fraction(1)),
) -> Iterator[tuple[tuple[int, ...], Fraction, Fraction]]:
    """``(walk, t_lo, t_hi)`` for closed walks of length ``n`` whose return map has fixed points.

    ``t_lo == t_hi`` for an isolated fixed point; otherwise the return map is
    the identity on that parameter range.
    """
    canonical = starts is None
    roots = range(g.size) if starts is None else starts
    budget = [max_walks]
    one, zero = Fraction(1), Fraction(0)

    def dfs(walk, a, b, lo, hi):
        v = walk[-1]
        if len(walk) == n + 1:
            if v != walk[0]:
                return
            budget[0] -= 1
            if budget[0] < 0:
                raise SearchInconclusive(f"more than {max_walks} walks of length {n}")
            if a != 1:
                t = b / (1 - a)
                if lo <= t <= hi:
                    yield tuple(walk[:-1]), t, t
            elif b == 0 and lo <= hi:
                yield tuple(walk[:-1]), lo, hi
            return
        last = len(walk) == n
        for w in g.succ[v]:
            if canonical and w < walk[0]:
                continue
            if last and w != walk[0]:
                continue
            sa, sb = steps[(v, w)]
            na, nb = sa * a, sa * b + sb
            nlo, nhi = _clip(na, nb, lo, hi)
            if nlo > nhi:
                continue
            walk.append(w)
            yield from dfs(walk, na, nb, nlo, nhi)
            walk.pop()

    for r in roots:
        yield from dfs([r], one, zero, window[0], window[1])


def _partition_orbits(f: MarkovMap) -> list[PeriodicOrbit]:
    """Cycles of ``f`` restricted to the partition."""
    uniq: dict[frozenset, PeriodicOrbit] = {}
    for p in f.partition:
        seen = []
        x = p
        while x not in seen:
            seen.append(x)
            x = f.images[x]
        cyc = seen[seen.index(x):]
        if frozenset(cyc) not in uniq:
            uniq[frozenset(cyc)] = _orbit(f, cyc[0], len(cyc))
    return list(uniq.values())


class PeriodicSearch:
    """Incremental period-by-period enumeration with cached graph data."""

    def __init__(
        self,
        f: MarkovMap,
        starts: Sequence[int] | None = None,
        max_walks: int = MAX_WALKS,
        window: tuple[Fraction, Fraction] | None = None,
        include_partition: bool = True,
    ):
        """``window`` restricts the parameter of the first walk step (needs ``starts``)."""
        if window is not None and starts is None:
            raise ValueError("a window needs explicit start intervals")
        self.f = f
        self.graph = build_graph(f)
        self.steps = _step_maps(f, self.graph)
        self.starts = starts
        self.max_walks = max_walks
        self.window = (Fraction(0), Fraction(1)) if window is None else tuple(map(Fraction, window))
        self._p_orbits = _partition_orbits(f) if include_partition else []
        self._seen_points: set[frozenset] = set()
        self._seen_arcs: set[frozenset] = set()

    def period(self, n: int) -> tuple[list[PeriodicOrbit], list[PeriodicArc]]:
        """Orbits and arcs of exact minimal period ``n``."""
        f = self.f
        orbits = [o for o in self._p_orbits if o.period == n]
        arcs = []
        for walk, lo, hi in _closed_walk_solutions(
            f, self.graph, self.steps, n, self.starts, self.max_walks, self.window
        ):
            J = f.intervals[walk[0]]
            if lo == hi:
                if lo in (0, 1):
                    continue  # a partition point, handled by the partition cycles
                x = J.arc.point_at(J.length * lo)
                if minimal_period(f, x, n) != n:
                    continue
                o = _orbit(f, x, n)
                key = frozenset(o.points)
                if key not in self._seen_points:
                    self._seen_points.add(key)
                    orbits.append(o)
                continue
            arc = self._arc(walk, lo, hi)
            if arc is not None:
                key = frozenset(arc.pieces)
                if key not in self._seen_arcs:
                    self._seen_arcs.add(key)
                    arcs.append(arc)
        orbits.sort(key=lambda o: f.tree.key(o.base))
        arcs.sort(key=lambda a: a.pieces[0])
        return orbits, arcs

    def _arc(self, walk, lo, hi) -> PeriodicArc | None:
        f, n = self.f, len(walk)
        J = f.intervals[walk[0]]
        probes = [J.arc.point_at(J.length * (lo + (hi - lo) * k / 3)) for k in (1, 2)]
        for d in range(1, n):
            if n % d == 0 and all(f.iterate(x, d) == x for x in probes):
                return None  # generic points have a smaller period
        pieces = []
        a, b = Fraction(1), Fraction(0)
        for k in range(n):
            u1, u2 = a * lo + b, a * hi + b
            pieces.append((walk[k], min(u1, u2), max(u1, u2)))
            sa, sb = self.steps[(walk[k], walk[(k + 1) % n])]
            a, b = sa * a, sa * b + sb
        rot = min(range(n), key=lambda k: pieces[k])
        return PeriodicArc(n, tuple(walk[rot:] + walk[:rot]), tuple(pieces[rot:] + pieces[:rot]))


def enumerate_periodic(f: MarkovMap, max_period: int) -> list[PeriodicOrbit | PeriodicArc]:
    """All periodic orbits (and arcs of periodic points) of period ``<= max_period``.

    Sorted by ``(period, base point)``; arcs follow the isolated orbits of the same period.
    """
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    search = PeriodicSearch(f)
    out = []
    for n in range(1, max_period + 1):
        orbits, arcs = search.period(n)
        out.extend(orbits)
        out.extend(arcs)
    return out


def periodic_arcs(items) -> list[PeriodicArc]:
    return [x for x in items if isinstance(x, PeriodicArc)]


def periodic_orbits(items) -> list[PeriodicOrbit]:
    return [x for x in items if isinstance(x, PeriodicOrbit)]


def fixed_points(f: MarkovMap) -> list[TreePoint]:
    """Isolated fixed points (period-1 orbits), sorted along the tree."""
    return [o.base for o in periodic_orbits(enumerate_periodic(f, 1))]


def finite_periodic_structure(g: CoveringGraph) -> int | None:
    """If every strongly connected component is a single cycle, a period bound
    beyond which no new periodic orbits exist; otherwise ``None``.

    On a simple cycle of length ``c`` the return map is affine, and an affine
    map whose iterate has a fixed point it lacks itself must have slope ``-1``,
    so periods are at most ``2c``.
    """
    longest = 0
    for comp in strongly_connected_components(g):
        inside = set(comp)
        outs = [[w for w in g.succ[v] if w in inside] for v in comp]
        if len(comp) == 1 and not outs[0]:
            continue
        if any(len(o) != 1 for o in outs):
            return None
        longest = max(longest, len(comp))
    return max(1, 2 * longest)


@dataclass(frozen=True)
class DensityCertificate:
    status: str  # "certified" | "gap" | "inconclusive"
    resolution: Fraction
    period_reached: int
    cells: int
    witness: tuple[int, Fraction, Fraction] | None = None

    def report(self, f: MarkovMap) -> str:
        line = f"density: {self.status} resolution={self.resolution} period={self.period_reached} cells={self.cells}"
        if self.witness is not None:
            i, lo, hi = self.witness
            J = f.intervals[i]
            a, b = J.arc.point_at(J.length * lo), J.arc.point_at(J.length * hi)
            line += f" witness=I{i}[{point_label(f.tree, a)},{point_label(f.tree, b)}]"
        return line + "\n"


def _cells(f: MarkovMap, eps: Fraction) -> list[tuple[int, Fraction, Fraction]]:
    out = []
    for J in f.intervals:
        k = ceil(J.length / eps)
        out.extend((J.index, Fraction(c, k), Fraction(c + 1, k)) for c in range(k))
    return out


def density_certificate(f: MarkovMap, resolution, max_period: int = 12) -> DensityCertificate:
    """Check that every cell of length ``<= resolution`` meets a periodic point in its interior.

    Periods are raised one at a time.  A gap is only reported when the
    enumeration provably found every periodic orbit; otherwise running out of
    budget gives ``inconclusive``.
    """
    eps = as_fraction(resolution)
    if eps <= 0:
        raise ValueError("resolution must be positive")
    cells = _cells(f, eps)
    counts = {J.index: ceil(J.length / eps) for J in f.intervals}
    open_cells = set(range(len(cells)))
    first = {}
    k = 0
    for J in f.intervals:
        first[J.index] = k
        k += counts[J.index]

    def mark_param(i, t):
        c = counts[i]
        s = t * c
        if s.denominator != 1 and 0 < t < 1:
            open_cells.discard(first[i] + int(s))

    def mark_range(i, lo, hi):
        c = counts[i]
        for idx in range(c):
            if Fraction(idx, c) < hi and Fraction(idx + 1, c) > lo:
                open_cells.discard(first[i] + idx)

    search = PeriodicSearch(f)
    complete_at = finite_periodic_structure(search.graph)
    limit = max_period if complete_at is None else max(max_period, complete_at)
    reached = 0
    for n in range(1, limit + 1):
        reached = n
        orbits, arcs = search.period(n)
        for o in orbits:
            for x in o.points:
                for i in f.intervals_at(x):
                    J = f.intervals[i]
                    mark_param(i, J.arc.position(x) / J.length)
        for a in arcs:
            for i, lo, hi in a.pieces:
                mark_range(i, lo, hi)
        if not open_cells:
            return DensityCertificate("certified", eps, reached, len(cells))
    witness = cells[min(open_cells)]
    status = "gap" if complete_at is not None and reached >= complete_at else "inconclusive"
    return DensityCertificate(status, eps, reached, len(cells), witness)


def component_of(f: MarkovMap, x: TreePoint, y: TreePoint) -> Region:
    """The component of ``tree - {x, y}`` containing the open arc ``(x, y)``."""
    if x == y:
        raise PreconditionError("x and y must differ")
    arc = f.tree.path(x, y)
    mid = arc.point_at(arc.length / 2)
    for region in connected_components_minus(f.tree, [x, y]):
        if region.contains(f.tree, mid):
            return region
    raise AssertionError("midpoint lies in no component")


def locate_periodic_in_component(
    f: MarkovMap, x: TreePoint, y: TreePoint, m: int, n: int, budget: int = DEFAULT_BUDGET
) -> PeriodicOrbit | PeriodicArc:
    """A periodic orbit meeting ``U``, the component of ``tree - {x, y}`` between them.

    Requires ``f^m(x)`` and ``f^n(y)`` in ``U``.  Existence is guaranteed in
    that case; exhausting ``budget`` raises :class:`SearchInconclusive`.
    """
    U = component_of(f, x, y)
    if m < 1 or n < 1:
        raise PreconditionError("m and n must be positive")
    if not U.contains(f.tree, f.iterate(x, m)):
        raise PreconditionError(f"f^{m}(x) is not in the component")
    if not U.contains(f.tree, f.iterate(y, n)):
        raise PreconditionError(f"f^{n}(y) is not in the component")
    starts = sorted(
        J.index for J in f.intervals if any(
            U.contains(f.tree, J.arc.point_at(J.length * k / 3)) for k in (1, 2)
        )
    )
    search = PeriodicSearch(f, starts=starts)
    for p in range(1, budget + 1):
        orbits, arcs = search.period(p)
        for o in orbits:
            inside = [q for q in o.points if U.contains(f.tree, q)]
            if inside:
                return _rebase(o, inside[0])
        for a in arcs:
            for i, lo, hi in a.pieces:
                J = f.intervals[i]
                if U.contains(f.tree, J.arc.point_at(J.length * (lo + hi) / 2)):
                    return a
    raise SearchInconclusive(f"no periodic point in the component up to period {budget}")


def _rebase(o: PeriodicOrbit, x: TreePoint) -> PeriodicOrbit:
    k = o.points.index(x)
    pts = o.points[k:] + o.points[:k]
    return PeriodicOrbit(x, o.period, o.itinerary[k:] + o.itinerary[:k], pts)


def window_candidates(
    f: MarkovMap, interval: int, lo, hi, max_period: int = DEFAULT_BUDGET, min_period: int = 1
) -> tuple[int, list[TreePoint]]:
    """Periodic points off the partition whose parameter on ``interval`` lies
    strictly inside ``(lo, hi)``, for the least period that has any.

    Returns ``(period, points)`` with points sorted along the interval.
    """
    lo, hi = as_fraction(lo), as_fraction(hi)
    J = f.intervals[interval]
    search = PeriodicSearch(f, starts=[interval], window=(max(lo, Fraction(0)), min(hi, Fraction(1))), include_partition=False)

    def param(x):
        p = J.arc.position(x)
        return None if p is None else p / J.length

    for n in range(min_period, max_period + 1):
        orbits, arcs = search.period(n)
        found = set()
        for o in orbits:
            for x in o.points:
                t = param(x)
                if t is not None and lo < t < hi:
                    found.add(x)
        for a in arcs:
            for i, plo, phi in a.pieces:
                if i == interval and plo < hi and phi > lo:
                    a1, b1 = max(plo, lo), min(phi, hi)
                    found.add(J.arc.point_at(J.length * (a1 + b1) / 2))
        if found:
            return n, sorted(found, key=lambda x: param(x))
    raise SearchInconclusive(f"no periodic point in the window up to period {max_period}")


def listing(f: MarkovMap, items: Iterable) -> str:
    return "".join(x.listing(f) + "\n" for x in items)
