"""Markov graphs (covering graphs) and the transitivity/mixing decisions built on them."""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

from .markov import MarkovMap
from .tree import bisect_piece


class NotStronglyConnected(ValueError):
    pass


@dataclass(frozen=True)
class CoveringGraph:
    """Vertices are basic intervals ``0..n-1``; ``i -> j`` iff interval i f-covers j."""

    size: int
    succ: tuple[tuple[int, ...], ...]

    @property
    def matrix(self) -> list[list[int]]:
        m = [[0] * self.size for _ in range(self.size)]
        for i, js in enumerate(self.succ):
            for j in js:
                m[i][j] = 1
        return m

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, js in enumerate(self.succ) for j in js]

    def pred(self) -> list[list[int]]:
        p = [[] for _ in range(self.size)]
        for i, j in self.edges:
            p[j].append(i)
        return p

    def restrict(self, keep) -> "CoveringGraph":
        """Induced subgraph on ``keep``, relabelled ``0..len(keep)-1`` in sorted order."""
        keep = sorted(keep)
        pos = {v: k for k, v in enumerate(keep)}
        return CoveringGraph(len(keep), tuple(tuple(pos[j] for j in self.succ[v] if j in pos) for v in keep))

    def power(self, n: int) -> "CoveringGraph":
        """Graph of walks of length exactly ``n``."""
        reach = [frozenset([i]) for i in range(self.size)]
        for _ in range(n):
            reach = [frozenset(j for k in r for j in self.succ[k]) for r in reach]
        return CoveringGraph(self.size, tuple(tuple(sorted(r)) for r in reach))

    def dump(self) -> str:
        return "".join(f"I{i} -> I{j}\n" for i, j in self.edges)


def build_graph(f: MarkovMap) -> CoveringGraph:
    """Exact covering relation: ``I -> J`` iff ``J`` lies on the image arc of ``I``."""
    npieces = {}
    for J in f.intervals:
        npieces[J.index] = sum(
            bisect.bisect_left(f._pieces[e], max(a, b)) - bisect.bisect_left(f._pieces[e], min(a, b))
            for e, a, b in J.arc.segments
        )
    succ = []
    for i, arc in enumerate(f.image_arcs):
        hits: dict[int, int] = {}
        for eid, a, b in arc.segments:
            offs = f._pieces[eid]
            lo, hi = min(a, b), max(a, b)
            k = bisect_piece(offs, lo)
            while k < len(offs) - 1 and offs[k] < hi:
                if offs[k] >= lo and offs[k + 1] <= hi:
                    owner = f._piece_owner[(eid, k)]
                    hits[owner] = hits.get(owner, 0) + 1
                k += 1
        succ.append(tuple(sorted(j for j, c in hits.items() if c == npieces[j])))
    return CoveringGraph(len(f.intervals), tuple(succ))


def strongly_connected_components(g: CoveringGraph) -> list[list[int]]:
    """Tarjan's algorithm, iterative; components sorted by smallest member."""
    index, low, on_stack = {}, {}, set()
    stack, comps = [], []
    counter = 0
    for root in range(g.size):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, k = work.pop()
            if k == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            succ = g.succ[v]
            if k < len(succ):
                work.append((v, k + 1))
                w = succ[k]
                if w not in index:
                    work.append((w, 0))
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    comps.sort()
    return comps


def is_strongly_connected(g: CoveringGraph) -> bool:
    return g.size > 0 and len(strongly_connected_components(g)) == 1


def bfs_levels(g: CoveringGraph, root: int = 0) -> dict[int, int]:
    level = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for v in frontier:
            for w in g.succ[v]:
                if w not in level:
                    level[w] = level[v] + 1
                    nxt.append(w)
        frontier = nxt
    return level


def graph_period(g: CoveringGraph) -> int:
    """gcd of cycle lengths, via ``level(u) + 1 - level(v)`` over all edges."""
    if not is_strongly_connected(g):
        raise NotStronglyConnected("period is only defined for strongly connected graphs")
    level = bfs_levels(g)
    d = 0
    for u, v in g.edges:
        d = gcd(d, level[u] + 1 - level[v])
    return abs(d)


def is_cyclic_permutation(g: CoveringGraph) -> bool:
    """Every vertex has out-degree one and the edges form a single cycle."""
    if g.size == 0 or any(len(s) != 1 for s in g.succ):
        return False
    seen, v = set(), 0
    while v not in seen:
        seen.add(v)
        v = g.succ[v][0]
    return v == 0 and len(seen) == g.size


@dataclass(frozen=True)
class Transitivity:
    transitive: bool
    sccs: list
    cyclic_permutation: bool

    def __bool__(self) -> bool:
        return self.transitive


def is_transitive(f: MarkovMap | CoveringGraph) -> Transitivity:
    g = f if isinstance(f, CoveringGraph) else build_graph(f)
    sccs = strongly_connected_components(g)
    cyc = is_cyclic_permutation(g)
    return Transitivity(len(sccs) == 1 and g.size > 0 and not cyc, sccs, cyc)


def primitivity_horizon(g: CoveringGraph) -> int | None:
    """Least ``N`` with every entry of ``A^N`` positive, or ``None``.

    Wielandt's bound ``(n-1)^2 + 1`` caps the search.
    """
    n = g.size
    if n == 0:
        return None
    full = (1 << n) - 1
    succ = [sum(1 << j for j in s) for s in g.succ]
    # reach[i]: bitset of endpoints of length-N walks from i; extend at the front
    reach = list(succ)
    for N in range(1, (n - 1) ** 2 + 2):
        if all(r == full for r in reach):
            return N
        nxt = []
        for js in g.succ:
            acc = 0
            for j in js:
                acc |= reach[j]
            nxt.append(acc)
        reach = nxt
    return None


@dataclass(frozen=True)
class Classification:
    verdict: str
    sccs: list
    period: int | None
    horizon: int | None
    graph: CoveringGraph = field(repr=False, compare=False)

    @property
    def transitive(self) -> bool:
        return self.verdict != "not transitive"

    @property
    def mixing(self) -> bool:
        return self.verdict == "mixing"

    def report(self) -> str:
        sccs = " ".join("{" + ",".join(f"I{i}" for i in c) + "}" for c in self.sccs)
        lines = [
            f"sccs: {sccs}",
            f"period: {self.period if self.period is not None else '-'}",
            f"horizon: {self.horizon if self.horizon is not None else '-'}",
        ]
        verdict = self.verdict
        if self.mixing:
            verdict += f", horizon {self.horizon}"
        lines.append(f"verdict: {verdict}")
        return "\n".join(lines) + "\n"


def classify(f: MarkovMap) -> Classification:
    """Transitive with period 1 means totally transitive; on trees that is mixing."""
    g = build_graph(f)
    t = is_transitive(g)
    period = graph_period(g) if len(t.sccs) == 1 else None
    if not t.transitive:
        return Classification("not transitive", t.sccs, period, None, g)
    if period > 1:
        return Classification(f"transitive with period {period}", t.sccs, period, None, g)
    return Classification("mixing", t.sccs, period, primitivity_horizon(g), g)


def cycle_lengths(g: CoveringGraph, bound: int) -> set[int]:
    """Lengths ``<= bound`` of closed walks (brute force, for cross-checks)."""
    out = set()
    reach = [frozenset(s) for s in g.succ]
    for n in range(1, bound + 1):
        if any(i in reach[i] for i in range(g.size)):
            out.add(n)
        reach = [frozenset(j for k in r for j in g.succ[k]) for r in reach]
    return out


def isomorphic(g: CoveringGraph, h: CoveringGraph, mapping: Sequence[int] | None = None) -> bool:
    """Isomorphism test; tries ``mapping`` first, then brute force for small graphs."""
    if g.size != h.size or len(g.edges) != len(h.edges):
        return False
    target = set(h.edges)
    if mapping is not None:
        return {(mapping[i], mapping[j]) for i, j in g.edges} == target
    import itertools

    if g.size > 8:
        raise ValueError("brute-force isomorphism limited to 8 vertices")
    for perm in itertools.permutations(range(g.size)):
        if {(perm[i], perm[j]) for i, j in g.edges} == target:
            return True
    return False
