"""Regular periodic decompositions of transitive Markov maps."""
from __future__ import annotations

from dataclasses import dataclass, field

from .covering import (
    CoveringGraph,
    bfs_levels,
    build_graph,
    graph_period,
    is_transitive,
    primitivity_horizon,
)
from .markov import MarkovMap
from .tree import Subtree


class NotTransitive(ValueError):
    pass


@dataclass(frozen=True)
class Decomposition:
    """Pieces ``D_0..D_{m-1}``, each a set of basic-interval indices (a union of closed intervals)."""

    pieces: tuple[frozenset[int], ...]

    @classmethod
    def of(cls, *pieces) -> "Decomposition":
        return cls(tuple(frozenset(p) for p in pieces))

    @property
    def length(self) -> int:
        return len(self.pieces)

    def subtree(self, f: MarkovMap, i: int) -> Subtree:
        segs = [s for j in sorted(self.pieces[i]) for s in f.intervals[j].arc.segments]
        return Subtree(f.tree, segs)

    def dump(self) -> str:
        return "".join(
            f"D{i}: " + ",".join(f"I{j}" for j in sorted(p)) + "\n" for i, p in enumerate(self.pieces)
        )


def terminal_decomposition(f: MarkovMap) -> Decomposition:
    """Cyclic classes of the covering graph, in the order ``f`` visits them."""
    g = build_graph(f)
    if not is_transitive(g):
        raise NotTransitive("terminal decomposition needs a transitive map")
    m = graph_period(g)
    level = bfs_levels(g)
    classes = [set() for _ in range(m)]
    for v, lv in level.items():
        classes[lv % m].add(v)
    return Decomposition(tuple(frozenset(c) for c in classes))


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


@dataclass
class DecompositionReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.ok]

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append(Check(name, ok, detail))

    def text(self) -> str:
        lines = [f"{c.name}: {'pass' if c.ok else 'FAIL'}" + (f" ({c.detail})" if c.detail else "") for c in self.checks]
        lines.append(f"verification: {'pass' if self.ok else 'fail'}")
        return "\n".join(lines) + "\n"


def _power_pieces(f: MarkovMap, D: Decomposition) -> list[CoveringGraph]:
    """Covering graph of ``f^m`` (on its own refined partition) restricted to each piece.

    The walk-count graph of ``f`` is too coarse here: it cannot tell a fold
    from a bijection, so the refined partition of the power map is used.
    """
    fm = f.power(D.length)
    g = build_graph(fm)
    out = []
    for i in range(D.length):
        sub = D.subtree(f, i)
        keep = [J.index for J in fm.intervals if sub.contains(J.arc.point_at(J.length / 2))]
        out.append(g.restrict(keep))
    return out


def verify_decomposition(f: MarkovMap, D: Decomposition) -> DecompositionReport:
    """Check the defining properties; failures are listed, never raised."""
    rep = DecompositionReport()
    m = D.length
    n = len(f.intervals)
    used = [j for p in D.pieces for j in p]
    rep.add("cover", m > 0 and set(used) == set(range(n)), f"{len(set(used))}/{n} intervals")
    rep.add("regular closed", all(D.pieces) and all(0 <= j < n for j in used))
    overlaps = [
        (i, k) for i in range(m) for k in range(i + 1, m) if D.pieces[i] & D.pieces[k]
    ]
    rep.add(
        "finite intersections",
        not overlaps,
        ", ".join(f"D{i}&D{k}" for i, k in overlaps),
    )
    if not rep.ok:
        return rep
    subs = [D.subtree(f, i) for i in range(m)]
    bad = []
    for i in range(m):
        img = subs[i]
        for l in range(1, 2 * m + 1):
            img = f.image_of(img)
            if img != subs[(i + l) % m]:
                bad.append(f"f^{l}(D{i})")
                break
    rep.add("shift", not bad, ", ".join(bad))
    weak = [f"D{i}" for i, sub in enumerate(_power_pieces(f, D)) if not is_transitive(sub)]
    rep.add(f"f^{m} transitive on pieces", not weak, ", ".join(weak))
    return rep


def piece_horizons(f: MarkovMap, D: Decomposition) -> list[int | None]:
    """Primitivity horizon of ``f^m`` on each piece (``None`` if not primitive)."""
    return [primitivity_horizon(sub) for sub in _power_pieces(f, D)]


@dataclass(frozen=True)
class Refinement:
    refines: bool
    containment: tuple[tuple[bool, ...], ...]
    multiplicity: int | None


def refinement_relation(C: Decomposition, D: Decomposition) -> Refinement:
    """Whether every ``C_i`` lies in some ``D_j``, and how many land in each ``D_j``."""
    mat = tuple(tuple(c <= d for d in D.pieces) for c in C.pieces)
    refines = all(any(row) for row in mat)
    mult = None
    if refines:
        per = [sum(mat[i][j] for i in range(C.length)) for j in range(D.length)]
        if len(set(per)) == 1 and per[0] * D.length == C.length:
            mult = per[0]
        else:
            refines = False
    return Refinement(refines, mat, mult)


def trivial(f: MarkovMap) -> Decomposition:
    return Decomposition((frozenset(range(len(f.intervals))),))
