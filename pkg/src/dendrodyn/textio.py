"""Plain-text tree and map files.

::

    # comments run to the end of the line
    tree T
    vertex a
    vertex b
    edge e a b 1
    point m e:1/2
    partition a m b
    image a -> b
    image m -> m
    image b -> a

Points are referred to by vertex id, by a ``point`` name, or literally as
``edge:p/q``.  Every ``image`` source joins the partition; ``partition``
lines are optional.  Output is byte-stable: the writer lists vertices and
edges in tree order and partition points in tree order.
"""
from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path

from .markov import MapError, MarkovMap
from .tree import MetricTree, TreeError, TreePoint


class FormatError(ValueError):
    """A parse error, with the 1-based line number where it happened."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


_NAME = re.compile(r"^[A-Za-z_][\w.~()\-,]*$")
_RATIONAL = re.compile(r"^\d+(/\d+)?$")


def parse_rational(text: str, line: int | None = None) -> Fraction:
    """Exact ``p`` or ``p/q``; decimals and floats are refused."""
    s = text.strip()
    if not _RATIONAL.match(s):
        raise FormatError(f"expected a rational p/q, got {text!r}", line)
    return Fraction(s)


class _Reader:
    def __init__(self):
        self.name = "T"
        self.vertices: list[str] = []
        self.edges: list[tuple] = []
        self.points: dict[str, tuple[str, Fraction, int]] = {}
        self.partition: list[tuple[str, int]] = []
        self.images: list[tuple[str, str, int]] = []
        self.seen_tree = False

    def feed(self, lineno: int, words: list[str]) -> None:
        kw, args = words[0], words[1:]
        if kw == "tree":
            if len(args) != 1 or self.seen_tree:
                raise FormatError("expected a single 'tree <name>' line", lineno)
            self.name, self.seen_tree = args[0], True
        elif kw == "vertex":
            if len(args) != 1 or not _NAME.match(args[0]):
                raise FormatError("expected 'vertex <id>'", lineno)
            self.vertices.append(args[0])
        elif kw == "edge":
            if len(args) != 4:
                raise FormatError("expected 'edge <id> <tail> <head> <length>'", lineno)
            self.edges.append((args[0], args[1], args[2], parse_rational(args[3], lineno), lineno))
        elif kw == "point":
            if len(args) == 3 and args[1] == "=":
                args = [args[0], args[2]]
            if len(args) != 2 or ":" not in args[1]:
                raise FormatError("expected 'point <id> <edge>:<p/q>'", lineno)
            eid, off = args[1].rsplit(":", 1)
            self.points[args[0]] = (eid, parse_rational(off, lineno), lineno)
        elif kw == "partition":
            self.partition.extend((a, lineno) for a in args)
        elif kw == "image":
            if len(args) != 3 or args[1] != "->":
                raise FormatError("expected 'image <point> -> <point>'", lineno)
            self.images.append((args[0], args[2], lineno))
        else:
            raise FormatError(f"unknown keyword {kw!r}", lineno)

    def tree(self) -> MetricTree:
        if not self.vertices:
            raise FormatError("no vertices")
        try:
            return MetricTree(self.vertices, [e[:4] for e in self.edges], self.name)
        except TreeError as exc:
            raise FormatError(f"invalid tree: {exc}") from exc

    def resolve(self, t: MetricTree, ref: str, lineno: int) -> TreePoint:
        try:
            if ref in t.adjacency:
                return t.vertex(ref)
            if ref in self.points:
                eid, off, _ = self.points[ref]
                return t.point(eid, off)
            if ":" in ref:
                eid, off = ref.rsplit(":", 1)
                return t.point(eid, parse_rational(off, lineno))
        except TreeError as exc:
            raise FormatError(str(exc), lineno) from exc
        raise FormatError(f"unknown point {ref!r}", lineno)


def _read(text: str) -> _Reader:
    r = _Reader()
    for lineno, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if words:
            r.feed(lineno, words)
    return r


def loads_tree(text: str) -> MetricTree:
    return _read(text).tree()


def loads_map(text: str) -> MarkovMap:
    r = _read(text)
    t = r.tree()
    if not r.images:
        raise FormatError("a map file needs 'image' lines")
    images: dict[TreePoint, TreePoint] = {}
    for a, b, lineno in r.images:
        x = r.resolve(t, a, lineno)
        if x in images:
            raise FormatError(f"second image for {a!r}", lineno)
        images[x] = r.resolve(t, b, lineno)
    pts = set(images)
    for a, lineno in r.partition:
        x = r.resolve(t, a, lineno)
        if x not in images:
            raise FormatError(f"partition point {a!r} has no image", lineno)
    try:
        return MarkovMap(t, pts, images)
    except MapError as exc:
        raise MapError(f"invalid map: {exc}") from exc


def label(t: MetricTree, x: TreePoint) -> str:
    return x.vertex if x.vertex is not None else f"{x.edge}:{x.offset}"


def dumps_tree(t: MetricTree) -> str:
    lines = [f"tree {t.name}"]
    lines += [f"vertex {v}" for v in t.vertices]
    lines += [f"edge {e.id} {e.tail} {e.head} {e.length}" for e in t.edges.values()]
    return "\n".join(lines) + "\n"


def dumps_map(f: MarkovMap) -> str:
    body = [f"image {label(f.tree, p)} -> {label(f.tree, f.images[p])}" for p in f.partition]
    return dumps_tree(f.tree) + "\n".join(body) + "\n"


def load_map(path) -> MarkovMap:
    return loads_map(Path(path).read_text())


def load_tree(path) -> MetricTree:
    return loads_tree(Path(path).read_text())


def save_map(f: MarkovMap, path) -> None:
    Path(path).write_text(dumps_map(f))
