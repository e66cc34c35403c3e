"""The word map ``σ`` on ``Λ = {∅} ∪ (ℕ²)^k`` and the identities it satisfies.

A word is a tuple of ``(n, j)`` pairs with positive entries; the empty
tuple is ``∅``.  ``σ`` rewrites the head pair:

* ``n_1 > 1``: the head becomes ``(n_1 - 1, j_1)``;
* ``n_1 = 1``, one pair: the result is ``∅``;
* ``n_1 = 1``, more pairs: the head is dropped and the next pair becomes
  ``(j_1 + n_2 - 1, j_2)``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .markov import MarkovMap
from .tree import MetricTree, Subtree

Word = tuple[tuple[int, int], ...]
EMPTY: Word = ()


class WordError(ValueError):
    pass


def word(*pairs) -> Word:
    w = tuple((int(n), int(j)) for n, j in pairs)
    for n, j in w:
        if n < 1 or j < 1:
            raise WordError(f"pair ({n},{j}) has an entry below 1")
    return w


_PAIR = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")


def parse_word(text: str) -> Word:
    """``(n,j)(n,j)...`` or ``-`` for the empty word."""
    s = text.strip()
    if s in ("-", "∅", ""):
        return EMPTY
    pairs, pos = [], 0
    for m in _PAIR.finditer(s):
        if s[pos:m.start()].strip():
            raise WordError(f"unexpected text {s[pos:m.start()]!r} in word {text!r}")
        pairs.append((int(m.group(1)), int(m.group(2))))
        pos = m.end()
    if s[pos:].strip() or not pairs:
        raise WordError(f"cannot parse word {text!r}")
    return word(*pairs)


def format_word(w: Word) -> str:
    return "".join(f"({n},{j})" for n, j in w) if w else "-"


def sigma(w: Word) -> Word:
    if not w:
        return EMPTY
    (n1, j1), rest = w[0], w[1:]
    if n1 > 1:
        return ((n1 - 1, j1),) + rest
    if not rest:
        return EMPTY
    n2, j2 = rest[0]
    return ((j1 + n2 - 1, j2),) + rest[1:]


def sigma_power(w: Word, steps: int) -> Word:
    """``σ^steps(w)``, skipping runs of head decrements."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    while steps and w:
        n1, j1 = w[0]
        if n1 > 1:
            d = min(n1 - 1, steps)
            w = ((n1 - d, j1),) + w[1:]
            steps -= d
        else:
            w = sigma(w)
            steps -= 1
    return w


def sigma_orbit(w: Word, steps: int) -> list[Word]:
    out = [w]
    for _ in range(steps):
        w = sigma(w)
        out.append(w)
    return out


def collapse_time(w: Word) -> int:
    """``m = Σ (n_i + j_i) − k``."""
    if not w:
        raise WordError("collapse time is undefined for the empty word")
    return sum(n + j for n, j in w) - len(w)


def first_empty_time(w: Word) -> int:
    """Least ``l`` with ``σ^l(w) = ∅``, by iteration."""
    l = 0
    while w:
        n1, _ = w[0]
        if n1 > 1:
            l += n1 - 1
            w = ((1, w[0][1]),) + w[1:]
        else:
            w = sigma(w)
            l += 1
    return l


@dataclass(frozen=True)
class Collapse:
    word: Word
    m: int
    collapsed: bool
    first_empty: int

    def __bool__(self) -> bool:
        return self.collapsed

    def line(self) -> str:
        status = "verified" if self.collapsed else "FAILED"
        return f"{format_word(self.word)}: m={self.m}, {status}, first empty at {self.first_empty}"


def verify_collapse(w: Word) -> Collapse:
    """Checks ``σ^m(w) = ∅`` for ``m = collapse_time(w)``.

    The first time the orbit reaches ``∅`` is reported too; it equals
    ``m - j_k + 1``, so it coincides with ``m`` only when the last pair has
    ``j_k = 1``.
    """
    m = collapse_time(w)
    return Collapse(w, m, sigma_power(w, m) == EMPTY, first_empty_time(w))


def periodic_endpoint_check(w: Word, n: int) -> bool:
    """``σ^m(w^{n+1}) = w^n``."""
    if not w:
        raise WordError("the empty word has no collapse time")
    if n < 1:
        raise ValueError("n must be >= 1")
    return sigma_power(w * (n + 1), collapse_time(w)) == w * n


def universe(depth: int) -> Iterator[Word]:
    """``Λ_L``: words of length ``<= L`` with entries in ``1..L``."""
    pairs = [(n, j) for n in range(1, depth + 1) for j in range(1, depth + 1)]
    for k in range(depth + 1):
        for combo in itertools.product(pairs, repeat=k):
            yield combo


def box(max_length: int, max_entry: int) -> Iterator[Word]:
    pairs = [(n, j) for n in range(1, max_entry + 1) for j in range(1, max_entry + 1)]
    for k in range(1, max_length + 1):
        yield from itertools.product(pairs, repeat=k)


@dataclass(frozen=True)
class RegionCheck:
    word: Word
    depth: int
    checked: int
    misses: tuple[Word, ...]

    def __bool__(self) -> bool:
        return not self.misses


def region_exactness(w: Word, depth: int) -> RegionCheck:
    """Every ``β`` in ``Λ_L`` is ``σ^m`` of some word in the region of ``w``.

    The region is ``{w} ∪ {w·δ}``: the words indexing branch points beyond
    ``b_w``.  Witnesses ``w`` (for ``∅``) and ``w·β`` are tried, each by
    actual iteration.
    """
    m = collapse_time(w)
    misses, count = [], 0
    for beta in universe(depth):
        count += 1
        cands = (w,) if not beta else (w + beta,)
        if not any(sigma_power(g, m) == beta for g in cands):
            misses.append(beta)
    return RegionCheck(w, depth, count, tuple(misses))


def batch_verify(words: Iterable[Word]) -> list[Collapse]:
    return [verify_collapse(w) for w in words]


# -- geometric realization ---------------------------------------------------


def vertex_name(w: Word) -> str:
    return "b" + format_word(w)


def sigma_closure(words: Iterable[Word]) -> set[Word]:
    """Smallest prefix-closed, ``σ``-closed set containing ``words``."""
    out: set[Word] = {EMPTY}
    todo = list(words)
    while todo:
        w = todo.pop()
        if w in out:
            continue
        out.add(w)
        todo.append(w[:-1])
        todo.append(sigma(w))
    return out


def realize(words: Iterable[Word]) -> tuple[MarkovMap, dict[Word, str]]:
    """A finite tree with a vertex ``b_α`` per word and the linear map ``b_α -> b_σ(α)``.

    ``b_α`` hangs off ``b_{α'}`` (``α'`` = ``α`` minus its last pair) by an
    edge of length ``2^{-Σ entries}``.
    """
    ws = sorted(sigma_closure(words), key=lambda w: (len(w), w))
    names = {w: vertex_name(w) for w in ws}
    edges = [
        (f"e{format_word(w)}", names[w[:-1]], names[w], Fraction(1, 2 ** sum(n + j for n, j in w)))
        for w in ws if w
    ]
    tree = MetricTree(names.values(), edges, "Xsigma")
    pts = {w: tree.vertex(names[w]) for w in ws}
    f = MarkovMap(tree, pts.values(), {pts[w]: pts[sigma(w)] for w in ws})
    return f, names


def geometric_collapse(w: Word) -> bool:
    """``F^m([b_∅, b_w]) = {b_∅}`` in the realization of ``w``."""
    f, names = realize([w])
    arc = f.tree.path(f.tree.vertex(names[EMPTY]), f.tree.vertex(names[w]))
    S = Subtree.from_arc(arc)
    for _ in range(collapse_time(w)):
        S = f.image_of(S)
    return S == Subtree.from_points(f.tree, [f.tree.vertex(names[EMPTY])])
