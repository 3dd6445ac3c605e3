"""The color graph, edge addresses and ultimately periodic sequences.

Every edge produced by repeated expansion of the base graph is addressed
by the word of edge symbols that were expanded to create it.  Those
addresses are exactly the labels of walks on the *color graph*: a small
directed graph with one state per color plus a start state for the base
graph, and one arrow per edge of each graph, pointing at the state of
that edge's color.

Points of the limit construction correspond to infinite walks from the
start state.  The decision procedures in this package take ultimately
periodic sequences (finite preperiod followed by a repeated period) as
their finite inputs; :class:`UPWord` is that representation, together
with a canonical form that makes equality of denoted sequences
decidable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .replacement import EdgeGlueError, ReplacementSystem

#: State of the color graph: ``None`` for the start state, else a color id.
ColorState = "str | None"


class WordError(EdgeGlueError):
    """A word literal is malformed or not a walk on the color graph."""


@dataclass(frozen=True)
class ColorGraph:
    """Arrow structure of a replacement system's color graph.

    ``arrows`` maps each edge symbol to its (source state, target state)
    pair; sources are ``None`` (start) or a color id, targets are always
    color ids.  ``out`` lists the symbols leaving each state.
    """

    arrows: Mapping[str, tuple[str | None, str]]
    out: Mapping[str | None, tuple[str, ...]]

    @property
    def states(self) -> list[str | None]:
        return list(self.out)

    def target(self, symbol: str) -> str:
        return self.arrows[symbol][1]

    def walk(self, word: Sequence[str], start: str | None = None) -> str | None | bool:
        """Follow ``word`` from ``start``; return the end state or False."""
        state = start
        for sym in word:
            arrow = self.arrows.get(sym)
            if arrow is None or arrow[0] != state:
                return False
            state = arrow[1]
        return state

    def reachable(self) -> set[str | None]:
        """States reachable from the start state."""
        seen: set[str | None] = {None}
        frontier = [None]
        while frontier:
            state = frontier.pop()
            for sym in self.out.get(state, ()):
                tgt = self.arrows[sym][1]
                if tgt not in seen:
                    seen.add(tgt)
                    frontier.append(tgt)
        return seen


def build_color_graph(rs: ReplacementSystem) -> ColorGraph:
    """One arrow per edge of every graph, aimed at the edge's color state."""
    arrows: dict[str, tuple[str | None, str]] = {}
    out: dict[str | None, list[str]] = {None: []}
    for spec in rs.colors:
        out[spec.id] = []
    for owner, g in rs.graphs():
        for e in g.edges:
            arrows[e.id] = (owner, e.color)
            out[owner].append(e.id)
    return ColorGraph(arrows, {k: tuple(v) for k, v in out.items()})


def is_edge_word(cg: ColorGraph, word: Sequence[str]) -> bool:
    """Whether ``word`` labels a walk from the start state.

    The empty word is accepted (the trivial walk).  Symbols outside the
    alphabet simply yield False.
    """
    return cg.walk(word) is not False


def is_symbol_sequence(cg: ColorGraph, w: UPWord) -> bool:
    """Whether the infinite sequence denoted by ``w`` is a walk from the start.

    Equivalent to: preperiod plus one period is an edge word, and the
    period's first symbol leaves the state its last symbol enters.
    """
    state = cg.walk(tuple(w.preperiod) + tuple(w.period))
    if state is False:
        return False
    first = cg.arrows.get(w.period[0])
    return first is not None and first[0] == state


# ---------------------------------------------------------------------------
# Ultimately periodic words


@dataclass(frozen=True)
class UPWord:
    """``preperiod . period period period ...`` over edge symbols."""

    preperiod: tuple[str, ...]
    period: tuple[str, ...]

    def __post_init__(self):
        if not self.period:
            raise WordError("period must be nonempty")
        for sym in self.preperiod + self.period:
            if not sym:
                raise WordError("empty symbol in word")

    def symbol(self, n: int) -> str:
        """Symbol at position ``n`` of the denoted sequence."""
        if n < len(self.preperiod):
            return self.preperiod[n]
        return self.period[(n - len(self.preperiod)) % len(self.period)]

    def prefix(self, n: int) -> tuple[str, ...]:
        return tuple(self.symbol(i) for i in range(n))

    def canonical(self) -> UPWord:
        """Shortest preperiod and primitive period denoting the same sequence."""
        per = list(self.period)
        n = len(per)
        for d in range(1, n + 1):
            if n % d == 0 and per == per[:d] * (n // d):
                per = per[:d]
                break
        pre = list(self.preperiod)
        while pre and pre[-1] == per[-1]:
            per.insert(0, per.pop())
            pre.pop()
        return UPWord(tuple(pre), tuple(per))

    def same_sequence(self, other: UPWord) -> bool:
        return self.canonical() == other.canonical()

    def __str__(self) -> str:
        head = " ".join(self.preperiod)
        tail = "(" + " ".join(self.period) + ")*"
        return f"{head} {tail}" if head else tail


def format_upword(w: UPWord) -> str:
    return str(w)


def parse_upword(text: str) -> UPWord:
    """Parse a literal like ``"S 0 (1)*"`` into a :class:`UPWord`.

    Symbols are whitespace separated; the trailing ``( ... )*`` marks
    the period and is mandatory, since only infinite sequences denote
    points.
    """
    padded = re.sub(r"\)\s*\*", " )* ", text).replace("(", " ( ")
    tokens = padded.split()
    if "(" not in tokens:
        raise WordError(f"missing period marker in {text!r}")
    open_at = tokens.index("(")
    if ")*" not in tokens:
        raise WordError(f"unterminated period in {text!r}")
    close_at = tokens.index(")*")
    if close_at < open_at:
        raise WordError(f"malformed period marker in {text!r}")
    pre = tokens[:open_at]
    per = tokens[open_at + 1 : close_at]
    rest = tokens[close_at + 1 :]
    if rest:
        raise WordError(f"trailing input after period in {text!r}")
    if any(t in ("(", ")*") for t in pre + per):
        raise WordError(f"nested period markers in {text!r}")
    if not per:
        raise WordError(f"empty period in {text!r}")
    return UPWord(tuple(pre), tuple(per))


def combined_shape(x: UPWord, y: UPWord) -> tuple[int, int]:
    """Common eventual structure of two sequences.

    Returns ``(p, P)`` such that for positions ``n >= p`` both sequences
    are periodic with period ``P``.
    """
    p = max(len(x.preperiod), len(y.preperiod))
    P = math.lcm(len(x.period), len(y.period))
    return p, P


def first_divergence(x: UPWord, y: UPWord) -> int | None:
    """First position where the denoted sequences differ, or None if equal.

    Two sequences that agree up to the common preperiod plus one common
    period agree everywhere, so the scan window is finite.
    """
    p, P = combined_shape(x, y)
    for n in range(p + P):
        if x.symbol(n) != y.symbol(n):
            return n
    return None
