"""Graph expansions, adjacency of addressed edges, and the gluing oracle.

The full expansion at depth ``m`` substitutes every edge by its color's
replacement graph, ``m`` times over; its edges are addressed by words of
length ``m + 1``.  Building it explicitly is exponential, so besides the
explicit construction (:func:`full_expansion`, used as ground truth in
tests) this module provides :class:`PairWalk`, which follows just two
addressed edges and keeps track of how their endpoints are identified.

That local tracking is sound because one expansion step only ever adds
fresh interior vertices and re-attaches boundary copies onto the parent
edge's existing endpoints: vertices incident to the two tracked edges
can never become identified through the expansion of some third edge.
A consequence used by :func:`oracle_glued` is that adjacency is downward
monotone after the two addresses diverge (once the tracked edges share
no vertex they never will again); the test suite validates this
empirically against full expansions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Sequence

from .colorgraph import (
    UPWord,
    WordError,
    build_color_graph,
    combined_shape,
    first_divergence,
    is_edge_word,
    is_symbol_sequence,
)
from .replacement import (
    ColoredGraph,
    ColorSpec,
    EdgeGlueError,
    LOOP,
    NONLOOP,
    ReplacementSystem,
)

Address = tuple[str, ...]


class DepthCapError(EdgeGlueError):
    """A requested expansion depth exceeds the configured cap."""


class Incidence(Enum):
    """How an edge meets a shared vertex, or how two edges are parallel.

    ``IN``/``OUT``/``LOOP`` say that the edge enters, leaves or loops at
    the single shared vertex.  ``PARALLEL``/``ANTIPARALLEL`` cover the
    two-shared-vertices case: a pair of non-loop edges with the same,
    respectively opposite, orientation.
    """

    IN = "in"
    OUT = "out"
    LOOP = "lp"
    PARALLEL = "db+"
    ANTIPARALLEL = "db-"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Adjacency:
    """Shared-vertex pattern of an ordered pair of edges.

    ``first``/``second`` classify each edge's incidence on the shared
    structure (``None`` when the edges share nothing).  ``shared`` lists
    which endpoint pairs coincide, as two-letter codes over ``i``/``t``
    (first letter for the first edge): ``"it"`` means the first edge's
    initial vertex equals the second edge's terminal vertex.  Together
    with the loop flags this determines the full equality pattern of the
    four endpoints.

    Antiparallel pairs classify as ``(PARALLEL, ANTIPARALLEL)`` in both
    argument orders; which concrete identifications hold can be read off
    ``shared``.
    """

    first: Incidence | None
    second: Incidence | None
    shared: frozenset[str]
    first_loop: bool
    second_loop: bool

    @property
    def adjacent(self) -> bool:
        return self.first is not None

    @property
    def pair(self) -> tuple[Incidence, Incidence] | None:
        if self.first is None:
            return None
        return (self.first, self.second)

    def swapped(self) -> Adjacency:
        flip = {"ii": "ii", "it": "ti", "ti": "it", "tt": "tt"}
        first, second = self.second, self.first
        if {first, second} == {Incidence.PARALLEL, Incidence.ANTIPARALLEL}:
            first, second = Incidence.PARALLEL, Incidence.ANTIPARALLEL
        return Adjacency(
            first=first,
            second=second,
            shared=frozenset(flip[s] for s in self.shared),
            first_loop=self.second_loop,
            second_loop=self.first_loop,
        )

    def __str__(self) -> str:
        if not self.adjacent:
            return "not-adjacent"
        return f"({self.first}, {self.second})"


def classify_endpoints(
    ia: Hashable, ta: Hashable, ib: Hashable, tb: Hashable
) -> Adjacency:
    """Classify two edges given their endpoint identities.

    Endpoints may be any comparable tokens; equality of tokens means the
    vertices are identified.
    """
    eq = {
        "ii": ia == ib,
        "it": ia == tb,
        "ti": ta == ib,
        "tt": ta == tb,
    }
    shared = frozenset(k for k, v in eq.items() if v)
    loop_a = ia == ta
    loop_b = ib == tb

    def result(first, second):
        return Adjacency(first, second, shared, loop_a, loop_b)

    if not shared:
        return result(None, None)
    if loop_a and loop_b:
        return result(Incidence.LOOP, Incidence.LOOP)
    if loop_a:
        second = Incidence.IN if ta == tb else Incidence.OUT
        return result(Incidence.LOOP, second)
    if loop_b:
        first = Incidence.IN if ta == tb or ta == ib else Incidence.OUT
        return result(first, Incidence.LOOP)
    common = {ia, ta} & {ib, tb}
    if len(common) == 2:
        if eq["ii"] and eq["tt"]:
            return result(Incidence.PARALLEL, Incidence.PARALLEL)
        return result(Incidence.PARALLEL, Incidence.ANTIPARALLEL)
    v = common.pop()
    first = Incidence.OUT if ia == v else Incidence.IN
    second = Incidence.OUT if ib == v else Incidence.IN
    return result(first, second)


def classify_local(
    rs: ReplacementSystem, owner: str | None, a: str, b: str
) -> Adjacency:
    """Adjacency of two distinct edges inside one graph of the system."""
    if a == b:
        raise ValueError("classify_local needs two distinct edges")
    g = rs.graph(owner)
    ea = g.edge_by_id[a]
    eb = g.edge_by_id[b]
    return classify_endpoints(ea.src, ea.dst, eb.src, eb.dst)


# ---------------------------------------------------------------------------
# Explicit full expansions


class DisjointSet:
    """Union-find over arbitrary hashable elements, with path compression."""

    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        parent = self.parent
        if x not in parent:
            parent[x] = x
            return x
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[ry] = rx
        return rx


@dataclass(frozen=True)
class ExpandedEdge:
    address: Address
    src: int
    dst: int
    color: str


@dataclass(frozen=True)
class ExpandedGraph:
    """The depth-``m`` full expansion, with dense vertex-class ids."""

    depth: int
    edges: tuple[ExpandedEdge, ...]
    vertex_count: int

    @property
    def addresses(self) -> list[Address]:
        return [e.address for e in self.edges]

    def edge(self, address: Address) -> ExpandedEdge:
        return self._by_address[address]

    @property
    def _by_address(self):
        cached = self.__dict__.get("_by_address_cache")
        if cached is None:
            cached = {e.address: e for e in self.edges}
            self.__dict__["_by_address_cache"] = cached
        return cached

    def iota(self, address: Address) -> int:
        return self.edge(address).src

    def tau(self, address: Address) -> int:
        return self.edge(address).dst

    def adjacency(self, x: Address, y: Address) -> Adjacency:
        ex, ey = self.edge(x), self.edge(y)
        return classify_endpoints(ex.src, ex.dst, ey.src, ey.dst)


DEFAULT_DEPTH_CAP = 12


def full_expansion(
    rs: ReplacementSystem, depth: int, cap: int = DEFAULT_DEPTH_CAP
) -> ExpandedGraph:
    """Expand every edge, ``depth`` times, starting from the base graph.

    Edges are addressed by words of length ``depth + 1``; vertex classes
    are maintained with a union-find over named vertex copies (address
    prefix plus local vertex id).  Raises :class:`DepthCapError` beyond
    ``cap``, since edge counts grow exponentially.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth > cap:
        raise DepthCapError(f"depth {depth} exceeds cap {cap}")

    dsu = DisjointSet()
    # (address-prefix, local vertex id) names a vertex copy.
    edges = [
        ((e.id,), ((), e.src), ((), e.dst), e.color) for e in rs.base.edges
    ]
    for v in rs.base.vertices:
        dsu.find(((), v))

    for _ in range(depth):
        nxt = []
        for addr, src_el, dst_el, color in edges:
            spec = rs.color_by_id[color]
            g = rs.replacements[color]
            if spec.kind == NONLOOP:
                dsu.union(src_el, (addr, spec.iota))
                dsu.union(dst_el, (addr, spec.tau))
            else:
                dsu.union(src_el, (addr, spec.lam))
                dsu.union(dst_el, (addr, spec.lam))
            for e in g.edges:
                nxt.append(
                    (addr + (e.id,), (addr, e.src), (addr, e.dst), e.color)
                )
        edges = nxt

    names: dict = {}

    def dense(el) -> int:
        root = dsu.find(el)
        if root not in names:
            names[root] = len(names)
        return names[root]

    out = tuple(
        ExpandedEdge(addr, dense(src_el), dense(dst_el), color)
        for addr, src_el, dst_el, color in edges
    )
    return ExpandedGraph(depth=depth, edges=out, vertex_count=len(names))


# ---------------------------------------------------------------------------
# Walk-local tracking of two addressed edges


class PairWalk:
    """Track the endpoints of two addressed edges without full expansion.

    Endpoints are abstract integer tokens; two tokens are equal exactly
    when the corresponding vertex classes of the full expansion
    coincide.  Each :meth:`advance` performs one expansion step on the
    tracked edges only: fresh tokens for interior vertices, boundary
    copies glued onto the previous endpoints.  While the two addresses
    are still equal a single shared copy is used, so the step at which
    they first diverge lands both edges in the same replacement-graph
    copy, as it should.
    """

    def __init__(self, rs: ReplacementSystem, x0: str, y0: str):
        self.rs = rs
        self._fresh = itertools.count()
        token = {v: next(self._fresh) for v in rs.base.vertices}
        ex = rs.base.edge_by_id[x0]
        ey = rs.base.edge_by_id[y0]
        self.a = (token[ex.src], token[ex.dst])
        self.b = (token[ey.src], token[ey.dst])
        self.equal_address = x0 == y0
        self.last = (x0, y0)

    def _glue(self, spec: ColorSpec, g: ColoredGraph, ends) -> dict[str, int]:
        vmap: dict[str, int] = {}
        if spec.kind == NONLOOP:
            vmap[spec.iota] = ends[0]
            vmap[spec.tau] = ends[1]
        else:
            if ends[0] != ends[1]:
                raise WordError(
                    f"loop color {spec.id!r} expanded on a non-loop edge"
                )
            vmap[spec.lam] = ends[0]
        for v in g.vertices:
            if v not in vmap:
                vmap[v] = next(self._fresh)
        return vmap

    def advance(self, xs: str, ys: str) -> None:
        rs = self.rs
        cx = rs.edge(self.last[0]).color
        gx = rs.replacements[cx]
        if self.equal_address:
            vmap = self._glue(rs.color_by_id[cx], gx, self.a)
            ex = gx.edge_by_id[xs]
            ey = gx.edge_by_id[ys]
            self.a = (vmap[ex.src], vmap[ex.dst])
            self.b = (vmap[ey.src], vmap[ey.dst])
            self.equal_address = xs == ys
        else:
            cy = rs.edge(self.last[1]).color
            gy = rs.replacements[cy]
            vx = self._glue(rs.color_by_id[cx], gx, self.a)
            vy = self._glue(rs.color_by_id[cy], gy, self.b)
            ex = gx.edge_by_id[xs]
            ey = gy.edge_by_id[ys]
            self.a = (vx[ex.src], vx[ex.dst])
            self.b = (vy[ey.src], vy[ey.dst])
        self.last = (xs, ys)

    def descriptor(self) -> Adjacency:
        return classify_endpoints(self.a[0], self.a[1], self.b[0], self.b[1])


def adjacency(
    rs: ReplacementSystem, x: Sequence[str], y: Sequence[str]
) -> Adjacency:
    """Shared-vertex pattern of two equal-length addressed edges.

    Computed by walking both addresses in lockstep; agrees with reading
    the full expansion at depth ``len(x) - 1``.
    """
    x = tuple(x)
    y = tuple(y)
    if len(x) != len(y):
        raise WordError("addresses must have equal length")
    if not x:
        raise WordError("addresses must be nonempty")
    cg = build_color_graph(rs)
    for w in (x, y):
        if not is_edge_word(cg, w):
            raise WordError(f"{' '.join(w)!r} is not an edge address")
    walk = PairWalk(rs, x[0], y[0])
    for i in range(1, len(x)):
        walk.advance(x[i], y[i])
    return walk.descriptor()


# ---------------------------------------------------------------------------
# Brute-force gluing oracle


@dataclass(frozen=True)
class GluingCertificate:
    """Outcome of the oracle, with the descriptor trace backing it."""

    glued: bool
    equal: bool
    divergence: int | None
    descriptors: tuple[Adjacency, ...]
    cycle_start: int | None = None
    failed_at: int | None = None


_SAFETY_STEPS = 4096


def oracle_glued(rs: ReplacementSystem, x: UPWord, y: UPWord) -> GluingCertificate:
    """Decide whether two sequences are glued, by direct expansion.

    Equal sequences are glued.  Otherwise the two tracked edges must
    share a vertex at the divergence step and at every step afterwards;
    the verdict becomes positive once the (descriptor, phase-in-period)
    pair repeats, and negative the first time the descriptor reports no
    shared vertex.  The descriptor together with the next pair of
    symbols determines the next descriptor, and adjacency, once lost,
    never returns, so both stopping rules are sound.

    This decision procedure is independent of the gluing automaton and
    serves as its differential-testing oracle.
    """
    cg = build_color_graph(rs)
    for w in (x, y):
        if not is_symbol_sequence(cg, w):
            raise WordError(f"{w} does not denote a point of the symbol space")

    x = x.canonical()
    y = y.canonical()
    m = first_divergence(x, y)
    if m is None:
        return GluingCertificate(glued=True, equal=True, divergence=None, descriptors=())

    p, period = combined_shape(x, y)
    walk = PairWalk(rs, x.symbol(0), y.symbol(0))
    descriptors: list[Adjacency] = []
    seen: dict[tuple[Adjacency, int], int] = {}
    n = 0
    while n < _SAFETY_STEPS:
        if n >= m:
            d = walk.descriptor()
            descriptors.append(d)
            if not d.adjacent:
                return GluingCertificate(
                    glued=False,
                    equal=False,
                    divergence=m,
                    descriptors=tuple(descriptors),
                    failed_at=n,
                )
            if n >= p:
                key = (d, n % period)
                if key in seen:
                    return GluingCertificate(
                        glued=True,
                        equal=False,
                        divergence=m,
                        descriptors=tuple(descriptors),
                        cycle_start=seen[key],
                    )
                seen[key] = len(descriptors) - 1
        n += 1
        walk.advance(x.symbol(n), y.symbol(n))
    raise AssertionError("oracle failed to terminate within the safety bound")
