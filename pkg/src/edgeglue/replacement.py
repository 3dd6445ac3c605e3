"""Colored multigraphs and edge replacement systems.

An edge replacement system consists of a finite base graph together with
one replacement graph per edge color.  Rewriting repeatedly substitutes
every edge by the replacement graph of its color, attaching the
replacement graph's boundary vertices where the edge used to be.  The
limit of this process is a self-similar topological space; everything in
this package works with the combinatorial side of that construction.

Colors come in two kinds.  A non-loop color has two distinct boundary
vertices (an entry and an exit) in its replacement graph; a loop color
has a single boundary vertex, obtained by identifying the two, and may
only be used on loop edges.  Systems where a color is used both on loops
and on non-loops can be repaired by :func:`normalize_loops`, which splits
the offending color in two.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping

LOOP = "loop"
NONLOOP = "nonloop"

#: Forbidden in edge identifiers so that words over the edge alphabet can
#: be written down unambiguously (space separated, with ``( ... )*`` for
#: periods).
_BAD_ID_CHARS = set("()") | set(" \t\n\r")


class EdgeGlueError(Exception):
    """Base class for errors raised by this package."""


class InvalidSystemError(EdgeGlueError):
    """A replacement system violates a structural invariant."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class NotExpandingError(EdgeGlueError):
    """An operation required an expanding replacement system."""


class LoopColorError(EdgeGlueError):
    """A color is used inconsistently with its declared loop kind."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class Edge:
    """A directed colored edge.  Loops (``src == dst``) are allowed."""

    id: str
    src: str
    dst: str
    color: str

    @property
    def is_loop(self) -> bool:
        return self.src == self.dst


@dataclass(frozen=True)
class ColoredGraph:
    """A finite directed multigraph with colored edges.

    Vertices are identified by strings local to the graph; edge ids are
    required (at the :class:`ReplacementSystem` level) to be globally
    unique because they double as alphabet symbols.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]

    @cached_property
    def edge_by_id(self) -> Mapping[str, Edge]:
        return {e.id: e for e in self.edges}

    @cached_property
    def vertex_set(self) -> frozenset[str]:
        return frozenset(self.vertices)

    def incident(self, vertex: str) -> list[Edge]:
        """Edges having ``vertex`` as an endpoint."""
        return [e for e in self.edges if vertex in (e.src, e.dst)]

    def degree(self, vertex: str) -> int:
        """Number of edge endpoints at ``vertex`` (loops count twice)."""
        return sum((e.src == vertex) + (e.dst == vertex) for e in self.edges)


@dataclass(frozen=True)
class ColorSpec:
    """Declares a color's kind and the boundary vertices of its graph.

    ``iota``/``tau`` are set for non-loop colors, ``lam`` for loop
    colors.  The boundary vertices must belong to the color's replacement
    graph; :func:`validate_system` enforces this.
    """

    id: str
    kind: str  # LOOP or NONLOOP
    iota: str | None = None
    tau: str | None = None
    lam: str | None = None

    @property
    def boundary(self) -> frozenset[str]:
        if self.kind == LOOP:
            return frozenset() if self.lam is None else frozenset({self.lam})
        return frozenset(v for v in (self.iota, self.tau) if v is not None)


@dataclass(frozen=True)
class ReplacementSystem:
    """A base graph plus one replacement graph per declared color."""

    colors: tuple[ColorSpec, ...]
    base: ColoredGraph
    replacements: Mapping[str, ColoredGraph] = field(default_factory=dict)

    @cached_property
    def color_by_id(self) -> Mapping[str, ColorSpec]:
        return {c.id: c for c in self.colors}

    def graph(self, owner: str | None) -> ColoredGraph:
        """The base graph (``owner=None``) or a replacement graph."""
        return self.base if owner is None else self.replacements[owner]

    def graphs(self) -> Iterator[tuple[str | None, ColoredGraph]]:
        """All graphs of the system, base first."""
        yield None, self.base
        for spec in self.colors:
            if spec.id in self.replacements:
                yield spec.id, self.replacements[spec.id]

    @cached_property
    def symbols(self) -> frozenset[str]:
        """The edge alphabet: every edge id of every graph."""
        return frozenset(e.id for _, g in self.graphs() for e in g.edges)

    @cached_property
    def edge_owner(self) -> Mapping[str, str | None]:
        """Map an edge symbol to the graph it belongs to."""
        return {e.id: owner for owner, g in self.graphs() for e in g.edges}

    def edge(self, symbol: str) -> Edge:
        return self.graph(self.edge_owner[symbol]).edge_by_id[symbol]


@dataclass(frozen=True)
class ExpandingReport:
    """Verdicts for the three conditions an expanding system satisfies.

    1. no graph has an isolated vertex;
    2. no replacement graph has an edge joining its two boundary
       vertices (checked for non-loop colors; a loop color has a single
       boundary vertex, and loops sitting on it are legitimate);
    3. every replacement graph has at least two edges and at least one
       vertex besides its boundary vertices.
    """

    no_isolated_vertices: bool
    no_boundary_shortcut: bool
    enough_interior: bool
    isolated: tuple[str, ...] = ()
    shortcuts: tuple[str, ...] = ()
    thin: tuple[str, ...] = ()

    @property
    def expanding(self) -> bool:
        return (
            self.no_isolated_vertices
            and self.no_boundary_shortcut
            and self.enough_interior
        )

    def failures(self) -> list[str]:
        out = []
        out.extend(self.isolated)
        out.extend(self.shortcuts)
        out.extend(self.thin)
        return out


def _owner_name(owner: str | None) -> str:
    return "base graph" if owner is None else f"replacement graph {owner}"


def validate_system(rs: ReplacementSystem) -> list[str]:
    """Check structural invariants; return a list of error messages.

    An empty list means the system is well formed: endpoints exist,
    identifiers are unique (edge ids globally so), every used color is
    declared, every declared color has a replacement graph, and boundary
    vertices match the declared color kind.
    """
    errors = []

    seen_colors = set()
    for spec in rs.colors:
        if spec.id in seen_colors:
            errors.append(f"duplicate color id {spec.id!r}")
        seen_colors.add(spec.id)
        if spec.kind not in (LOOP, NONLOOP):
            errors.append(f"color {spec.id!r} has unknown kind {spec.kind!r}")
            continue
        if spec.kind == NONLOOP:
            if spec.iota is None or spec.tau is None:
                errors.append(f"non-loop color {spec.id!r} must declare iota and tau")
            elif spec.iota == spec.tau:
                errors.append(
                    f"non-loop color {spec.id!r} declares identical boundary "
                    f"vertices {spec.iota!r}"
                )
            if spec.lam is not None:
                errors.append(f"non-loop color {spec.id!r} must not declare lambda")
        else:
            if spec.lam is None:
                errors.append(f"loop color {spec.id!r} must declare lambda")
            if spec.iota is not None or spec.tau is not None:
                errors.append(f"loop color {spec.id!r} must not declare iota/tau")

    declared = {spec.id for spec in rs.colors}
    for c in rs.replacements:
        if c not in declared:
            errors.append(f"replacement graph given for undeclared color {c!r}")
    for c in declared:
        if c not in rs.replacements:
            errors.append(f"color {c!r} has no replacement graph")

    seen_edges: dict[str, str] = {}
    for owner, g in rs.graphs():
        where = _owner_name(owner)
        dup_v = [v for v, n in _counts(g.vertices).items() if n > 1]
        for v in dup_v:
            errors.append(f"duplicate vertex {v!r} in {where}")
        for e in g.edges:
            if not e.id or any(ch in _BAD_ID_CHARS for ch in e.id):
                errors.append(f"edge id {e.id!r} in {where} is empty or contains whitespace/parentheses")
            if e.id in seen_edges:
                errors.append(
                    f"edge id {e.id!r} reused in {where} (already in {seen_edges[e.id]})"
                )
            else:
                seen_edges[e.id] = where
            for v in (e.src, e.dst):
                if v not in g.vertex_set:
                    errors.append(f"edge {e.id!r} in {where} uses missing vertex {v!r}")
            if e.color not in declared:
                errors.append(f"edge {e.id!r} in {where} has undeclared color {e.color!r}")

    for spec in rs.colors:
        g = rs.replacements.get(spec.id)
        if g is None:
            continue
        for v in spec.boundary:
            if v not in g.vertex_set:
                errors.append(
                    f"boundary vertex {v!r} of color {spec.id!r} is not a vertex "
                    f"of its replacement graph"
                )

    return errors


def _counts(items: Iterable[str]) -> dict[str, int]:
    out: dict[str, int] = {}
    for x in items:
        out[x] = out.get(x, 0) + 1
    return out


def check_expanding(rs: ReplacementSystem) -> ExpandingReport:
    """Evaluate the three expanding conditions on a valid system.

    The check is meaningful on the system as originally given, before
    any loop-color normalization; :func:`normalize_loops` never creates
    new violations.
    """
    isolated = []
    for owner, g in rs.graphs():
        for v in g.vertices:
            if g.degree(v) == 0:
                isolated.append(f"isolated vertex {v!r} in {_owner_name(owner)}")

    shortcuts = []
    for spec in rs.colors:
        if spec.kind != NONLOOP or spec.id not in rs.replacements:
            continue
        g = rs.replacements[spec.id]
        for e in g.edges:
            if {e.src, e.dst} == {spec.iota, spec.tau}:
                shortcuts.append(
                    f"edge {e.id!r} joins the boundary vertices of color {spec.id!r}"
                )

    thin = []
    for spec in rs.colors:
        if spec.id not in rs.replacements:
            continue
        g = rs.replacements[spec.id]
        if len(g.edges) < 2:
            thin.append(f"replacement graph {spec.id} has fewer than two edges")
        if not (g.vertex_set - spec.boundary):
            thin.append(f"replacement graph {spec.id} has no interior vertex")

    return ExpandingReport(
        no_isolated_vertices=not isolated,
        no_boundary_shortcut=not shortcuts,
        enough_interior=not thin,
        isolated=tuple(isolated),
        shortcuts=tuple(shortcuts),
        thin=tuple(thin),
    )


def check_loop_assumption(rs: ReplacementSystem) -> list[str]:
    """Check that each color is used only on loops or only on non-loops.

    Usage must also match the declared kind: a loop color on a non-loop
    edge is a violation even if the usage is uniform.  Returns a list of
    violation messages, empty when the assumption holds.
    """
    usage: dict[str, dict[bool, list[str]]] = {}
    for _, g in rs.graphs():
        for e in g.edges:
            usage.setdefault(e.color, {}).setdefault(e.is_loop, []).append(e.id)

    violations = []
    for spec in rs.colors:
        used = usage.get(spec.id, {})
        loops = used.get(True, [])
        nonloops = used.get(False, [])
        if loops and nonloops:
            violations.append(
                f"color {spec.id!r} is used on loops {sorted(loops)} and on "
                f"non-loops {sorted(nonloops)}"
            )
        elif loops and spec.kind == NONLOOP:
            violations.append(
                f"non-loop color {spec.id!r} is used only on loops {sorted(loops)}"
            )
        elif nonloops and spec.kind == LOOP:
            violations.append(
                f"loop color {spec.id!r} is used on non-loop edges {sorted(nonloops)}"
            )
    return violations


# ---------------------------------------------------------------------------
# Loop-color normalization


def _fresh_color_id(existing: set[str]) -> str:
    numeric = [int(c) for c in existing if c.isdigit()]
    if numeric:
        n = max(numeric) + 1
        while str(n) in existing:
            n += 1
        return str(n)
    base = "lp"
    cand = base
    k = 2
    while cand in existing:
        cand = f"{base}{k}"
        k += 1
    return cand


def _fresh_symbols(existing: set[str], count: int) -> list[str]:
    numeric = [int(s) for s in existing if s.isdigit()]
    out: list[str] = []
    if numeric:
        n = max(numeric) + 1
        while len(out) < count:
            if str(n) not in existing:
                out.append(str(n))
                existing.add(str(n))
            n += 1
        return out
    k = 0
    while len(out) < count:
        cand = f"e{k}"
        if cand not in existing:
            out.append(cand)
            existing.add(cand)
        k += 1
    return out


def _fresh_vertex(existing: set[str], base: str) -> str:
    cand = base
    k = 2
    while cand in existing:
        cand = f"{base}{k}"
        k += 1
    existing.add(cand)
    return cand


def normalize_loops(rs: ReplacementSystem) -> tuple[ReplacementSystem, dict[str, str]]:
    """Split colors used on both loops and non-loops; collapse loop boundaries.

    Returns the repaired system together with the recoloring map that
    sends every original edge symbol to its color in the new system.
    Symbols are never renamed; split colors receive a fresh copy of
    their replacement graph (with fresh symbols) for the loop half, on
    which the two boundary vertices are identified into a single one.

    Colors already used uniformly keep their id; a non-loop color used
    only on loops flips to loop kind in place.  Applying the function to
    an already conforming system returns it unchanged with the identity
    recoloring.

    Requires a structurally valid, expanding system: without condition 2
    (no edge joining the boundary vertices) identifying the boundary
    pair could turn an ordinary edge into a loop and change loop-ness of
    symbols mid-flight.
    """
    errors = validate_system(rs)
    if errors:
        raise InvalidSystemError(errors)
    report = check_expanding(rs)
    if not report.expanding:
        raise NotExpandingError(
            "cannot normalize a non-expanding system: " + "; ".join(report.failures())
        )

    for spec in rs.colors:
        if spec.kind == LOOP:
            bad = [
                e.id
                for _, g in rs.graphs()
                for e in g.edges
                if e.color == spec.id and not e.is_loop
            ]
            if bad:
                raise LoopColorError(
                    [f"loop color {spec.id!r} used on non-loop edges {sorted(bad)}"]
                )

    if not check_loop_assumption(rs):
        recoloring = {sym: rs.edge(sym).color for sym in rs.symbols}
        return rs, recoloring

    usage: dict[str, set[bool]] = {spec.id: set() for spec in rs.colors}
    for _, g in rs.graphs():
        for e in g.edges:
            usage[e.color].add(e.is_loop)

    color_ids = {spec.id for spec in rs.colors}
    # loop_name/nonloop_name: where edges of each original color end up.
    loop_name: dict[str, str] = {}
    nonloop_name: dict[str, str] = {}
    split_partner: dict[str, str] = {}  # mixed color -> fresh loop color
    flip_to_loop: set[str] = set()
    for spec in rs.colors:
        used = usage[spec.id]
        if spec.kind == LOOP:
            loop_name[spec.id] = spec.id
        elif used == {True}:
            loop_name[spec.id] = spec.id
            flip_to_loop.add(spec.id)
        elif used == {True, False}:
            fresh = _fresh_color_id(color_ids)
            color_ids.add(fresh)
            split_partner[spec.id] = fresh
            loop_name[spec.id] = fresh
            nonloop_name[spec.id] = spec.id
        else:  # non-loops only, or unused
            nonloop_name[spec.id] = spec.id

    def recolor(e: Edge) -> str:
        return loop_name[e.color] if e.is_loop else nonloop_name[e.color]

    def recolored(g: ColoredGraph, vmap: Mapping[str, str] | None = None,
                  ids: Mapping[str, str] | None = None) -> ColoredGraph:
        vmap = vmap or {}
        ids = ids or {}
        edges = tuple(
            Edge(
                id=ids.get(e.id, e.id),
                src=vmap.get(e.src, e.src),
                dst=vmap.get(e.dst, e.dst),
                color=recolor(e),
            )
            for e in g.edges
        )
        verts: list[str] = []
        for v in g.vertices:
            w = vmap.get(v, v)
            if w not in verts:
                verts.append(w)
        return ColoredGraph(tuple(verts), edges)

    symbols = set(rs.symbols)
    new_colors: list[ColorSpec] = []
    new_replacements: dict[str, ColoredGraph] = {}
    for spec in rs.colors:
        g = rs.replacements[spec.id]
        if spec.id in flip_to_loop:
            # Collapse the boundary pair into a single vertex.
            vset = set(g.vertices) - {spec.iota, spec.tau}
            lam = _fresh_vertex(vset, f"l{spec.id}")
            vmap = {spec.iota: lam, spec.tau: lam}
            new_colors.append(ColorSpec(spec.id, LOOP, lam=lam))
            new_replacements[spec.id] = recolored(g, vmap)
        else:
            new_colors.append(spec if spec.kind == LOOP else spec)
            new_replacements[spec.id] = recolored(g)
        if spec.id in split_partner:
            fresh = split_partner[spec.id]
            ids = dict(zip((e.id for e in g.edges), _fresh_symbols(symbols, len(g.edges))))
            interior = {v: f"{v}_{fresh}" for v in g.vertices if v not in (spec.iota, spec.tau)}
            vset = set(interior.values())
            lam = _fresh_vertex(vset, f"l{fresh}")
            vmap = dict(interior)
            vmap[spec.iota] = lam
            vmap[spec.tau] = lam
            new_colors.append(ColorSpec(fresh, LOOP, lam=lam))
            new_replacements[fresh] = recolored(g, vmap, ids)

    normalized = ReplacementSystem(
        colors=tuple(new_colors),
        base=recolored(rs.base),
        replacements=new_replacements,
    )
    recoloring = {sym: recolor(rs.edge(sym)) for sym in rs.symbols}
    return normalized, recoloring


# ---------------------------------------------------------------------------
# Built-in systems


def builtin(name: str, parameter: int | None = None) -> ReplacementSystem:
    """Return one of the bundled example systems.

    ``interval``, ``basilica`` (loop-normalized, two colors) and
    ``basilica-original`` (single color, violating the loop assumption)
    take no parameter; ``dendrite`` needs the branching order ``n >= 3``.
    """
    if name == "interval":
        if parameter is not None:
            raise ValueError("interval takes no parameter")
        return ReplacementSystem(
            colors=(ColorSpec("1", NONLOOP, iota="i", tau="t"),),
            base=ColoredGraph(("a", "b"), (Edge("S", "a", "b", "1"),)),
            replacements={
                "1": ColoredGraph(
                    ("i", "m", "t"),
                    (Edge("0", "i", "m", "1"), Edge("1", "m", "t", "1")),
                )
            },
        )
    if name == "dendrite":
        if parameter is None or parameter < 3:
            raise ValueError("dendrite needs a branching order n >= 3")
        n = parameter
        tips = [f"s{k}" for k in range(2, n)]
        edges = [Edge("1", "c", "i", "1")]
        edges += [Edge(str(k), "c", f"s{k}", "1") for k in range(2, n)]
        edges.append(Edge(str(n), "c", "t", "1"))
        return ReplacementSystem(
            colors=(ColorSpec("1", NONLOOP, iota="i", tau="t"),),
            base=ColoredGraph(("a", "b"), (Edge("S", "a", "b", "1"),)),
            replacements={
                "1": ColoredGraph(tuple(["i", "c", "t"] + tips), tuple(edges))
            },
        )
    if name == "basilica-original":
        if parameter is not None:
            raise ValueError("basilica-original takes no parameter")
        return ReplacementSystem(
            colors=(ColorSpec("1", NONLOOP, iota="i", tau="t"),),
            base=ColoredGraph(
                ("p",), (Edge("L", "p", "p", "1"), Edge("R", "p", "p", "1"))
            ),
            replacements={
                "1": ColoredGraph(
                    ("i", "m", "t"),
                    (
                        Edge("1", "i", "m", "1"),
                        Edge("2", "m", "m", "1"),
                        Edge("3", "m", "t", "1"),
                    ),
                )
            },
        )
    if name == "basilica":
        if parameter is not None:
            raise ValueError("basilica takes no parameter")
        return ReplacementSystem(
            colors=(
                ColorSpec("1", NONLOOP, iota="i", tau="t"),
                ColorSpec("2", LOOP, lam="l"),
            ),
            base=ColoredGraph(
                ("p",), (Edge("L", "p", "p", "2"), Edge("R", "p", "p", "2"))
            ),
            replacements={
                "1": ColoredGraph(
                    ("i", "m", "t"),
                    (
                        Edge("1", "i", "m", "1"),
                        Edge("2", "m", "m", "2"),
                        Edge("3", "m", "t", "1"),
                    ),
                ),
                "2": ColoredGraph(
                    ("l", "w"),
                    (
                        Edge("4", "l", "w", "1"),
                        Edge("5", "w", "w", "2"),
                        Edge("6", "w", "l", "1"),
                    ),
                ),
            },
        )
    raise ValueError(f"unknown builtin system {name!r}")


BUILTIN_NAMES = ("interval", "dendrite", "basilica-original", "basilica")


# ---------------------------------------------------------------------------
# Isomorphism (used to compare normalization output against references)


def _graph_isomorphic(
    g: ColoredGraph,
    h: ColoredGraph,
    color_map: Mapping[str, str],
    pinned: Mapping[str, str],
) -> bool:
    """Vertex-bijection existence test; edge ids are ignored.

    ``pinned`` forces images of particular vertices (boundary vertices
    must correspond).  Brute force; intended for the small graphs of
    replacement systems.
    """
    if len(g.vertices) != len(h.vertices) or len(g.edges) != len(h.edges):
        return False
    for v, w in pinned.items():
        if v not in g.vertex_set or w not in h.vertex_set:
            return False

    def signature(graph: ColoredGraph, recolor=None):
        sig: dict[str, list] = {v: [] for v in graph.vertices}
        for e in graph.edges:
            c = recolor(e.color) if recolor else e.color
            sig[e.src].append(("out", c))
            sig[e.dst].append(("in", c))
        return {v: tuple(sorted(s)) for v, s in sig.items()}

    sig_g = signature(g, lambda c: color_map[c])
    sig_h = signature(h)

    free = [v for v in g.vertices if v not in pinned]
    h_used = set(pinned.values())
    if len(h_used) != len(pinned):
        return False
    h_free = [w for w in h.vertices if w not in h_used]

    def edge_multiset(graph: ColoredGraph, vmap, recolor=None):
        out = []
        for e in graph.edges:
            c = recolor(e.color) if recolor else e.color
            out.append((vmap[e.src], vmap[e.dst], c))
        return sorted(out)

    target = edge_multiset(h, {v: v for v in h.vertices})

    for perm in itertools.permutations(h_free, len(free)):
        vmap = dict(pinned)
        vmap.update(zip(free, perm))
        if any(sig_g[v] != sig_h[vmap[v]] for v in g.vertices):
            continue
        if edge_multiset(g, vmap, lambda c: color_map[c]) == target:
            return True
    return False


def systems_isomorphic(a: ReplacementSystem, b: ReplacementSystem) -> bool:
    """Whether two systems coincide up to renaming colors, vertices and edges.

    Boundary structure must be preserved: iota maps to iota, tau to tau,
    lambda to lambda.  Exponential in the worst case, fine at the sizes
    this package deals with.
    """
    if len(a.colors) != len(b.colors):
        return False
    a_ids = [c.id for c in a.colors]
    b_by_kind: dict[str, list[str]] = {}
    for c in b.colors:
        b_by_kind.setdefault(c.kind, []).append(c.id)

    for perm in itertools.permutations([c.id for c in b.colors]):
        color_map = dict(zip(a_ids, perm))
        if any(
            a.color_by_id[x].kind != b.color_by_id[y].kind
            for x, y in color_map.items()
        ):
            continue
        if not _graph_isomorphic(a.base, b.base, color_map, {}):
            continue
        ok = True
        for x, y in color_map.items():
            sa, sb = a.color_by_id[x], b.color_by_id[y]
            if sa.kind == NONLOOP:
                pinned = {sa.iota: sb.iota, sa.tau: sb.tau}
            else:
                pinned = {sa.lam: sb.lam}
            if not _graph_isomorphic(
                a.replacements[x], b.replacements[y], color_map, pinned
            ):
                ok = False
                break
        if ok:
            return True
    return False
