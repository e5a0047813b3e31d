"""Bunched typing contexts and their DAG semantics.

Contexts are trees over bindings with two formers: `,` (sequential, no
exchange) and `∥` (parallel, exchange).  A context denotes a DAG over its
ordered bindings (edges are must-use-before constraints) plus a set of
unrestricted bindings; equivalence and the subcontext relation are defined
on that interpretation.  Context patterns are contexts with exactly one
hole; restriction and decomposition rearrange contexts up to the subcontext
relation to isolate the bindings a subterm needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Optional, Union

from .core import CoreType, TraceType, ord_, show_type, unr
from .opm import Opm


# ---------------------------------------------------------------------------
# Bindings and context trees

@dataclass(frozen=True)
class Binding:
    kind: str  # "var" | "loc"
    name: Union[str, int]
    type: CoreType

    def is_unr(self) -> bool:
        return unr(self.type)

    def is_ord(self) -> bool:
        return ord_(self.type)


def var_bind(name: str, t: CoreType) -> Binding:
    return Binding("var", name, t)


def loc_bind(ident: int, index: Any) -> Binding:
    return Binding("loc", ident, TraceType(index))


@dataclass(frozen=True)
class Ctx:
    pass


@dataclass(frozen=True)
class Empty(Ctx):
    pass


@dataclass(frozen=True)
class Bind(Ctx):
    binding: Binding


@dataclass(frozen=True)
class Seq(Ctx):
    left: Ctx
    right: Ctx


@dataclass(frozen=True)
class Par(Ctx):
    left: Ctx
    right: Ctx


@dataclass(frozen=True)
class Hole(Ctx):
    pass


EMPTY = Empty()
HOLE = Hole()


def seq(*parts: Ctx) -> Ctx:
    out: Ctx = EMPTY
    first = True
    for p in parts:
        out = p if first else Seq(out, p)
        first = False
    return out


def par(*parts: Ctx) -> Ctx:
    out: Ctx = EMPTY
    first = True
    for p in parts:
        out = p if first else Par(out, p)
        first = False
    return out


def bindings(ctx: Ctx) -> tuple[Binding, ...]:
    """Leaf bindings left to right (with multiplicity)."""
    if isinstance(ctx, Bind):
        return (ctx.binding,)
    if isinstance(ctx, (Seq, Par)):
        return bindings(ctx.left) + bindings(ctx.right)
    return ()


def hole_count(ctx: Ctx) -> int:
    if isinstance(ctx, Hole):
        return 1
    if isinstance(ctx, (Seq, Par)):
        return hole_count(ctx.left) + hole_count(ctx.right)
    return 0


def is_pattern(ctx: Ctx) -> bool:
    return hole_count(ctx) == 1


def fill(pattern: Ctx, ctx: Ctx) -> Ctx:
    """Plug `ctx` into the unique hole of `pattern`."""
    if isinstance(pattern, Hole):
        return ctx
    if isinstance(pattern, Seq):
        if hole_count(pattern.left):
            return Seq(fill(pattern.left, ctx), pattern.right)
        return Seq(pattern.left, fill(pattern.right, ctx))
    if isinstance(pattern, Par):
        if hole_count(pattern.left):
            return Par(fill(pattern.left, ctx), pattern.right)
        return Par(pattern.left, fill(pattern.right, ctx))
    raise ValueError("pattern has no hole")


def dom_vars(ctx: Ctx) -> frozenset[str]:
    return frozenset(b.name for b in bindings(ctx) if b.kind == "var")


def dom(ctx: Ctx) -> frozenset[tuple[str, Union[str, int]]]:
    return frozenset((b.kind, b.name) for b in bindings(ctx))


def all_unr(ctx: Ctx) -> bool:
    return all(b.is_unr() for b in bindings(ctx))


def lookup_var(ctx: Ctx, name: str) -> Optional[Binding]:
    for b in bindings(ctx):
        if b.kind == "var" and b.name == name:
            return b
    return None


def well_formed(ctx: Ctx) -> bool:
    """Each variable has one type; ordered variable bindings occur at most once."""
    seen: dict[str, CoreType] = {}
    counts: dict[Binding, int] = {}
    for b in bindings(ctx):
        if b.kind != "var":
            continue
        if b.name in seen and seen[b.name] != b.type:
            return False
        seen[b.name] = b.type
        counts[b] = counts.get(b, 0) + 1
        if b.is_ord() and counts[b] > 1:
            return False
    return True


def show_ctx(ctx: Ctx, opm: Opm, prec: int = 0) -> str:
    if isinstance(ctx, Empty):
        return "·"
    if isinstance(ctx, Hole):
        return "[]"
    if isinstance(ctx, Bind):
        b = ctx.binding
        name = b.name if b.kind == "var" else f"l{b.name}"
        return f"{name}:{show_type(b.type, opm, 3)}"
    if isinstance(ctx, Seq):
        s = f"{show_ctx(ctx.left, opm, 1)}, {show_ctx(ctx.right, opm, 1)}"
        return f"({s})" if prec > 0 else s
    if isinstance(ctx, Par):
        s = f"{show_ctx(ctx.left, opm, 2)} ∥ {show_ctx(ctx.right, opm, 2)}"
        return f"({s})" if prec > 1 else s
    raise AssertionError(ctx)


# ---------------------------------------------------------------------------
# Graph representations and interpretation

@dataclass(frozen=True)
class GraphRep:
    n: int
    labels: tuple[Binding, ...]
    edges: frozenset[tuple[int, int]]


@dataclass(frozen=True)
class Interp:
    graph: GraphRep
    unrs: frozenset[Binding]


EMPTY_GRAPH = GraphRep(0, (), frozenset())


def graph_join(g1: GraphRep, g2: GraphRep) -> GraphRep:
    """Disjoint sum plus every edge from a g1 vertex to a g2 vertex."""
    shifted = {(a + g1.n, b + g1.n) for (a, b) in g2.edges}
    cross = {(a, b + g1.n) for a in range(g1.n) for b in range(g2.n)}
    return GraphRep(g1.n + g2.n, g1.labels + g2.labels, g1.edges | shifted | cross)


def graph_union(g1: GraphRep, g2: GraphRep) -> GraphRep:
    shifted = {(a + g1.n, b + g1.n) for (a, b) in g2.edges}
    return GraphRep(g1.n + g2.n, g1.labels + g2.labels, g1.edges | shifted)


@lru_cache(maxsize=None)
def interpret(ctx: Ctx) -> Interp:
    if isinstance(ctx, Empty):
        return Interp(EMPTY_GRAPH, frozenset())
    if isinstance(ctx, Bind):
        b = ctx.binding
        if b.is_unr():
            return Interp(EMPTY_GRAPH, frozenset({b}))
        return Interp(GraphRep(1, (b,), frozenset()), frozenset())
    if isinstance(ctx, Seq):
        i1, i2 = interpret(ctx.left), interpret(ctx.right)
        return Interp(graph_join(i1.graph, i2.graph), i1.unrs | i2.unrs)
    if isinstance(ctx, Par):
        i1, i2 = interpret(ctx.left), interpret(ctx.right)
        return Interp(graph_union(i1.graph, i2.graph), i1.unrs | i2.unrs)
    raise ValueError("cannot interpret a context pattern")


@lru_cache(maxsize=None)
def _label_classes(g: GraphRep) -> dict[Binding, list[int]]:
    classes: dict[Binding, list[int]] = {}
    for i, b in enumerate(g.labels):
        classes.setdefault(b, []).append(i)
    return classes


def _degree_sig(g: GraphRep, i: int) -> tuple[int, int]:
    indeg = sum(1 for (a, b) in g.edges if b == i)
    outdeg = sum(1 for (a, b) in g.edges if a == i)
    return (indeg, outdeg)


@lru_cache(maxsize=None)
def _signature(g: GraphRep) -> tuple:
    return tuple(
        sorted((repr(g.labels[i]), _degree_sig(g, i)) for i in range(g.n))
    )


def _match(g1: GraphRep, g2: GraphRep, exact: bool) -> bool:
    """Search a label-preserving bijection f with f(E1) = E2 (exact) or
    f(E1) ⊆ E2 (spanning embedding)."""
    if g1.n != g2.n:
        return False
    c1, c2 = _label_classes(g1), _label_classes(g2)
    if set(c1) != set(c2) or any(len(c1[k]) != len(c2[k]) for k in c1):
        return False
    if exact and len(g1.edges) != len(g2.edges):
        return False
    if exact and _signature(g1) != _signature(g2):
        return False

    order = sorted(range(g1.n), key=lambda i: len(c1[g1.labels[i]]))
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def consistent(i: int, j: int) -> bool:
        for a, fa in mapping.items():
            if ((a, i) in g1.edges) and ((fa, j) not in g2.edges):
                return False
            if ((i, a) in g1.edges) and ((j, fa) not in g2.edges):
                return False
            if exact:
                if ((fa, j) in g2.edges) and ((a, i) not in g1.edges):
                    return False
                if ((j, fa) in g2.edges) and ((i, a) not in g1.edges):
                    return False
        return True

    def go(k: int) -> bool:
        if k == len(order):
            return True
        i = order[k]
        for j in c2[g1.labels[i]]:
            if j in used or not consistent(i, j):
                continue
            mapping[i] = j
            used.add(j)
            if go(k + 1):
                return True
            del mapping[i]
            used.discard(j)
        return False

    return go(0)


def iso(g1: GraphRep, g2: GraphRep) -> bool:
    """Label- and edge-set-preserving bijection exists."""
    return _match(g1, g2, exact=True)


def spanning_embed(g1: GraphRep, g2: GraphRep) -> bool:
    """Label-preserving bijection carrying E1 into a subset of E2."""
    return _match(g1, g2, exact=False)


def equiv(c1: Ctx, c2: Ctx) -> bool:
    i1, i2 = interpret(c1), interpret(c2)
    return i1.unrs == i2.unrs and iso(i1.graph, i2.graph)


def subcontext(c1: Ctx, c2: Ctx) -> bool:
    """c1 ≲ c2: c2 carries at least c1's ordering edges (up to relabeling)
    and at most its unrestricted bindings."""
    i1, i2 = interpret(c1), interpret(c2)
    return i1.unrs >= i2.unrs and spanning_embed(i1.graph, i2.graph)


# ---------------------------------------------------------------------------
# Restriction and decomposition

def restrict(ctx: Ctx, names: frozenset[str]) -> Ctx:
    """Replace variable bindings outside `names` with the empty context."""
    if isinstance(ctx, Bind):
        b = ctx.binding
        if b.kind == "var" and b.name not in names:
            return EMPTY
        return ctx
    if isinstance(ctx, Seq):
        return Seq(restrict(ctx.left, names), restrict(ctx.right, names))
    if isinstance(ctx, Par):
        return Par(restrict(ctx.left, names), restrict(ctx.right, names))
    if isinstance(ctx, Empty):
        return ctx
    raise ValueError("cannot restrict a context pattern")


# Pattern extractors: partial normalizers up to context equivalence.  The
# hole may be freed from a former only by floating unrestricted neighbours
# (their position in a context is irrelevant).

def pat_right(g: Ctx) -> Optional[Ctx]:
    """Δ with g ≃ (Δ, []): everything in g precedes the hole."""
    if isinstance(g, Hole):
        return EMPTY
    if isinstance(g, Seq):
        if hole_count(g.right):
            d = pat_right(g.right)
            return None if d is None else Seq(g.left, d)
        if all_unr(g.right):
            d = pat_right(g.left)
            return None if d is None else Par(d, g.right)
        return None
    if isinstance(g, Par):
        side, other = (g.left, g.right) if hole_count(g.left) else (g.right, g.left)
        if not all_unr(other):
            return None
        d = pat_right(side)
        return None if d is None else Par(d, other)
    return None


def pat_left(g: Ctx) -> Optional[Ctx]:
    """Δ with g ≃ ([], Δ): everything in g follows the hole."""
    if isinstance(g, Hole):
        return EMPTY
    if isinstance(g, Seq):
        if hole_count(g.left):
            d = pat_left(g.left)
            return None if d is None else Seq(d, g.right)
        if all_unr(g.left):
            d = pat_left(g.right)
            return None if d is None else Par(g.left, d)
        return None
    if isinstance(g, Par):
        side, other = (g.left, g.right) if hole_count(g.left) else (g.right, g.left)
        if not all_unr(other):
            return None
        d = pat_left(side)
        return None if d is None else Par(d, other)
    return None


def pat_par(g: Ctx) -> Optional[Ctx]:
    """Δ with g ≃ ([] ∥ Δ): nothing in g is ordered against the hole."""
    if isinstance(g, Hole):
        return EMPTY
    if isinstance(g, Par):
        if hole_count(g.left):
            d = pat_par(g.left)
            return None if d is None else Par(d, g.right)
        d = pat_par(g.right)
        return None if d is None else Par(g.left, d)
    if isinstance(g, Seq):
        side, other = (g.left, g.right) if hole_count(g.left) else (g.right, g.left)
        if not all_unr(other):
            return None
        d = pat_par(side)
        return None if d is None else Par(d, other)
    return None


def pat_closed(g: Ctx) -> Optional[tuple[Ctx, Ctx]]:
    """(Δ1, Δ2) with g ≃ (Δ1, [], Δ2)."""
    if isinstance(g, Hole):
        return (EMPTY, EMPTY)
    if isinstance(g, Seq):
        if hole_count(g.left):
            r = pat_closed(g.left)
            return None if r is None else (r[0], Seq(r[1], g.right))
        r = pat_closed(g.right)
        return None if r is None else (Seq(g.left, r[0]), r[1])
    if isinstance(g, Par):
        side, other = (g.left, g.right) if hole_count(g.left) else (g.right, g.left)
        if not all_unr(other):
            return None
        r = pat_closed(side)
        return None if r is None else (Par(r[0], other), r[1])
    return None


def decompose(ctx: Ctx, names: frozenset[str]) -> Optional[tuple[Ctx, Ctx]]:
    """Split `ctx` into a pattern G and a context Γ' with ctx ≲ G[Γ'],
    dom(Γ') ⊆ names, and names disjoint from G's ordered variables.

    Fails (None) when the named bindings are inseparably interleaved with
    others.  Clauses are tried in a fixed order, so the result is
    deterministic; unrestricted named bindings appear in both parts.
    """
    if isinstance(ctx, Empty):
        return (HOLE, EMPTY)
    if isinstance(ctx, Bind):
        b = ctx.binding
        if b.kind != "var" or b.name not in names:
            return (Par(HOLE, ctx), EMPTY)
        if b.is_ord():
            return (HOLE, ctx)
        return (Par(HOLE, ctx), ctx)
    if isinstance(ctx, Seq):
        g1, g2 = ctx.left, ctx.right
        if not (dom_vars(g1) & names):
            r = decompose(g2, names)
            if r is not None:
                return (Seq(g1, r[0]), r[1])
        if not (dom_vars(g2) & names):
            r = decompose(g1, names)
            if r is not None:
                return (Seq(r[0], g2), r[1])
        r1, r2 = decompose(g1, names), decompose(g2, names)
        if r1 is not None and r2 is not None:
            gr, gl = pat_right(r1[0]), pat_left(r2[0])
            if gr is not None and gl is not None:
                return (Seq(gr, Seq(HOLE, gl)), Seq(r1[1], r2[1]))
        return None
    if isinstance(ctx, Par):
        g1, g2 = ctx.left, ctx.right
        if not (dom_vars(g1) & names):
            r = decompose(g2, names)
            if r is not None:
                return (Par(g1, r[0]), r[1])
        if not (dom_vars(g2) & names):
            r = decompose(g1, names)
            if r is not None:
                return (Par(r[0], g2), r[1])
        r1, r2 = decompose(g1, names), decompose(g2, names)
        if r1 is None or r2 is None:
            return None
        (p1, c1), (p2, c2) = r1, r2
        a1, a2 = pat_par(p1), pat_par(p2)
        if a1 is not None and a2 is not None:
            return (Par(Par(a1, a2), HOLE), Par(c1, c2))
        l1, l2 = pat_left(p1), pat_left(p2)
        if l1 is not None and l2 is not None:
            return (Seq(HOLE, Par(l1, l2)), Par(c1, c2))
        q1, q2 = pat_right(p1), pat_right(p2)
        if q1 is not None and q2 is not None:
            return (Seq(Par(q1, q2), HOLE), Par(c1, c2))
        if q1 is not None and l2 is not None:
            return (Seq(q1, Seq(HOLE, l2)), Seq(c2, c1))
        if l1 is not None and q2 is not None:
            return (Seq(q2, Seq(HOLE, l1)), Seq(c1, c2))
        k1, k2 = pat_closed(p1), pat_closed(p2)
        if k1 is not None and k2 is not None:
            return (
                Seq(Par(k1[0], k2[0]), Seq(HOLE, Par(k1[1], k2[1]))),
                Par(c1, c2),
            )
        return None
    raise ValueError("cannot decompose a context pattern")


# ---------------------------------------------------------------------------
# Runtime-context utilities backing the heap oracles

def focus(ctx: Ctx, ident: int) -> Ctx:
    """Erase every location binding except those for `ident`."""
    if isinstance(ctx, Bind):
        b = ctx.binding
        if b.kind != "loc":
            raise ValueError("focus applies to runtime contexts only")
        return ctx if b.name == ident else EMPTY
    if isinstance(ctx, Seq):
        return Seq(focus(ctx.left, ident), focus(ctx.right, ident))
    if isinstance(ctx, Par):
        return Par(focus(ctx.left, ident), focus(ctx.right, ident))
    if isinstance(ctx, Empty):
        return ctx
    raise ValueError("cannot focus a context pattern")


def unique_topological_ordering(g: GraphRep) -> Optional[tuple[int, ...]]:
    """The topological ordering when exactly one exists, else None."""
    indeg = {i: 0 for i in range(g.n)}
    out: dict[int, list[int]] = {i: [] for i in range(g.n)}
    for a, b in g.edges:
        out[a].append(b)
        indeg[b] += 1
    ready = [i for i in range(g.n) if indeg[i] == 0]
    order: list[int] = []
    while ready:
        if len(ready) > 1:
            return None
        cur = ready.pop()
        order.append(cur)
        for nxt in out[cur]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
    if len(order) != g.n:
        raise ValueError("graph representation has a cycle")
    return tuple(order)


def usage_projection(ctx: Ctx, opm: Opm) -> Optional[Any]:
    """Fold OPM multiplication over the bindings in the unique topological
    order of the interpretation; None if the order is ambiguous or some
    product is undefined."""
    g = interpret(ctx).graph
    order = unique_topological_ordering(g)
    if order is None:
        return None
    acc = opm.unit()
    for i in order:
        t = g.labels[i].type
        assert isinstance(t, TraceType)
        acc = opm.mul(acc, t.index)
        if acc is None:
            return None
    return acc


def to_dot(interp: Interp, opm: Opm, title: str = "context") -> str:
    """DOT rendering: ordered bindings as vertices, unrestricted set as a legend."""
    lines = [f'digraph "{title}" {{']
    g = interp.graph
    for i, b in enumerate(g.labels):
        name = b.name if b.kind == "var" else f"l{b.name}"
        lines.append(f'  n{i} [label="{name}:{show_type(b.type, opm, 3)}"];')
    for a, b in sorted(g.edges):
        lines.append(f"  n{a} -> n{b};")
    if interp.unrs:
        legend = "\\n".join(
            sorted(
                f"{b.name if b.kind == 'var' else 'l%d' % b.name}:"
                f"{show_type(b.type, opm, 3)}"
                for b in interp.unrs
            )
        )
        lines.append(f'  unrestricted [shape=box, label="unrestricted\\n{legend}"];')
    lines.append("}")
    return "\n".join(lines)
