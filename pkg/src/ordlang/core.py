"""Core calculus: constants, terms, types, effects, and term utilities.

Four abstraction/application modes (plain, unordered capture, right, left),
two pair modes (unordered ⊗, ordered ⊙), trace types indexed by OPM
elements, and a 0/1 effect lattice.  Core terms are produced by elaboration
or by test builders; there is no core parser.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .opm import Opm

# Abstraction/application/arrow modes.
PLAIN = "u"
UNORD = "o"
RIGHT = "r"
LEFT = "l"
MODES = (PLAIN, UNORD, RIGHT, LEFT)

Effect = int  # 0 or 1; join is max


# ---------------------------------------------------------------------------
# Types

@dataclass(frozen=True)
class CoreType:
    pass


@dataclass(frozen=True)
class UnitType(CoreType):
    pass


@dataclass(frozen=True)
class TraceType(CoreType):
    index: Any  # OPM element


@dataclass(frozen=True)
class ArrowType(CoreType):
    mode: str
    param: CoreType
    result: CoreType
    effect: Effect


@dataclass(frozen=True)
class ProdType(CoreType):
    ordered: bool
    left: CoreType
    right: CoreType


UNIT_T = UnitType()


def unr(t: CoreType) -> bool:
    """Unrestricted types contain no resource and no capturing function."""
    if isinstance(t, UnitType):
        return True
    if isinstance(t, ArrowType):
        return t.mode == PLAIN
    if isinstance(t, ProdType):
        return unr(t.left) and unr(t.right)
    return False


def ord_(t: CoreType) -> bool:
    if isinstance(t, TraceType):
        return True
    if isinstance(t, ArrowType):
        return t.mode != PLAIN
    if isinstance(t, ProdType):
        return ord_(t.left) or ord_(t.right)
    return False


def types_equal(a: CoreType, b: CoreType, opm: Opm) -> bool:
    """Structural type equality with indices compared by OPM equality."""
    if isinstance(a, UnitType) and isinstance(b, UnitType):
        return True
    if isinstance(a, TraceType) and isinstance(b, TraceType):
        return opm.eq(a.index, b.index)
    if isinstance(a, ArrowType) and isinstance(b, ArrowType):
        return (
            a.mode == b.mode
            and a.effect == b.effect
            and types_equal(a.param, b.param, opm)
            and types_equal(a.result, b.result, opm)
        )
    if isinstance(a, ProdType) and isinstance(b, ProdType):
        return (
            a.ordered == b.ordered
            and types_equal(a.left, b.left, opm)
            and types_equal(a.right, b.right, opm)
        )
    return False


ARROW_MARK = {PLAIN: "", UNORD: "°", RIGHT: ">", LEFT: "<"}


def show_type(t: CoreType, opm: Opm, prec: int = 0) -> str:
    if isinstance(t, UnitType):
        return "Unit"
    if isinstance(t, TraceType):
        return "[" + opm.show_element(t.index) + "]"
    if isinstance(t, ProdType):
        op = ".o" if t.ordered else "ox"
        s = f"{show_type(t.left, opm, 2)} {op} {show_type(t.right, opm, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(t, ArrowType):
        s = (
            f"{show_type(t.param, opm, 1)} "
            f"-[{t.mode} {t.effect}]-> {show_type(t.result, opm, 0)}"
        )
        return f"({s})" if prec > 0 else s
    raise AssertionError(t)


# ---------------------------------------------------------------------------
# Terms

@dataclass(frozen=True)
class CoreTerm:
    pass


@dataclass(frozen=True)
class UnitConst(CoreTerm):
    pass


@dataclass(frozen=True)
class NewConst(CoreTerm):
    index: Any


@dataclass(frozen=True)
class OpConst(CoreTerm):
    index: Any


@dataclass(frozen=True)
class SplitConst(CoreTerm):
    head: Any
    rest: Any


@dataclass(frozen=True)
class DropConst(CoreTerm):
    pass


@dataclass(frozen=True)
class Loc(CoreTerm):
    ident: int


@dataclass(frozen=True)
class Var(CoreTerm):
    name: str


@dataclass(frozen=True)
class Lam(CoreTerm):
    mode: str
    var: str
    body: CoreTerm


@dataclass(frozen=True)
class App(CoreTerm):
    mode: str
    fn: CoreTerm
    arg: CoreTerm


@dataclass(frozen=True)
class Pair(CoreTerm):
    ordered: bool
    left: CoreTerm
    right: CoreTerm


@dataclass(frozen=True)
class LetPair(CoreTerm):
    ordered: bool
    x: str
    y: str
    header: CoreTerm
    body: CoreTerm

    def __post_init__(self) -> None:
        if self.x == self.y:
            raise ValueError("let-pair binders must be distinct")


UNIT = UnitConst()
DROP = DropConst()


def is_constant(m: CoreTerm) -> bool:
    return isinstance(m, (UnitConst, NewConst, OpConst, SplitConst, DropConst))


def is_value(m: CoreTerm) -> bool:
    if is_constant(m) or isinstance(m, (Loc, Lam)):
        return True
    if isinstance(m, Pair):
        return is_value(m.left) and is_value(m.right)
    return False


def fv(m: CoreTerm) -> frozenset[str]:
    if isinstance(m, Var):
        return frozenset({m.name})
    if isinstance(m, Lam):
        return fv(m.body) - {m.var}
    if isinstance(m, App):
        return fv(m.fn) | fv(m.arg)
    if isinstance(m, Pair):
        return fv(m.left) | fv(m.right)
    if isinstance(m, LetPair):
        return fv(m.header) | (fv(m.body) - {m.x, m.y})
    return frozenset()


def locations(m: CoreTerm) -> tuple[int, ...]:
    """All location occurrences, with multiplicity."""
    if isinstance(m, Loc):
        return (m.ident,)
    if isinstance(m, Lam):
        return locations(m.body)
    if isinstance(m, App):
        return locations(m.fn) + locations(m.arg)
    if isinstance(m, Pair):
        return locations(m.left) + locations(m.right)
    if isinstance(m, LetPair):
        return locations(m.header) + locations(m.body)
    return ()


def _fresh(base: str, avoid: frozenset[str]) -> str:
    if base not in avoid:
        return base
    i = 0
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def subst(m: CoreTerm, v: CoreTerm, x: str) -> CoreTerm:
    """Capture-avoiding substitution m[v/x]; v must be a value."""
    assert is_value(v), "substitution is only defined for values"
    return _subst(m, v, x, fv(v))


def _subst(m: CoreTerm, v: CoreTerm, x: str, fv_v: frozenset[str]) -> CoreTerm:
    if x not in fv(m):  # void substitution changes nothing, binders included
        return m
    if isinstance(m, Var):
        return v if m.name == x else m
    if isinstance(m, Lam):
        if m.var == x:
            return m
        if m.var in fv_v:
            new = _fresh(m.var, fv_v | fv(m.body) | {x})
            body = _subst(m.body, Var(new), m.var, frozenset({new}))
            return Lam(m.mode, new, _subst(body, v, x, fv_v))
        return Lam(m.mode, m.var, _subst(m.body, v, x, fv_v))
    if isinstance(m, App):
        return App(m.mode, _subst(m.fn, v, x, fv_v), _subst(m.arg, v, x, fv_v))
    if isinstance(m, Pair):
        return Pair(m.ordered, _subst(m.left, v, x, fv_v), _subst(m.right, v, x, fv_v))
    if isinstance(m, LetPair):
        header = _subst(m.header, v, x, fv_v)
        if x in (m.x, m.y):
            return LetPair(m.ordered, m.x, m.y, header, m.body)
        bx, by, body = m.x, m.y, m.body
        if bx in fv_v:
            new = _fresh(bx, fv_v | fv(body) | {x, by})
            body = _subst(body, Var(new), bx, frozenset({new}))
            bx = new
        if by in fv_v:
            new = _fresh(by, fv_v | fv(body) | {x, bx})
            body = _subst(body, Var(new), by, frozenset({new}))
            by = new
        return LetPair(m.ordered, bx, by, header, _subst(body, v, x, fv_v))
    return m


# ---------------------------------------------------------------------------
# Stable pretty-printer (consumed by dump-core golden tests)

APP_OP = {PLAIN: "@", UNORD: "@°", RIGHT: "@>", LEFT: "@<"}
LET_KW = {PLAIN: "let", UNORD: "let°", RIGHT: "let>", LEFT: "let<"}


def pretty(m: CoreTerm, opm: Opm) -> str:
    return _pp(m, opm, 0)


def _pp(m: CoreTerm, opm: Opm, prec: int) -> str:
    # precedence: let/letpair 0 < pair 1 < application 2 < atom 3
    if isinstance(m, UnitConst):
        return "unit"
    if isinstance(m, NewConst):
        return "new_{" + opm.show_element(m.index) + "}"
    if isinstance(m, OpConst):
        return "op_{" + opm.show_element(m.index) + "}"
    if isinstance(m, SplitConst):
        return "split_{" + opm.show_element(m.head) + "," + opm.show_element(m.rest) + "}"
    if isinstance(m, DropConst):
        return "drop"
    if isinstance(m, Loc):
        return f"l{m.ident}"
    if isinstance(m, Var):
        return m.name
    if isinstance(m, Lam):
        s = f"λ{ARROW_MARK[m.mode]}{m.var}. {_pp(m.body, opm, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(m, App):
        # A β-redex shaped like a derived value-let prints as one.
        if isinstance(m.fn, Lam) and m.fn.mode == m.mode:
            s = (
                f"{LET_KW[m.mode]} {m.fn.var} = {_pp(m.arg, opm, 1)} in\n"
                f"{_pp(m.fn.body, opm, 0)}"
            )
            return f"({s})" if prec > 0 else s
        s = f"{_pp(m.fn, opm, 2)} {APP_OP[m.mode]} {_pp(m.arg, opm, 3)}"
        return f"({s})" if prec > 2 else s
    if isinstance(m, Pair):
        op = ".o" if m.ordered else "ox"
        s = f"{_pp(m.left, opm, 2)} {op} {_pp(m.right, opm, 2)}"
        return f"({s})" if prec > 1 else s
    if isinstance(m, LetPair):
        kw = ".o" if m.ordered else "ox"
        s = (
            f"let {m.x} {kw} {m.y} = {_pp(m.header, opm, 1)} in\n"
            f"{_pp(m.body, opm, 0)}"
        )
        return f"({s})" if prec > 0 else s
    raise AssertionError(m)
