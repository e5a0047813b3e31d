"""Concrete surface language: lexer, parser, surface AST, pretty-printer.

The surface language is bidirectional: lambdas (which only arise from
function-definition lets) are checkable, everything else is inferable.
Resource literals `{...}` are parsed by the active OPM, so one grammar
serves every index algebra.  File extension: `.ord`; comments run from
`--` to end of line.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .core import ArrowType, CoreType, ProdType, TraceType, UNIT_T
from .opm import Opm, OpmError


@dataclass(frozen=True)
class Span:
    line: int
    col: int
    end_line: int
    end_col: int

    def cover(self, other: "Span") -> "Span":
        a = min((self.line, self.col), (other.line, other.col))
        b = max((self.end_line, self.end_col), (other.end_line, other.end_col))
        return Span(a[0], a[1], b[0], b[1])

    def contains(self, other: "Span") -> bool:
        return (self.line, self.col) <= (other.line, other.col) and (
            (other.end_line, other.end_col) <= (self.end_line, self.end_col)
        )


class ParseError(Exception):
    def __init__(self, message: str, span: Span, expected: tuple[str, ...] = ()):
        super().__init__(message)
        self.message = message
        self.span = span
        self.expected = expected


# ---------------------------------------------------------------------------
# Surface AST

@dataclass(frozen=True)
class SurfaceExpr:
    span: Span


@dataclass(frozen=True)
class SUnit(SurfaceExpr):
    pass


@dataclass(frozen=True)
class SNew(SurfaceExpr):
    index: object


@dataclass(frozen=True)
class SOp(SurfaceExpr):
    index: object
    arg: SurfaceExpr


@dataclass(frozen=True)
class SSplit(SurfaceExpr):
    index: object
    arg: SurfaceExpr


@dataclass(frozen=True)
class SDrop(SurfaceExpr):
    arg: SurfaceExpr


@dataclass(frozen=True)
class SVar(SurfaceExpr):
    name: str


@dataclass(frozen=True)
class SApp(SurfaceExpr):
    fn: SurfaceExpr
    arg: SurfaceExpr


@dataclass(frozen=True)
class SPair(SurfaceExpr):
    left: SurfaceExpr
    right: SurfaceExpr


@dataclass(frozen=True)
class SLetPair(SurfaceExpr):
    x: str
    y: str
    header: SurfaceExpr
    body: SurfaceExpr


@dataclass(frozen=True)
class SLet(SurfaceExpr):
    """Value let with inferred binding mode (not part of the kernel grammar)."""

    x: str
    header: SurfaceExpr
    body: SurfaceExpr


@dataclass(frozen=True)
class SSeq(SurfaceExpr):
    first: SurfaceExpr
    rest: SurfaceExpr


@dataclass(frozen=True)
class SAnn(SurfaceExpr):
    expr: SurfaceExpr
    type: CoreType


@dataclass(frozen=True)
class SLam(SurfaceExpr):
    var: str
    body: SurfaceExpr


def surface_fv(e: SurfaceExpr) -> frozenset[str]:
    if isinstance(e, SVar):
        return frozenset({e.name})
    if isinstance(e, (SUnit, SNew)):
        return frozenset()
    if isinstance(e, (SOp, SSplit)):
        return surface_fv(e.arg)
    if isinstance(e, SDrop):
        return surface_fv(e.arg)
    if isinstance(e, SApp):
        return surface_fv(e.fn) | surface_fv(e.arg)
    if isinstance(e, SPair):
        return surface_fv(e.left) | surface_fv(e.right)
    if isinstance(e, SLetPair):
        return surface_fv(e.header) | (surface_fv(e.body) - {e.x, e.y})
    if isinstance(e, SLet):
        return surface_fv(e.header) | (surface_fv(e.body) - {e.x})
    if isinstance(e, SSeq):
        return surface_fv(e.first) | surface_fv(e.rest)
    if isinstance(e, SAnn):
        return surface_fv(e.expr)
    if isinstance(e, SLam):
        return surface_fv(e.body) - {e.var}
    raise AssertionError(e)


def rename_var(e: SurfaceExpr, old: str, new: str) -> SurfaceExpr:
    """Rename free occurrences of `old` to `new` (stops at shadowing binders)."""
    if isinstance(e, SVar):
        return SVar(e.span, new) if e.name == old else e
    if isinstance(e, (SUnit, SNew)):
        return e
    if isinstance(e, SOp):
        return SOp(e.span, e.index, rename_var(e.arg, old, new))
    if isinstance(e, SSplit):
        return SSplit(e.span, e.index, rename_var(e.arg, old, new))
    if isinstance(e, SDrop):
        return SDrop(e.span, rename_var(e.arg, old, new))
    if isinstance(e, SApp):
        return SApp(e.span, rename_var(e.fn, old, new), rename_var(e.arg, old, new))
    if isinstance(e, SPair):
        return SPair(e.span, rename_var(e.left, old, new), rename_var(e.right, old, new))
    if isinstance(e, SLetPair):
        header = rename_var(e.header, old, new)
        body = e.body if old in (e.x, e.y) else rename_var(e.body, old, new)
        return SLetPair(e.span, e.x, e.y, header, body)
    if isinstance(e, SLet):
        header = rename_var(e.header, old, new)
        body = e.body if old == e.x else rename_var(e.body, old, new)
        return SLet(e.span, e.x, header, body)
    if isinstance(e, SSeq):
        return SSeq(e.span, rename_var(e.first, old, new), rename_var(e.rest, old, new))
    if isinstance(e, SAnn):
        return SAnn(e.span, rename_var(e.expr, old, new), e.type)
    if isinstance(e, SLam):
        if e.var == old:
            return e
        return SLam(e.span, e.var, rename_var(e.body, old, new))
    raise AssertionError(e)


# ---------------------------------------------------------------------------
# Lexer

KEYWORDS = {"let", "in", "new", "split", "drop", "unit", "Unit", "ox"}


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT NUM ELEM kw/punct kinds below
    text: str
    span: Span


def _ident_char(c: str) -> bool:
    return c.isalnum() or c in "_'"


def lex(source: str) -> list[Token]:
    toks: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(source)

    def span_here(length: int) -> Span:
        return Span(line, col, line, col + length)

    def error(msg: str) -> ParseError:
        return ParseError(msg, span_here(1))

    while i < n:
        c = source[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if source.startswith("--", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if c == "{":
            j = source.find("}", i)
            if j < 0:
                raise error("unterminated `{` resource literal")
            raw = source[i + 1 : j]
            toks.append(Token("ELEM", raw, span_here(j - i + 1)))
            col += j - i + 1
            i = j + 1
            continue
        if source.startswith("-[", i):
            toks.append(Token("-[", "-[", span_here(2)))
            i += 2
            col += 2
            continue
        if source.startswith("]->", i):
            toks.append(Token("]->", "]->", span_here(3)))
            i += 3
            col += 3
            continue
        if source.startswith(".o", i):
            toks.append(Token(".o", ".o", span_here(2)))
            i += 2
            col += 2
            continue
        if c in "(),;:=!":
            toks.append(Token(c, c, span_here(1)))
            i += 1
            col += 1
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            toks.append(Token("NUM", source[i:j], span_here(j - i)))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and _ident_char(source[j]):
                j += 1
            text = source[i:j]
            kind = text if text in KEYWORDS else "IDENT"
            toks.append(Token(kind, text, span_here(j - i)))
            col += j - i
            i = j
            continue
        raise error(f"unsupported character {c!r}")

    toks.append(Token("EOF", "", Span(line, col, line, col)))
    return toks


# ---------------------------------------------------------------------------
# Parser

class Parser:
    def __init__(self, source: str, opm: Opm):
        self.toks = lex(source)
        self.pos = 0
        self.opm = opm
        self._fresh = 0
        self._used = {t.text for t in self.toks if t.kind == "IDENT"}

    # -- token plumbing

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.pos += 1
        return t

    def expect(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(
                f"expected {kind!r}, found {t.text or 'end of input'!r}",
                t.span,
                expected=(kind,),
            )
        return self.next()

    def fresh(self, base: str) -> str:
        while True:
            name = f"{base}{self._fresh}"
            self._fresh += 1
            if name not in self._used:
                self._used.add(name)
                return name

    def element(self, tok: Token) -> object:
        try:
            return self.opm.parse_element(tok.text)
        except OpmError as exc:
            raise ParseError(str(exc), tok.span) from None

    # -- entry point

    def parse_program(self) -> SurfaceExpr:
        if self.peek().kind == "EOF":
            return SUnit(self.peek().span)
        e = self.parse_expr()
        t = self.peek()
        if t.kind != "EOF":
            raise ParseError(f"unexpected {t.text!r}", t.span, expected=("EOF",))
        return e

    # -- expressions

    def parse_expr(self) -> SurfaceExpr:
        if self.peek().kind == "let":
            return self.parse_let()
        first = self.parse_operand()
        if self.peek().kind == ";":
            self.next()
            rest = self.parse_expr()
            return SSeq(first.span.cover(rest.span), first, rest)
        return first

    def parse_let(self) -> SurfaceExpr:
        start = self.expect("let")
        name = self.expect("IDENT")
        t = self.peek()
        if t.kind == ",":
            self.next()
            second = self.expect("IDENT")
            self.expect("=")
            header = self.parse_expr()
            self.expect("in")
            body = self.parse_expr()
            return SLetPair(
                start.span.cover(body.span), name.text, second.text, header, body
            )
        if t.kind == ":":
            self.next()
            ann = self.parse_type()
            if self.peek().kind == "=":
                self.next()
                header = self.parse_expr()
                self.expect("in")
                body = self.parse_expr()
                hdr = SAnn(header.span, header, ann)
                return SLet(start.span.cover(body.span), name.text, hdr, body)
            again = self.expect("IDENT")
            if again.text != name.text:
                raise ParseError(
                    f"definition of {again.text!r} does not match "
                    f"declaration of {name.text!r}",
                    again.span,
                )
            params = [self.parse_param()]
            while self.peek().kind in ("IDENT", "("):
                params.append(self.parse_param())
            self.expect("=")
            rhs = self.parse_expr()
            self.expect("in")
            body = self.parse_expr()
            lam = rhs
            for p in reversed(params):
                lam = self.lambda_for(p, lam)
            hdr = SAnn(lam.span, lam, ann)
            return SLet(start.span.cover(body.span), name.text, hdr, body)
        if t.kind == "=":
            self.next()
            header = self.parse_expr()
            self.expect("in")
            body = self.parse_expr()
            return SLet(start.span.cover(body.span), name.text, header, body)
        raise ParseError(
            f"expected ',', ':' or '=' after let binder, found {t.text!r}",
            t.span,
            expected=(",", ":", "="),
        )

    def parse_param(self) -> Union[Token, tuple[Token, Token]]:
        if self.peek().kind == "(":
            self.next()
            a = self.expect("IDENT")
            self.expect(",")
            b = self.expect("IDENT")
            self.expect(")")
            return (a, b)
        return self.expect("IDENT")

    def lambda_for(
        self, param: Union[Token, tuple[Token, Token]], body: SurfaceExpr
    ) -> SurfaceExpr:
        if isinstance(param, tuple):
            a, b = param
            p = self.fresh("p")
            sp = a.span.cover(body.span)
            inner = SLetPair(sp, a.text, b.text, SVar(a.span, p), body)
            return SLam(sp, p, inner)
        return SLam(param.span.cover(body.span), param.text, body)

    def parse_operand(self) -> SurfaceExpr:
        """An expression without top-level `;` or `let`."""
        t = self.peek()
        if t.kind == "drop":
            self.next()
            arg = self.parse_operand_no_let(t)
            return SDrop(t.span.cover(arg.span), arg)
        if t.kind == "!":
            self.next()
            elem = self.expect("ELEM")
            arg = self.parse_operand_no_let(t)
            return SOp(t.span.cover(arg.span), self.element(elem), arg)
        if t.kind == "split":
            self.next()
            elem = self.expect("ELEM")
            arg = self.parse_operand_no_let(t)
            return SSplit(t.span.cover(arg.span), self.element(elem), arg)
        if t.kind == "new":
            self.next()
            elem = self.expect("ELEM")
            return SNew(t.span.cover(elem.span), self.element(elem))
        return self.parse_app()

    def parse_operand_no_let(self, opener: Token) -> SurfaceExpr:
        if self.peek().kind == "let":
            raise ParseError(
                "prefix operator argument cannot be a bare let; parenthesize it",
                self.peek().span,
            )
        return self.parse_operand()

    def parse_app(self) -> SurfaceExpr:
        e = self.parse_atom()
        while self.peek().kind in ("unit", "IDENT", "("):
            arg = self.parse_atom()
            e = SApp(e.span.cover(arg.span), e, arg)
        return e

    def parse_atom(self) -> SurfaceExpr:
        t = self.peek()
        if t.kind == "unit":
            self.next()
            return SUnit(t.span)
        if t.kind == "IDENT":
            self.next()
            return SVar(t.span, t.text)
        if t.kind == "(":
            self.next()
            e = self.parse_expr()
            if self.peek().kind == ",":
                self.next()
                right = self.parse_expr()
                close = self.expect(")")
                return SPair(t.span.cover(close.span), e, right)
            if self.peek().kind == ":":
                self.next()
                ann = self.parse_type()
                close = self.expect(")")
                return SAnn(t.span.cover(close.span), e, ann)
            close = self.expect(")")
            return e
        raise ParseError(
            f"expected an expression, found {t.text or 'end of input'!r}",
            t.span,
            expected=("unit", "IDENT", "("),
        )

    # -- types

    def parse_type(self) -> CoreType:
        left = self.parse_prod_type()
        if self.peek().kind == "-[":
            self.next()
            mode = self.expect("IDENT")
            if mode.text not in ("u", "o", "r", "l"):
                raise ParseError(
                    f"arrow mode must be one of u, o, r, l; found {mode.text!r}",
                    mode.span,
                )
            eff = self.expect("NUM")
            if eff.text not in ("0", "1"):
                raise ParseError("latent effect must be 0 or 1", eff.span)
            self.expect("]->")
            result = self.parse_type()
            return ArrowType(mode.text, left, result, int(eff.text))
        return left

    def parse_prod_type(self) -> CoreType:
        t = self.parse_type_atom()
        while self.peek().kind in ("ox", ".o"):
            op = self.next()
            right = self.parse_type_atom()
            t = ProdType(op.kind == ".o", t, right)
        return t

    def parse_type_atom(self) -> CoreType:
        t = self.peek()
        if t.kind == "Unit":
            self.next()
            return UNIT_T
        if t.kind == "ELEM":
            self.next()
            return TraceType(self.element(t))
        if t.kind == "(":
            self.next()
            inner = self.parse_type()
            self.expect(")")
            return inner
        raise ParseError(
            f"expected a type, found {t.text or 'end of input'!r}",
            t.span,
            expected=("Unit", "ELEM", "("),
        )


def parse(source: str, opm: Opm) -> SurfaceExpr:
    return Parser(source, opm).parse_program()


# ---------------------------------------------------------------------------
# Pretty-printer (round-trips through parse up to alpha-equivalence)

def show_surface_type(t: CoreType, opm: Opm, prec: int = 0) -> str:
    """Concrete type syntax: resource indices in braces."""
    from .core import ArrowType as _Arrow, ProdType as _Prod, TraceType as _Trace

    if isinstance(t, _Trace):
        return "{" + opm.show_element(t.index) + "}"
    if isinstance(t, _Prod):
        op = ".o" if t.ordered else "ox"
        s = (
            f"{show_surface_type(t.left, opm, 2)} {op} "
            f"{show_surface_type(t.right, opm, 2)}"
        )
        return f"({s})" if prec > 1 else s
    if isinstance(t, _Arrow):
        s = (
            f"{show_surface_type(t.param, opm, 1)} "
            f"-[{t.mode} {t.effect}]-> {show_surface_type(t.result, opm, 0)}"
        )
        return f"({s})" if prec > 0 else s
    return "Unit"


def pretty(e: SurfaceExpr, opm: Opm) -> str:
    return _ps(e, opm)


def _atom(e: SurfaceExpr, opm: Opm) -> str:
    s = _ps(e, opm)
    if isinstance(e, (SUnit, SVar, SPair, SAnn)):
        return s
    return f"({s})"


def _ps(e: SurfaceExpr, opm: Opm) -> str:
    if isinstance(e, SUnit):
        return "unit"
    if isinstance(e, SVar):
        return e.name
    if isinstance(e, SNew):
        return "new {" + opm.show_element(e.index) + "}"
    if isinstance(e, SOp):
        return "!{" + opm.show_element(e.index) + "} " + _atom(e.arg, opm)
    if isinstance(e, SSplit):
        return "split {" + opm.show_element(e.index) + "} " + _atom(e.arg, opm)
    if isinstance(e, SDrop):
        return "drop " + _atom(e.arg, opm)
    if isinstance(e, SApp):
        fn = _ps(e.fn, opm) if isinstance(e.fn, (SApp, SVar)) else _atom(e.fn, opm)
        return f"{fn} {_atom(e.arg, opm)}"
    if isinstance(e, SPair):
        return f"({_ps(e.left, opm)}, {_ps(e.right, opm)})"
    if isinstance(e, SAnn):
        if isinstance(e.expr, SLam):
            raise ValueError("annotated lambdas print via their let binding")
        return f"({_ps(e.expr, opm)} : {show_surface_type(e.type, opm)})"
    if isinstance(e, SSeq):
        return f"{_ps(e.first, opm)}; {_ps(e.rest, opm)}"
    if isinstance(e, SLetPair):
        return (
            f"let {e.x}, {e.y} = {_ps(e.header, opm)} in\n{_ps(e.body, opm)}"
        )
    if isinstance(e, SLet):
        if isinstance(e.header, SAnn) and isinstance(e.header.expr, SLam):
            lam = e.header.expr
            ty = show_surface_type(e.header.type, opm)
            params = []
            while isinstance(lam, SLam):
                params.append(lam.var)
                lam = lam.body
            head = f"let {e.x} : {ty}\n    {e.x} {' '.join(params)} = "
            return f"{head}{_ps(lam, opm)} in\n{_ps(e.body, opm)}"
        if isinstance(e.header, SAnn):
            return (
                f"let {e.x} : {show_surface_type(e.header.type, opm)} = "
                f"{_ps(e.header.expr, opm)} in\n{_ps(e.body, opm)}"
            )
        return f"let {e.x} = {_ps(e.header, opm)} in\n{_ps(e.body, opm)}"
    if isinstance(e, SLam):
        raise ValueError("bare lambdas have no concrete syntax")
    raise AssertionError(e)
