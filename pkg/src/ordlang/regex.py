"""Regular expressions over small symbol alphabets, with derivative-based automata.

Provides the regex index algebra (concatenation, inclusion order) plus the
product derivative used to compute the canonical continuation of a borrow.
Regexes are normalized on construction (ACI alternation, unit/zero laws,
star collapse) so that iterated derivatives fall into finitely many classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

from .opm import Opm, OpmError, register_opm


class StateBudgetExceeded(Exception):
    """Automaton construction blew the state budget (pathological regex)."""


# ---------------------------------------------------------------------------
# Syntax and smart constructors

@dataclass(frozen=True)
class Regex:
    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class Empty(Regex):
    """The empty language."""


@dataclass(frozen=True)
class Eps(Regex):
    """The language of the empty word."""


@dataclass(frozen=True)
class Sym(Regex):
    ch: str


@dataclass(frozen=True)
class Cat(Regex):
    left: Regex
    right: Regex


@dataclass(frozen=True)
class Alt(Regex):
    # Canonically sorted, deduplicated, flattened; never empty or singleton.
    items: tuple[Regex, ...]


@dataclass(frozen=True)
class Star(Regex):
    inner: Regex


EMPTY = Empty()
EPS = Eps()


def sym(ch: str) -> Regex:
    return Sym(ch)


def cat(a: Regex, b: Regex) -> Regex:
    if isinstance(a, Empty) or isinstance(b, Empty):
        return EMPTY
    if isinstance(a, Eps):
        return b
    if isinstance(b, Eps):
        return a
    if isinstance(a, Cat):  # reassociate to the right
        return cat(a.left, cat(a.right, b))
    return Cat(a, b)


def _sort_key(r: Regex) -> str:
    return show(r)


def alt(*parts: Regex) -> Regex:
    items: list[Regex] = []
    for p in parts:
        if isinstance(p, Alt):
            items.extend(p.items)
        elif not isinstance(p, Empty):
            items.append(p)
    uniq = sorted(set(items), key=_sort_key)
    if not uniq:
        return EMPTY
    if len(uniq) == 1:
        return uniq[0]
    return Alt(tuple(uniq))


def star(r: Regex) -> Regex:
    if isinstance(r, (Empty, Eps)):
        return EPS
    if isinstance(r, Star):
        return r
    return Star(r)


def seq(*parts: Regex) -> Regex:
    out: Regex = EPS
    for p in reversed(parts):
        out = cat(p, out)
    return out


def symbols(r: Regex) -> frozenset[str]:
    if isinstance(r, Sym):
        return frozenset({r.ch})
    if isinstance(r, Cat):
        return symbols(r.left) | symbols(r.right)
    if isinstance(r, Alt):
        out: frozenset[str] = frozenset()
        for p in r.items:
            out |= symbols(p)
        return out
    if isinstance(r, Star):
        return symbols(r.inner)
    return frozenset()


def show(r: Regex, prec: int = 0) -> str:
    # precedence: alternation 0 < concatenation 1 < star 2
    if isinstance(r, Empty):
        return "∅"
    if isinstance(r, Eps):
        return "eps"
    if isinstance(r, Sym):
        return r.ch
    if isinstance(r, Star):
        return show(r.inner, 2) + "*"
    if isinstance(r, Cat):
        s = show(r.left, 1) + show(r.right, 1)
        return f"({s})" if prec > 1 else s
    if isinstance(r, Alt):
        s = "|".join(show(p, 1) for p in r.items)
        return f"({s})" if prec > 0 else s
    raise AssertionError(r)


def is_empty_language(r: Regex) -> bool:
    # Normalization propagates the empty language to the top for this syntax
    # (no complement/intersection), so the check is just structural.
    return isinstance(r, Empty)


# ---------------------------------------------------------------------------
# Derivatives and automata

def nullable(r: Regex) -> bool:
    if isinstance(r, (Eps, Star)):
        return True
    if isinstance(r, Cat):
        return nullable(r.left) and nullable(r.right)
    if isinstance(r, Alt):
        return any(nullable(p) for p in r.items)
    return False


def derivative(r: Regex, a: str) -> Regex:
    if isinstance(r, (Empty, Eps)):
        return EMPTY
    if isinstance(r, Sym):
        return EPS if r.ch == a else EMPTY
    if isinstance(r, Cat):
        d = cat(derivative(r.left, a), r.right)
        if nullable(r.left):
            return alt(d, derivative(r.right, a))
        return d
    if isinstance(r, Alt):
        return alt(*(derivative(p, a) for p in r.items))
    if isinstance(r, Star):
        return cat(derivative(r.inner, a), r)
    raise AssertionError(r)


@dataclass(frozen=True)
class Dfa:
    alphabet: tuple[str, ...]
    n_states: int
    start: int
    accepting: frozenset[int]
    # trans[state][symbol index] -> state; total over the alphabet
    trans: tuple[tuple[int, ...], ...]

    def step(self, state: int, ch: str) -> int:
        return self.trans[state][self.alphabet.index(ch)]

    def accepts(self, word: Iterable[str]) -> bool:
        s = self.start
        for ch in word:
            if ch not in self.alphabet:
                return False
            s = self.step(s, ch)
        return s in self.accepting


DEFAULT_STATE_BUDGET = 512


@lru_cache(maxsize=4096)
def to_dfa(r: Regex, alphabet: tuple[str, ...], budget: int = DEFAULT_STATE_BUDGET) -> Dfa:
    """Total DFA over `alphabet` whose language is L(r), by derivative classes."""
    states: dict[Regex, int] = {r: 0}
    order: list[Regex] = [r]
    trans: list[list[int]] = []
    i = 0
    while i < len(order):
        cur = order[i]
        row: list[int] = []
        for a in alphabet:
            d = derivative(cur, a)
            if d not in states:
                if len(states) >= budget:
                    raise StateBudgetExceeded(
                        f"more than {budget} derivative classes for {show(r)}"
                    )
                states[d] = len(order)
                order.append(d)
            row.append(states[d])
        trans.append(row)
        i += 1
    accepting = frozenset(ix for rx, ix in states.items() if nullable(rx))
    return Dfa(alphabet, len(order), 0, accepting, tuple(tuple(row) for row in trans))


def _joint_alphabet(*rs: Regex) -> tuple[str, ...]:
    syms: set[str] = set()
    for r in rs:
        syms |= symbols(r)
    return tuple(sorted(syms))


def includes(big: Regex, small: Regex) -> bool:
    """Decide L(small) ⊆ L(big) via product-automaton emptiness."""
    alphabet = _joint_alphabet(big, small)
    db, ds = to_dfa(big, alphabet), to_dfa(small, alphabet)
    seen = {(ds.start, db.start)}
    work = [(ds.start, db.start)]
    while work:
        qs, qb = work.pop()
        if qs in ds.accepting and qb not in db.accepting:
            return False
        for k in range(len(alphabet)):
            nxt = (ds.trans[qs][k], db.trans[qb][k])
            if nxt not in seen:
                seen.add(nxt)
                work.append(nxt)
    return True


def equivalent(a: Regex, b: Regex) -> bool:
    return includes(a, b) and includes(b, a)


def regex_from_dfa(dfa: Dfa) -> Regex:
    """Read a regex back from a DFA by state elimination."""
    n = dfa.n_states
    # Arc labels between virtual start (n) and accept (n+1) nodes.
    arcs: dict[tuple[int, int], Regex] = {}

    def add(i: int, j: int, r: Regex) -> None:
        if is_empty_language(r):
            return
        arcs[(i, j)] = alt(arcs.get((i, j), EMPTY), r)

    for s in range(n):
        for k, a in enumerate(dfa.alphabet):
            add(s, dfa.trans[s][k], sym(a))
    add(n, dfa.start, EPS)
    for s in dfa.accepting:
        add(s, n + 1, EPS)

    for s in range(n):  # eliminate state s
        loop = arcs.pop((s, s), EMPTY)
        ins = [(i, r) for (i, j), r in arcs.items() if j == s and i != s]
        outs = [(j, r) for (i, j), r in arcs.items() if i == s and j != s]
        for i, rin in ins:
            del arcs[(i, s)]
        for j, rout in outs:
            del arcs[(s, j)]
        for i, rin in ins:
            for j, rout in outs:
                add(i, j, seq(rin, star(loop), rout))

    return arcs.get((n, n + 1), EMPTY)


def product_derivative(num: Regex, den: Regex) -> Regex:
    """The largest z with L(den)·z ⊆ L(num).

    Construction: collect the set S of num-automaton states reachable from
    its start by some word of den, then accept exactly the words that reach
    acceptance from every state in S.  Returns the empty-language regex when
    no continuation exists.
    """
    if is_empty_language(den):
        raise ValueError("product derivative by the empty language")
    alphabet = _joint_alphabet(num, den)
    dn, dd = to_dfa(num, alphabet), to_dfa(den, alphabet)

    # S: num-states reached by words of L(den).
    seen = {(dd.start, dn.start)}
    work = [(dd.start, dn.start)]
    s_set: set[int] = set()
    while work:
        qd, qn = work.pop()
        if qd in dd.accepting:
            s_set.add(qn)
        for k in range(len(alphabet)):
            nxt = (dd.trans[qd][k], dn.trans[qn][k])
            if nxt not in seen:
                seen.add(nxt)
                work.append(nxt)
    if not s_set:  # unreachable given a nonempty den
        return EMPTY

    # Determinized universal acceptance from S.
    start = tuple(sorted(s_set))
    states: dict[tuple[int, ...], int] = {start: 0}
    order = [start]
    trans: list[list[int]] = []
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for k in range(len(alphabet)):
            nxt = tuple(sorted({dn.trans[q][k] for q in cur}))
            if nxt not in states:
                if len(states) >= DEFAULT_STATE_BUDGET:
                    raise StateBudgetExceeded("product derivative state budget")
                states[nxt] = len(order)
                order.append(nxt)
            row.append(states[nxt])
        trans.append(row)
        i += 1
    accepting = frozenset(
        ix for st, ix in states.items() if all(q in dn.accepting for q in st)
    )
    out = Dfa(tuple(alphabet), len(order), 0, accepting, tuple(tuple(r) for r in trans))
    return regex_from_dfa(out)


# ---------------------------------------------------------------------------
# Concrete syntax inside `{...}` literals

def parse_regex(text: str) -> Regex:
    """Parse the `{...}` payload: symbols are single letters, `|` alternation,
    juxtaposition concatenation, postfix `*`, parentheses, `eps` empty word.
    Precedence: star > concatenation > alternation."""
    pos = 0

    def peek() -> Optional[str]:
        return text[pos] if pos < len(text) else None

    def skip_ws() -> None:
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def parse_alt() -> Regex:
        nonlocal pos
        parts = [parse_cat()]
        skip_ws()
        while peek() == "|":
            pos += 1
            parts.append(parse_cat())
            skip_ws()
        return alt(*parts)

    def parse_cat() -> Regex:
        nonlocal pos
        parts = []
        while True:
            skip_ws()
            c = peek()
            if c is None or c in "|)":
                break
            parts.append(parse_post())
        if not parts:
            raise OpmError(f"empty regex fragment in {text!r}")
        return seq(*parts)

    def parse_post() -> Regex:
        nonlocal pos
        r = parse_atom()
        skip_ws()
        while peek() == "*":
            pos += 1
            r = star(r)
            skip_ws()
        return r

    def parse_atom() -> Regex:
        nonlocal pos
        skip_ws()
        c = peek()
        if c == "(":
            pos += 1
            r = parse_alt()
            skip_ws()
            if peek() != ")":
                raise OpmError(f"unbalanced parenthesis in regex {text!r}")
            pos += 1
            return r
        if c is not None and c.isalpha():
            if text[pos : pos + 3] == "eps" and not (
                pos + 3 < len(text) and text[pos + 3].isalnum()
            ):
                pos += 3
                return EPS
            pos += 1
            return sym(c)
        raise OpmError(f"unexpected character {c!r} in regex {text!r}")

    r = parse_alt()
    skip_ws()
    if pos != len(text):
        raise OpmError(f"trailing characters in regex {text!r}")
    return r


# ---------------------------------------------------------------------------
# The regex OPM: free monoid of nonempty regular languages, ordered by inclusion

class RegexOpm(Opm):
    """Nonempty regular languages under concatenation and inclusion.

    Multiplication is total here; conformance of traces with a resource's
    envelope is enforced by the operational side conditions, not by the
    algebra.  The alphabet is implicit: the symbols occurring in the
    operands.
    """

    name = "regex"

    def unit(self) -> Regex:
        return EPS

    def mul(self, x: Regex, y: Regex) -> Optional[Regex]:
        return cat(x, y)

    def leq(self, x: Regex, y: Regex) -> bool:
        return includes(y, x)

    def eq(self, x: Regex, y: Regex) -> bool:
        return equivalent(x, y)

    def residual_exists(self, x: Regex, y: Regex) -> bool:
        return not is_empty_language(product_derivative(y, x))

    def best_continuation(self, x: Regex, y: Regex) -> Optional[Regex]:
        pd = product_derivative(y, x)
        return None if is_empty_language(pd) else pd

    def parse_element(self, text: str) -> Regex:
        r = parse_regex(text)
        if is_empty_language(r):
            raise OpmError(f"regex {text!r} denotes the empty language")
        return r

    def show_element(self, x: Regex) -> str:
        return show(x)


register_opm("regex", RegexOpm)
