"""Tests, weighted expressions, atoms, and the textual expression syntax.

Grammar::

    expr := sum
    sum  := seq { "+" seq }
    seq  := post { [";"] post }
    post := prim { "*" | "@" "{" TOKEN "}" }
    prim := ACTION | TEST | "~" prim | "0" | "1" | "(" expr ")"

``~`` applies to test subexpressions only.  Subtrees built purely from
tests, ``+`` and products are stored as a single :class:`Test` node.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import cached_property

from .semiring import Semiring, Weight


class ParseError(ValueError):
    def __init__(self, message, pos=None):
        self.pos = pos
        super().__init__(message if pos is None else f"{message} (at position {pos})")


class ResourceLimitError(RuntimeError):
    pass


# -- tests -------------------------------------------------------------------

class TestExpr:
    __slots__ = ()
    __test__ = False


@dataclass(frozen=True)
class TLetter(TestExpr):
    name: str


@dataclass(frozen=True)
class TNot(TestExpr):
    arg: TestExpr


@dataclass(frozen=True)
class TOr(TestExpr):
    left: TestExpr
    right: TestExpr


@dataclass(frozen=True)
class TAnd(TestExpr):
    left: TestExpr
    right: TestExpr


@dataclass(frozen=True)
class TZero(TestExpr):
    pass


@dataclass(frozen=True)
class TOne(TestExpr):
    pass


def to_bnf(b: TestExpr) -> TestExpr:
    """Push complements down to letters (De Morgan, double negation, 0/1)."""
    if isinstance(b, TNot):
        a = b.arg
        if isinstance(a, TNot):
            return to_bnf(a.arg)
        if isinstance(a, TOr):
            return TAnd(to_bnf(TNot(a.left)), to_bnf(TNot(a.right)))
        if isinstance(a, TAnd):
            return TOr(to_bnf(TNot(a.left)), to_bnf(TNot(a.right)))
        if isinstance(a, TZero):
            return TOne()
        if isinstance(a, TOne):
            return TZero()
        return b
    if isinstance(b, TOr):
        return TOr(to_bnf(b.left), to_bnf(b.right))
    if isinstance(b, TAnd):
        return TAnd(to_bnf(b.left), to_bnf(b.right))
    return b


def is_bnf(b: TestExpr) -> bool:
    if isinstance(b, TNot):
        return isinstance(b.arg, TLetter)
    if isinstance(b, (TOr, TAnd)):
        return is_bnf(b.left) and is_bnf(b.right)
    return True


def letters_of_test(b: TestExpr) -> set[str]:
    if isinstance(b, TLetter):
        return {b.name}
    if isinstance(b, TNot):
        return letters_of_test(b.arg)
    if isinstance(b, (TOr, TAnd)):
        return letters_of_test(b.left) | letters_of_test(b.right)
    return set()


# -- expressions -------------------------------------------------------------

class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Action(Expr):
    name: str


@dataclass(frozen=True)
class Test(Expr):
    __test__ = False
    test: TestExpr


@dataclass(frozen=True)
class Scalar(Expr):
    arg: Expr
    weight: Weight


@dataclass(frozen=True)
class Plus(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Seq(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Star(Expr):
    arg: Expr


ZERO = Test(TZero())
ONE = Test(TOne())


def plus_all(items, empty=ZERO) -> Expr:
    items = list(items)
    if not items:
        return empty
    out = items[0]
    for e in items[1:]:
        out = Plus(out, e)
    return out


def seq_all(items) -> Expr:
    items = list(items)
    if not items:
        return ONE
    out = items[0]
    for e in items[1:]:
        out = Seq(out, e)
    return out


def map_tests(e: Expr, fn, _memo=None) -> Expr:
    # shared subtrees stay shared in the result
    memo = {} if _memo is None else _memo
    hit = memo.get(id(e))
    if hit is not None:
        return hit[1]
    if isinstance(e, Test):
        out = Test(fn(e.test))
    elif isinstance(e, Scalar):
        out = Scalar(map_tests(e.arg, fn, memo), e.weight)
    elif isinstance(e, (Plus, Seq)):
        out = type(e)(map_tests(e.left, fn, memo), map_tests(e.right, fn, memo))
    elif isinstance(e, Star):
        out = Star(map_tests(e.arg, fn, memo))
    else:
        out = e
    memo[id(e)] = (e, out)
    return out


def bnf_expr(e: Expr) -> Expr:
    """Put every embedded test into Boolean normal form."""
    return map_tests(e, to_bnf)


def lift_tests(e: Expr) -> Expr:
    """Merge maximal test-only sums/products into single :class:`Test` nodes.

    This is the form the parser produces.
    """
    if isinstance(e, (Plus, Seq)):
        left, right = lift_tests(e.left), lift_tests(e.right)
        if isinstance(left, Test) and isinstance(right, Test):
            op = TOr if isinstance(e, Plus) else TAnd
            return Test(op(left.test, right.test))
        return type(e)(left, right)
    if isinstance(e, Scalar):
        return Scalar(lift_tests(e.arg), e.weight)
    if isinstance(e, Star):
        return Star(lift_tests(e.arg))
    return e


def expr_size(e: Expr) -> int:
    if isinstance(e, (Plus, Seq)):
        return 1 + expr_size(e.left) + expr_size(e.right)
    if isinstance(e, (Scalar, Star)):
        return 1 + expr_size(e.arg)
    return 1


def expr_depth(e: Expr) -> int:
    if isinstance(e, (Plus, Seq)):
        return 1 + max(expr_depth(e.left), expr_depth(e.right))
    if isinstance(e, (Scalar, Star)):
        return 1 + expr_depth(e.arg)
    return 1


def _nodes(e: Expr):
    """Every distinct node of ``e`` once (shared subtrees are not repeated)."""
    seen = set()
    stack = [e]
    while stack:
        x = stack.pop()
        if id(x) in seen:
            continue
        seen.add(id(x))
        yield x
        if isinstance(x, (Plus, Seq)):
            stack += [x.left, x.right]
        elif isinstance(x, (Scalar, Star)):
            stack.append(x.arg)


def weights_in(e: Expr):
    for x in _nodes(e):
        if isinstance(x, Scalar):
            yield x.weight


def symbols_in(e: Expr) -> tuple[set[str], set[str]]:
    """Return (actions, test letters) occurring in ``e``."""
    acts: set[str] = set()
    tests: set[str] = set()
    for x in _nodes(e):
        if isinstance(x, Action):
            acts.add(x.name)
        elif isinstance(x, Test):
            tests |= letters_of_test(x.test)
    return acts, tests


# -- printing ----------------------------------------------------------------

_SUM, _SEQ, _POST = 0, 1, 2


def _test_str(b: TestExpr, level: int) -> str:
    if isinstance(b, TLetter):
        return b.name
    if isinstance(b, TZero):
        return "0"
    if isinstance(b, TOne):
        return "1"
    if isinstance(b, TNot):
        return "~" + _test_str(b.arg, _POST)
    if isinstance(b, TOr):
        s = f"{_test_str(b.left, _SUM)} + {_test_str(b.right, _SEQ)}"
        return s if level <= _SUM else f"({s})"
    if isinstance(b, TAnd):
        s = f"{_test_str(b.left, _SEQ)} {_test_str(b.right, _POST)}"
        return s if level <= _SEQ else f"({s})"
    raise TypeError(b)


def format_test(b: TestExpr) -> str:
    return _test_str(b, _SUM)


def _expr_str(e: Expr, level: int) -> str:
    if isinstance(e, Action):
        return e.name
    if isinstance(e, Test):
        return _test_str(e.test, level)
    if isinstance(e, Plus):
        s = f"{_expr_str(e.left, _SUM)} + {_expr_str(e.right, _SEQ)}"
        return s if level <= _SUM else f"({s})"
    if isinstance(e, Seq):
        s = f"{_expr_str(e.left, _SEQ)} {_expr_str(e.right, _POST)}"
        return s if level <= _SEQ else f"({s})"
    if isinstance(e, Star):
        return _expr_str(e.arg, _POST) + "*"
    if isinstance(e, Scalar):
        return f"{_expr_str(e.arg, _POST)}@{{{e.weight.token}}}"
    raise TypeError(e)


def expr_to_str(e: Expr) -> str:
    """Canonical printing; ``parse_expr`` reads it back."""
    return _expr_str(e, _SUM)


# -- alphabets and atoms -----------------------------------------------------

DEFAULT_ATOM_LIMIT = 4


@dataclass(frozen=True)
class Atom:
    """A complete truth assignment, bit ``i`` for test letter ``tests[i]``."""

    tests: tuple[str, ...]
    bits: tuple[bool, ...]

    def __post_init__(self):
        if len(self.tests) != len(self.bits):
            raise ValueError("atom length differs from the number of test letters")

    @property
    def index(self) -> int:
        """Position in :func:`enumerate_atoms` order."""
        i = 0
        for bit in self.bits:
            i = 2 * i + (0 if bit else 1)
        return i

    def literals(self) -> list[str]:
        return [p if bit else "~" + p for p, bit in zip(self.tests, self.bits)]

    def __str__(self):
        return atom_name(self.tests, self.bits)


def atom_name(tests, bits) -> str:
    if not tests:
        return "ε"
    return "".join(p if bit else p + "̄" for p, bit in zip(tests, bits))


@dataclass(frozen=True)
class Alphabets:
    """Disjoint finite alphabets of actions and test letters (in fixed order)."""

    actions: tuple[str, ...]
    tests: tuple[str, ...]
    atom_limit: int = DEFAULT_ATOM_LIMIT

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "tests", tuple(self.tests))
        clash = set(self.actions) & set(self.tests)
        if clash:
            raise ValueError(f"actions and tests overlap: {sorted(clash)}")
        for name in self.actions + self.tests:
            if not _IDENT.fullmatch(name) or name in ("0", "1"):
                raise ValueError(f"invalid symbol name {name!r}")
        if len(set(self.actions)) != len(self.actions) or len(set(self.tests)) != len(self.tests):
            raise ValueError("duplicate symbols")

    @cached_property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(enumerate_atoms(self))

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @cached_property
    def _letter_sets(self) -> dict[str, frozenset[int]]:
        return {
            p: frozenset(i for i, g in enumerate(self.atoms) if g.bits[k])
            for k, p in enumerate(self.tests)
        }

    def sat_atoms(self, b: TestExpr) -> frozenset[int]:
        """Indices of the atoms satisfying ``b``."""
        if isinstance(b, TLetter):
            try:
                return self._letter_sets[b.name]
            except KeyError:
                raise KeyError(f"unknown test letter {b.name!r}") from None
        if isinstance(b, TNot):
            return frozenset(range(self.n_atoms)) - self.sat_atoms(b.arg)
        if isinstance(b, TOr):
            return self.sat_atoms(b.left) | self.sat_atoms(b.right)
        if isinstance(b, TAnd):
            return self.sat_atoms(b.left) & self.sat_atoms(b.right)
        if isinstance(b, TZero):
            return frozenset()
        if isinstance(b, TOne):
            return frozenset(range(self.n_atoms))
        raise TypeError(b)

    def atom_str(self, i: int) -> str:
        return str(self.atoms[i])

    def atom_expr(self, i: int) -> Expr:
        """The atom as a product of literals (``1`` when there are no tests)."""
        g = self.atoms[i]
        lits: list[TestExpr] = [TLetter(p) if bit else TNot(TLetter(p))
                                for p, bit in zip(g.tests, g.bits)]
        if not lits:
            return ONE
        t = lits[0]
        for lit in lits[1:]:
            t = TAnd(t, lit)
        return Test(t)


def enumerate_atoms(alphabets: Alphabets) -> list[Atom]:
    """All ``2^|tests|`` atoms, positive literal first in each position."""
    n = len(alphabets.tests)
    if n > alphabets.atom_limit:
        raise ResourceLimitError(
            f"{n} test letters exceed the atom limit {alphabets.atom_limit}")
    return [Atom(alphabets.tests, bits)
            for bits in itertools.product((True, False), repeat=n)]


def atom_satisfies(g: Atom, b: TestExpr) -> bool:
    if isinstance(b, TLetter):
        try:
            return g.bits[g.tests.index(b.name)]
        except ValueError:
            raise KeyError(f"unknown test letter {b.name!r}") from None
    if isinstance(b, TNot):
        return not atom_satisfies(g, b.arg)
    if isinstance(b, TOr):
        return atom_satisfies(g, b.left) or atom_satisfies(g, b.right)
    if isinstance(b, TAnd):
        return atom_satisfies(g, b.left) and atom_satisfies(g, b.right)
    if isinstance(b, TZero):
        return False
    if isinstance(b, TOne):
        return True
    raise TypeError(b)


# -- parsing -----------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<const>[01])(?![A-Za-z0-9_])"
    r"|(?P<weight>@\s*\{(?P<wtok>[^}]*)\})|(?P<sym>[+;*()~]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos] == "@":
                raise ParseError("malformed weight literal, expected @{TOKEN}", pos)
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup if m.lastgroup != "wtok" else "weight")
        if m.group("ident"):
            out.append(("ident", m.group("ident"), start))
        elif m.group("const"):
            out.append(("const", m.group("const"), start))
        elif m.group("weight") is not None:
            out.append(("weight", m.group("wtok").strip(), start))
        else:
            out.append(("sym", m.group("sym"), start))
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text, alphabets: Alphabets, semiring: Semiring):
        self.toks = _tokenize(text)
        self.i = 0
        self.alphabets = alphabets
        self.semiring = semiring

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, sym):
        t = self.take()
        if t[0] != "sym" or t[1] != sym:
            raise ParseError(f"expected {sym!r}", t[2])
        return t

    def parse(self) -> Expr:
        e = self.sum()
        t = self.peek()
        if t[0] != "end":
            if t == ("sym", ")", t[2]):
                raise ParseError("unbalanced ')'", t[2])
            raise ParseError(f"unexpected {t[1]!r}", t[2])
        return e

    def sum(self):
        e = self.seq()
        while self.peek()[:2] == ("sym", "+"):
            self.take()
            r = self.seq()
            e = _combine(Plus, TOr, e, r)
        return e

    def _starts_prim(self, t):
        return t[0] in ("ident", "const") or (t[0] == "sym" and t[1] in "(~")

    def seq(self):
        e = self.post()
        while True:
            t = self.peek()
            if t[:2] == ("sym", ";"):
                self.take()
                r = self.post()
            elif self._starts_prim(t):
                r = self.post()
            else:
                return e
            e = _combine(Seq, TAnd, e, r)

    def post(self):
        e = self.prim()
        while True:
            t = self.peek()
            if t[:2] == ("sym", "*"):
                self.take()
                e = Star(e)
            elif t[0] == "weight":
                self.take()
                try:
                    w = self.semiring.weight(t[1])
                except KeyError:
                    raise ParseError(
                        f"{t[1]!r} is not an element of semiring {self.semiring.name}", t[2]
                    ) from None
                e = Scalar(e, w)
            else:
                return e

    def prim(self):
        t = self.take()
        kind, val, pos = t
        if kind == "ident":
            if val in self.alphabets.actions:
                return Action(val)
            if val in self.alphabets.tests:
                return Test(TLetter(val))
            raise ParseError(f"unknown symbol {val!r}", pos)
        if kind == "const":
            return ZERO if val == "0" else ONE
        if kind == "sym" and val == "(":
            e = self.sum()
            close = self.take()
            if close[:2] != ("sym", ")"):
                raise ParseError("unbalanced '(' (missing ')')", pos)
            return e
        if kind == "sym" and val == "~":
            inner = self.prim()
            if not isinstance(inner, Test):
                raise ParseError("'~' applies to tests only", pos)
            return Test(TNot(inner.test))
        if kind == "end":
            raise ParseError("unexpected end of input", pos)
        raise ParseError(f"unexpected {val!r}", pos)


def _combine(node, test_node, left, right):
    if isinstance(left, Test) and isinstance(right, Test):
        return Test(test_node(left.test, right.test))
    return node(left, right)


def parse_expr(text: str, alphabets: Alphabets, semiring: Semiring) -> Expr:
    return _Parser(text, alphabets, semiring).parse()


def parse_test(text: str, alphabets: Alphabets, semiring: Semiring) -> TestExpr:
    e = parse_expr(text, alphabets, semiring)
    if not isinstance(e, Test):
        raise ParseError(f"{text!r} is not a test")
    return e.test


def scan_identifiers(text: str) -> list[str]:
    """Identifiers occurring in ``text`` outside weight literals, in order."""
    seen = []
    for kind, val, _ in _tokenize(text):
        if kind == "ident" and val not in seen:
            seen.append(val)
    return seen
