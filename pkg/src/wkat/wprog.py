"""Weighted while-programs: parsing, compilation to expressions, evaluation.

Grammar (statements separated by ``;``; a BLOCK is ``{ ... }`` or a single
statement; ``#`` starts a comment)::

    skip | abort | ACTION | add {s} | add s
    if TEST then BLOCK else BLOCK
    while TEST do BLOCK
    choice BLOCK or BLOCK
    weighted { {s}: BLOCK ; {t}: BLOCK ; ... }
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .relational import Matrix, TransitionSystem, eval_M
from .semiring import Semiring, Weight, tropical
from .syntax import (
    ONE, ZERO, Action, Alphabets, Expr, ParseError, Plus, Scalar, Seq, Star, Test, TestExpr,
    TLetter, TNot, format_test, parse_test,
)


class Program:
    pass


@dataclass(frozen=True)
class Skip(Program):
    pass


@dataclass(frozen=True)
class Abort(Program):
    pass


@dataclass(frozen=True)
class Act(Program):
    name: str


@dataclass(frozen=True)
class AddWeight(Program):
    weight: Weight


@dataclass(frozen=True)
class SeqP(Program):
    first: Program
    second: Program


@dataclass(frozen=True)
class If(Program):
    cond: TestExpr
    then: Program
    orelse: Program


@dataclass(frozen=True)
class While(Program):
    cond: TestExpr
    body: Program


@dataclass(frozen=True)
class Choice(Program):
    left: Program
    right: Program


@dataclass(frozen=True)
class Weighted(Program):
    branches: tuple[tuple[Weight, Program], ...]


KEYWORDS = {"skip", "abort", "add", "if", "then", "else", "while", "do", "choice", "or",
            "weighted"}

_TOKEN = re.compile(r"\s*(?:([{}();:])|([^\s{}();:]+))")


_COMMENT = re.compile(r"#[^\n]*")


def _tokenize(text: str):
    # blank out comments so positions still refer to the original text
    text = _COMMENT.sub(lambda m: " " * len(m.group()), text)
    out, pos = [], 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        out.append((m.group(1) or m.group(2), m.start(1) if m.group(1) else m.start(2)))
        pos = m.end()
    if text[pos:].strip():
        raise ParseError(f"unexpected input at {pos}", pos)
    return out


class _ProgParser:
    def __init__(self, text, alphabets: Alphabets, semiring: Semiring):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.alphabets = alphabets
        self.semiring = semiring

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def pos(self):
        return self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)

    def take(self):
        if self.i >= len(self.toks):
            raise ParseError("unexpected end of program", len(self.text))
        tok = self.toks[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok):
        p = self.pos()
        got = self.take()
        if got != tok:
            raise ParseError(f"expected {tok!r} at {p}, found {got!r}", p)

    def program(self):
        prog = self.stmts()
        if self.peek() is not None:
            raise ParseError(f"unexpected {self.peek()!r} at {self.pos()}", self.pos())
        return prog

    def stmts(self):
        prog = self.stmt()
        while self.peek() == ";":
            self.take()
            if self.peek() in (None, "}"):
                break
            prog = SeqP(prog, self.stmt())
        return prog

    def block(self):
        if self.peek() == "{":
            self.take()
            if self.peek() == "}":
                self.take()
                return Skip()
            prog = self.stmts()
            self.expect("}")
            return prog
        return self.stmt()

    def weight(self) -> Weight:
        p = self.pos()
        if self.peek() == "{":
            self.take()
            parts = []
            while self.peek() not in ("}", None):
                parts.append(self.take())
            self.expect("}")
            tok = " ".join(parts)
        else:
            tok = self.take()
        try:
            return self.semiring.weight(tok)
        except KeyError:
            raise ParseError(f"weight {tok!r} at {p} is not an element of {self.semiring.name}",
                             p) from None

    def test_until(self, stop):
        p = self.pos()
        parts = []
        while self.peek() != stop:
            if self.peek() is None:
                raise ParseError(f"missing {stop!r} after test at {p}", p)
            parts.append(self.take())
        self.take()
        if not parts:
            raise ParseError(f"empty test at {p}", p)
        try:
            return parse_test(" ".join(parts), self.alphabets, self.semiring)
        except ParseError as exc:
            raise ParseError(f"in test at {p}: {exc}", p) from None

    def stmt(self):
        p = self.pos()
        tok = self.take()
        if tok == "skip":
            return Skip()
        if tok == "abort":
            return Abort()
        if tok == "add":
            return AddWeight(self.weight())
        if tok == "if":
            cond = self.test_until("then")
            then = self.block()
            self.expect("else")
            return If(cond, then, self.block())
        if tok == "while":
            cond = self.test_until("do")
            return While(cond, self.block())
        if tok == "choice":
            left = self.block()
            self.expect("or")
            return Choice(left, self.block())
        if tok == "weighted":
            self.expect("{")
            branches = []
            while True:
                w = self.weight()
                self.expect(":")
                branches.append((w, self.block()))
                if self.peek() == ";":
                    self.take()
                    if self.peek() == "}":
                        break
                    continue
                break
            self.expect("}")
            return Weighted(tuple(branches))
        if tok == "{":
            self.i -= 1
            return self.block()
        if tok in self.alphabets.actions:
            return Act(tok)
        if tok in self.alphabets.tests:
            raise ParseError(f"test letter {tok!r} used as a statement at {p}", p)
        raise ParseError(f"unknown symbol {tok!r} at {p}", p)


def parse_program(text: str, alphabets: Alphabets, semiring: Semiring) -> Program:
    clash = KEYWORDS.intersection(alphabets.actions + alphabets.tests)
    if clash:
        raise ParseError(f"symbol {min(clash)!r} is a program keyword", 0)
    return _ProgParser(text, alphabets, semiring).program()


def compile_program(prog: Program) -> Expr:
    """Translate a program to an expression with the standard encodings."""
    if isinstance(prog, Skip):
        return ONE
    if isinstance(prog, Abort):
        return ZERO
    if isinstance(prog, Act):
        return Action(prog.name)
    if isinstance(prog, AddWeight):
        return Scalar(ONE, prog.weight)
    if isinstance(prog, SeqP):
        return Seq(compile_program(prog.first), compile_program(prog.second))
    if isinstance(prog, If):
        b = prog.cond
        return Plus(Seq(Test(b), compile_program(prog.then)),
                    Seq(Test(TNot(b)), compile_program(prog.orelse)))
    if isinstance(prog, While):
        b = prog.cond
        return Seq(Star(Seq(Test(b), compile_program(prog.body))), Test(TNot(b)))
    if isinstance(prog, Choice):
        return Plus(compile_program(prog.left), compile_program(prog.right))
    if isinstance(prog, Weighted):
        terms = [Scalar(compile_program(p), w) for w, p in prog.branches]
        out = terms[0]
        for t in terms[1:]:
            out = Plus(out, t)
        return out
    raise TypeError(prog)


def run_program(prog: Program, ts: TransitionSystem) -> Matrix:
    return eval_M(ts, compile_program(prog))


def format_program(prog: Program, indent: int = 0) -> str:
    pad = "  " * indent

    def blk(p):
        return "{\n" + format_program(p, indent + 1) + "\n" + pad + "}"

    if isinstance(prog, Skip):
        return pad + "skip"
    if isinstance(prog, Abort):
        return pad + "abort"
    if isinstance(prog, Act):
        return pad + prog.name
    if isinstance(prog, AddWeight):
        return pad + "add {" + prog.weight.token + "}"
    if isinstance(prog, SeqP):
        return format_program(prog.first, indent) + ";\n" + format_program(prog.second, indent)
    if isinstance(prog, If):
        return (f"{pad}if {format_test(prog.cond)} then {blk(prog.then)}"
                f" else {blk(prog.orelse)}")
    if isinstance(prog, While):
        return f"{pad}while {format_test(prog.cond)} do {blk(prog.body)}"
    if isinstance(prog, Choice):
        return f"{pad}choice {blk(prog.left)} or {blk(prog.right)}"
    if isinstance(prog, Weighted):
        inner = (";\n").join(f"{pad}  {{{w.token}}}: " + blk(p).replace("\n", "\n  ")
                             for w, p in prog.branches)
        return f"{pad}weighted {{\n{inner}\n{pad}}}"
    raise TypeError(prog)


# -- ski rental ---------------------------------------------------------------

SRP_ALPHABETS = Alphabets(("a", "b"), ("p",))
SRP_SOURCE = "while p do { a; choice { add {1} } or { add {%d}; b } }"


@dataclass
class SkiRental:
    days: int
    price: int
    semiring: Semiring
    program: Program
    system: TransitionSystem

    def run(self) -> Matrix:
        return run_program(self.program, self.system)

    def optimal_cost(self) -> str:
        """The cost entry from state ``days`` to state 0, as a token."""
        m = self.run()
        return self.semiring.token(m[str(self.days), "0"])


def ski_rental(days: int, price: int) -> SkiRental:
    """The ski rental instance with ``days`` remaining and buy price ``price``.

    ``a`` decrements the day counter, ``b`` jumps to state 0 (bought skis,
    nothing left to pay) and ``p`` holds while days remain. Costs live in
    the truncated tropical semiring large enough to hold ``days + price``.
    """
    if days < 1 or price < 0:
        raise ValueError("need days >= 1 and price >= 0")
    sr = tropical(days + price + 1)
    prog = parse_program(SRP_SOURCE % price, SRP_ALPHABETS, sr)
    states = tuple(str(k) for k in range(days + 1))
    one = sr.one
    rel_a = Matrix.from_entries(states, sr, {(str(k), str(k - 1)): one for k in range(1, days + 1)})
    rel_b = Matrix.from_entries(states, sr, {(str(k), "0"): one for k in range(days + 1)})
    ts = TransitionSystem(SRP_ALPHABETS, sr, states, {"a": rel_a, "b": rel_b},
                          {"p": frozenset(states[1:])})
    return SkiRental(days, price, sr, prog, ts)


def srp_expression(price: int, semiring: Semiring) -> Expr:
    """The loop written directly as ``(p(a⊙1 + (a⊙s)b))* p̄``."""
    p = Test(TLetter("p"))
    a, b = Action("a"), Action("b")
    body = Plus(Scalar(a, semiring.weight("1")),
                Seq(Scalar(a, semiring.weight(str(price))), b))
    return Seq(Star(Seq(p, body)), Test(TNot(TLetter("p"))))
