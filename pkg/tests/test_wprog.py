import random

import pytest

from wkat.equiv import bounded_equiv, random_system, random_test
from wkat.relational import Matrix, eval_M
from wkat.semiring import Weight, builtin_semirings, get_builtin
from wkat.syntax import Alphabets, ParseError, Plus, Scalar, Seq, Star, TLetter, TNot, Test, Action, ONE
from wkat.wprog import (
    SRP_ALPHABETS, Abort, Act, AddWeight, Choice, If, SeqP, Skip, Weighted, While,
    compile_program, format_program, parse_program, run_program, ski_rental, srp_expression,
)

from oracles import matrix_as_dense, path_sum, ski_rental_cost

TROP6 = get_builtin("TROP6")
AL = Alphabets(("a", "b"), ("p", "q"))
p = TLetter("p")


def parse(text, sr=TROP6, al=AL):
    return parse_program(text, al, sr)


def test_parse_srp():
    prog = parse("while p do { a; choice { add 1 } or { add 2; b } }")
    assert prog == While(p, SeqP(Act("a"), Choice(AddWeight(TROP6.weight("1")),
                                                  SeqP(AddWeight(TROP6.weight("2")), Act("b")))))


def test_parse_simple_forms():
    assert parse("skip") == Skip()
    assert parse("abort") == Abort()
    assert parse("if p then a else b") == If(p, Act("a"), Act("b"))
    assert parse("add {2}") == parse("add 2")
    assert parse("weighted { {1}: a ; {2}: { b; a } }") == Weighted((
        (TROP6.weight("1"), Act("a")), (TROP6.weight("2"), SeqP(Act("b"), Act("a")))))
    assert parse("if ~(p q) then {} else skip") == If(
        parse_program("if ~(p q) then skip else skip", AL, TROP6).cond, Skip(), Skip())


@pytest.mark.parametrize("text", ["c", "add {9}", "while p a", "if p then a", "p", "a;;",
                                  "choice a", "weighted { 1 a }"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse(text)


def test_keyword_clash():
    with pytest.raises(ParseError, match="keyword"):
        parse_program("skip", Alphabets(("do",), ()), TROP6)


def test_compile_rules():
    prog = parse("while p do a")
    assert compile_program(prog) == Seq(Star(Seq(Test(p), Action("a"))), Test(TNot(p)))
    prog = parse("weighted { 1: a ; 2: b }")
    assert compile_program(prog) == Plus(Scalar(Action("a"), TROP6.weight("1")),
                                         Scalar(Action("b"), TROP6.weight("2")))
    assert compile_program(parse("add 3")) == Scalar(ONE, TROP6.weight("3"))


def test_compiled_srp_equals_written_expression():
    for n, s in [(1, 1), (3, 2), (2, 5), (5, 4)]:
        inst = ski_rental(n, s)
        direct = srp_expression(s, inst.semiring)
        assert run_program(inst.program, inst.system) == eval_M(inst.system, direct)
        compiled = compile_program(inst.program)
        assert bounded_equiv(compiled, direct, 4, SRP_ALPHABETS, inst.semiring).agrees


def test_run_examples():
    inst = ski_rental(3, 2)
    assert inst.semiring.name == "TROP6"
    assert inst.optimal_cost() == "2"
    inst = ski_rental(2, 5)
    assert inst.semiring.name == "TROP8"
    assert inst.optimal_cost() == "2"
    ts = inst.system
    assert run_program(Skip(), ts) == Matrix.identity(ts.states, ts.semiring)


@pytest.mark.parametrize("n", range(1, 6))
def test_ski_rental_against_strategies(n):
    for s in range(6):
        assert ski_rental(n, s).optimal_cost() == str(ski_rental_cost(n, s))


def random_program(rng, sr, depth):
    if depth <= 1 or rng.random() < 0.25:
        return rng.choice([Skip(), Abort(), Act("a"), Act("b"),
                           AddWeight(Weight(sr, rng.randrange(len(sr))))])
    kind = rng.choice(["seq", "if", "choice", "weighted"])
    sub = lambda: random_program(rng, sr, depth - 1)  # noqa: E731
    if kind == "seq":
        return SeqP(sub(), sub())
    if kind == "if":
        return If(random_test(rng, ("p", "q")), sub(), sub())
    if kind == "choice":
        return Choice(sub(), sub())
    return Weighted(tuple((Weight(sr, rng.randrange(len(sr))), sub())
                          for _ in range(rng.randint(1, 3))))


@pytest.mark.parametrize("sr", builtin_semirings()[::2], ids=lambda s: s.name)
def test_while_free_programs_match_path_sums(sr):
    rng = random.Random(17)
    for _ in range(40):
        prog = random_program(rng, sr, 4)
        ts = random_system(rng, AL, sr, rng.randint(1, 4))
        assert matrix_as_dense(run_program(prog, ts)) == path_sum(prog, ts)


def test_program_laws():
    rng = random.Random(2)
    sr = get_builtin("LUK4")
    one = Weight(sr, sr.one)
    for _ in range(30):
        prog, other = random_program(rng, sr, 3), random_program(rng, sr, 3)
        ts = random_system(rng, AL, sr, 3)
        assert run_program(SeqP(prog, Skip()), ts) == run_program(prog, ts)
        assert (run_program(Weighted(((one, prog), (one, other))), ts)
                == run_program(Choice(prog, other), ts))


def test_format_program_round_trip():
    # sequencing re-associates on the way back, so compare meanings
    rng = random.Random(5)
    for _ in range(30):
        prog = random_program(rng, TROP6, 4)
        again = parse(format_program(prog))
        ts = random_system(rng, AL, TROP6, 3)
        assert run_program(again, ts) == run_program(prog, ts)
