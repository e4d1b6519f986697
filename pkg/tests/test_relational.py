import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from wkat.equiv import GenConfig, gen_random, random_system
from wkat.relational import (
    Matrix, MatrixMismatch, StructureError, TransitionSystem, cayley_of_series, cayley_system,
    check_cayley, eval_M, format_ts, guarded_states, mat_add, mat_complement, mat_mul, mat_power,
    mat_star, parse_ts,
)
from wkat.semiring import builtin_semirings, get_builtin
from wkat.series import GuardedCarrier, Series, interp_G
from wkat.syntax import ONE, Action, Alphabets, TLetter, Test, parse_expr
from wkat.wprog import ski_rental, srp_expression

from oracles import dense_eval, matrix_as_dense

BOOL = get_builtin("BOOL")
TROP3 = get_builtin("TROP3")
P = Alphabets(("a",), ("p",))
G, H = 0, 1


def test_identity_and_complement():
    m = Matrix.from_entries([0, 1], TROP3, {(0, 1): "1", (1, 1): "2"})
    ident = Matrix.identity([0, 1], TROP3)
    assert mat_mul(ident, m) == m == mat_mul(m, ident)
    d = Matrix.diagonal([0, 1], BOOL, BOOL.one, [0])
    assert mat_complement(d) == Matrix.diagonal([0, 1], BOOL, BOOL.one, [1])


def test_trop3_product_without_paths():
    m = Matrix.from_entries([0, 1], TROP3, {(0, 1): "1"})
    assert list(mat_mul(m, m).entries()) == []


def test_complement_errors():
    with pytest.raises(MatrixMismatch):
        mat_complement(Matrix.from_entries([0, 1], BOOL, {(0, 1): "1"}))
    with pytest.raises(MatrixMismatch):
        mat_complement(Matrix.diagonal([0, 1], TROP3, TROP3.index("1")))
    with pytest.raises(MatrixMismatch):
        mat_add(Matrix.zero([0], BOOL), Matrix.zero([0, 1], BOOL))
    with pytest.raises(MatrixMismatch):
        mat_add(Matrix.zero([0], BOOL), Matrix.zero([0], TROP3))


def test_star_examples():
    assert mat_star(Matrix.zero([0, 1], BOOL)) == Matrix.identity([0, 1], BOOL)
    m = Matrix.from_entries([0, 1], BOOL, {(0, 1): "1"})
    assert sorted(q for q, _ in mat_star(m).entries()) == [(0, 0), (0, 1), (1, 1)]
    m = Matrix.from_entries(["q0", "q1", "q2"], TROP3, {("q0", "q1"): "1", ("q1", "q2"): "1"})
    s = mat_star(m)
    assert TROP3.token(s["q0", "q2"]) == "2"
    assert all(TROP3.token(s[q, q]) == "0" for q in m.states)


@pytest.mark.parametrize("sr", builtin_semirings()[::2], ids=lambda s: s.name)
def test_star_unrolls(sr):
    rng = random.Random(3)
    al = Alphabets(("a",), ())
    for _ in range(20):
        m = random_system(rng, al, sr, rng.randint(1, 6), 0.5).rel["a"]
        s = mat_star(m)
        assert s == mat_add(Matrix.identity(m.states, sr), mat_mul(m, s))


def test_eval_basics():
    ts = ski_rental(3, 2).system
    assert eval_M(ts, ONE) == Matrix.identity(ts.states, ts.semiring)
    p = eval_M(ts, Test(TLetter("p")))
    assert p == Matrix.diagonal(ts.states, ts.semiring, ts.semiring.one, [1, 2, 3])


def test_eval_srp_expression():
    inst = ski_rental(3, 2)
    m = eval_M(inst.system, srp_expression(2, inst.semiring))
    assert inst.semiring.token(m["3", "0"]) == "2"


@pytest.mark.parametrize("sr", builtin_semirings()[::3], ids=lambda s: s.name)
def test_eval_matches_dense_oracle(sr):
    cfg = GenConfig(depth=4, tests=("p", "q"), semiring=sr, seed=8)
    rng = random.Random(9)
    for e in itertools.islice(gen_random(cfg), 40):
        ts = random_system(rng, cfg.alphabets, sr, rng.randint(1, 5))
        assert matrix_as_dense(eval_M(ts, e)) == dense_eval(e, ts)


def test_star_power_paths():
    rng = random.Random(1)
    al = Alphabets(("a",), ())
    for _ in range(10):
        m = random_system(rng, al, TROP3, 4, 0.5).rel["a"]
        total = Matrix.zero(m.states, TROP3)
        for n in range(12):
            total = mat_add(total, mat_power(m, n))
        assert total == mat_star(m)


TS_TEXT = """\
semiring TROP3
states s t u
rel a s t 1
rel a t u 1
sat p t u
"""


def test_ts_file():
    ts = parse_ts(TS_TEXT)
    assert ts.alphabets.actions == ("a",) and ts.alphabets.tests == ("p",)
    assert TROP3.token(ts.rel["a"]["s", "t"]) == "1"
    assert ts.sat["p"] == {"t", "u"}
    again = parse_ts(format_ts(ts))
    assert again.rel == ts.rel and again.sat == ts.sat
    star = eval_M(ts, parse_expr("a*", ts.alphabets, ts.semiring))
    assert TROP3.token(star["s", "u"]) == "2"


@pytest.mark.parametrize("text", [
    TS_TEXT.replace("rel a t u 1", "rel c t u 1"),
    TS_TEXT.replace("sat p t u", "sat r t"),
    TS_TEXT.replace("rel a t u 1", "rel a t v 1"),
    TS_TEXT.replace("rel a t u 1", "rel a t u 7"),
    TS_TEXT.replace("states s t u", ""),
])
def test_ts_file_errors(text):
    with pytest.raises(StructureError):
        parse_ts(text, Alphabets(("a",), ("p",)))


def test_ts_invariants():
    with pytest.raises(StructureError):
        TransitionSystem(P, BOOL, (), {}, {})
    ts = TransitionSystem(P, BOOL, ("x",), {}, {})
    assert ts.rel["a"] == Matrix.zero(("x",), BOOL) and ts.sat["p"] == frozenset()


def test_cayley_system_examples():
    ts = cayley_system(P, BOOL, 1)
    assert set(ts.states) == {(G,), (H,)}
    assert list(ts.rel["a"].entries()) == []
    ts = cayley_system(P, BOOL, 2)
    assert ts.rel["a"][(G,), (G, "a", H)] == BOOL.one
    assert ts.sat["p"] == {w for w in ts.states if w[-1] == G}


def test_cayley_of_series_examples():
    states = guarded_states(P, 3)
    one = cayley_of_series(interp_G(ONE, 3, P, TROP3), 3, states)
    assert one == Matrix.identity(states, TROP3)
    zero = Series.zero(GuardedCarrier(P), 3, TROP3)
    assert cayley_of_series(zero, 3, states) == Matrix.zero(states, TROP3)
    r = interp_G(parse_expr("a@{1} a", P, TROP3), 3, P, TROP3)
    cay = cayley_of_series(r, 3, states)
    for w in states:
        assert cay[(w[0],), w] == r[w]
    with pytest.raises(ValueError):
        cayley_of_series(interp_G(ONE, 2, P, TROP3), 3, states)


def test_cayley_is_injective_on_samples():
    cfg = GenConfig(depth=3, actions=("a",), tests=("p",), semiring=TROP3, seed=2)
    states = guarded_states(P, 3)
    exprs = list(itertools.islice(gen_random(cfg), 30))
    for e, f in zip(exprs, exprs[1:]):
        r, s = interp_G(e, 3, P, TROP3), interp_G(f, 3, P, TROP3)
        cr, cs = cayley_of_series(r, 3, states), cayley_of_series(s, 3, states)
        for w in set(r.coeffs) | set(s.coeffs):
            if r[w] != s[w]:
                assert cr[(w[0],), w] != cs[(w[0],), w]


@pytest.mark.parametrize("text", ["a", "p a ~p", "(p a)* ~p", "a@{2}", "(a + p)* a@{1}"])
def test_cayley_claim_hand_set(text):
    for L in (2, 3, 4):
        rep = check_cayley(parse_expr(text, P, TROP3), L, P, TROP3)
        assert rep.agrees, rep.mismatches[:3]
        assert rep.entries_checked == len(guarded_states(P, L)) ** 2


def test_cayley_cap():
    with pytest.raises(ValueError, match="cap"):
        cayley_system(Alphabets(("a", "b"), ("p", "q")), BOOL, 5, cap=100)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_matrix_semiring_laws(seed):
    rng = random.Random(seed)
    al = Alphabets(("a", "b", "c"), ())
    ts = random_system(rng, al, TROP3, rng.randint(1, 5), 0.5)
    x, y, z = (ts.rel[k] for k in "abc")
    assert mat_mul(mat_mul(x, y), z) == mat_mul(x, mat_mul(y, z))
    assert mat_mul(x, mat_add(y, z)) == mat_add(mat_mul(x, y), mat_mul(x, z))
    assert mat_add(x, y) == mat_add(y, x)
    assert eval_M(ts, Action("a")) is x
