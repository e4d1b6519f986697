import itertools
import json
import random

import pytest

from wkat.equiv import (
    AXIOM_NAMES, GenConfig, MatrixModel, SeriesModel, axiom_suite, bounded_equiv, gen_random,
    mutate, mutations, random_expr, refutation_entry,
)
from wkat.normal_form import Normalizer
from wkat.relational import cayley_system, eval_M
from wkat.semiring import get_builtin, verify_copi
from wkat.syntax import Action, Alphabets, Expr, Test, parse_expr

from oracles import is_copi

BOOL = get_builtin("BOOL")
TROP3 = get_builtin("TROP3")
P = Alphabets(("a", "b"), ("p",))


def test_sliding_agrees():
    v = bounded_equiv(parse_expr("(a b)* a", P, BOOL), parse_expr("a (b a)*", P, BOOL), 4, P, BOOL)
    assert v.agrees and v.render(P) == "AgreeUpTo(4)"
    assert "open question" in v.to_dict(P)["note"]


def test_weight_distinguishes():
    al = Alphabets(("a",), ())
    v = bounded_equiv(parse_expr("a", al, TROP3), parse_expr("a@{2}", al, TROP3), 4, al, TROP3)
    assert not v.agrees
    assert v.witness == (0, "a", 0)
    assert (v.left, v.right) == ("0", "2")
    assert v.render(al) == "Distinguisher ε a ε: 0 vs 2"


def test_least_witness_is_reported():
    v = bounded_equiv(parse_expr("a a + b", P, BOOL), parse_expr("b", P, BOOL), 4, P, BOOL)
    assert len(v.witness) == 5 and v.witness[1] == "a"


def test_reflexive():
    e = parse_expr("(a + p b)* ~p", P, TROP3)
    assert bounded_equiv(e, e, 3, P, TROP3).agrees


def test_generators_are_deterministic():
    cfg = GenConfig(seed=42, semiring=TROP3)
    a = list(itertools.islice(gen_random(cfg), 20))
    b = list(itertools.islice(gen_random(cfg), 20))
    assert a == b
    s1 = next(gen_random(cfg, "system", n_states=4))
    s2 = next(gen_random(cfg, "system", n_states=4))
    assert s1.rel == s2.rel and s1.sat == s2.sat
    g1 = next(gen_random(cfg, "guarded_sum", size=4))
    assert g1.is_well_formed()


def test_depth_one_gives_leaves():
    cfg = GenConfig(depth=1, seed=3)
    for e in itertools.islice(gen_random(cfg), 50):
        assert isinstance(e, (Action, Test))


def test_density_zero():
    cfg = GenConfig(seed=1)
    ts = next(gen_random(cfg, "system", n_states=5, density=0.0))
    assert all(not m.rows for m in ts.rel.values())


def test_config_errors():
    with pytest.raises(ValueError):
        GenConfig(depth=0)
    with pytest.raises(ValueError):
        GenConfig(actions=(), tests=())
    with pytest.raises(ValueError):
        next(gen_random(GenConfig(), "tree"))


def test_matrix_suite_bool():
    cfg = GenConfig(semiring=BOOL, seed=5)
    report = axiom_suite(MatrixModel(BOOL, 3), cfg, 200)
    assert report.passed, report.render()
    assert {r.name for r in report.results} == set(AXIOM_NAMES)
    assert report.result("fix_left_constructed").premise_held == 200
    summary = json.loads(report.to_json())
    assert summary["passed"] and len(summary["axioms"]) == len(AXIOM_NAMES)
    assert "PASS" in report.render().splitlines()[-1]


def test_series_suite_luk3():
    luk = get_builtin("LUK3")
    cfg = GenConfig(semiring=luk, seed=6)
    report = axiom_suite(SeriesModel(cfg.alphabets, luk, 3), cfg, 200)
    assert report.passed, report.render()
    assert report.result("fix_right_constructed").premise_held == 200


def corrupted_trop3():
    # 1 ⊗ 1 := 0 breaks associativity and distributivity
    return mutate(TROP3, "mul", 1, 1, 0)


def test_suite_catches_corrupted_table():
    bad = corrupted_trop3()
    assert not verify_copi(bad).passed
    cfg = GenConfig(semiring=bad, seed=1)
    report = axiom_suite(MatrixModel(bad, 3), cfg, 100)
    assert not report.passed
    first = report.failures[0]
    assert first.witness and first.failures > 0
    cfg = GenConfig(semiring=bad, seed=1)
    assert not axiom_suite(SeriesModel(cfg.alphabets, bad, 3), cfg, 100).passed


def test_mutation_sweep_trop3():
    surviving = []
    cells = {}
    for table, i, j, m in mutations(TROP3):
        caught = not verify_copi(m).passed
        assert caught == (not is_copi(m))
        cells.setdefault((table, i, j), []).append(caught)
        if not caught:
            surviving.append((table, i, j, m.token(m.mul_table[i][j])))
    assert len(cells) == 3 * 16
    assert all(any(v) for v in cells.values())
    assert surviving == [("mul", 1, 1, "1"), ("mul", 1, 1, "∞")]


def test_refutations_show_up_in_cayley_system():
    al = Alphabets(("a",), ("p",))
    cfg = GenConfig(depth=3, actions=("a",), semiring=TROP3, seed=12)
    ts = cayley_system(al, TROP3, 3)
    ctx = Normalizer(al, TROP3)
    exprs = list(itertools.islice(gen_random(cfg), 40))
    separated = 0
    for e, f in zip(exprs, exprs[1:]):
        v = bounded_equiv(e, f, 3, al, TROP3)
        if v.agrees:
            continue
        separated += 1
        q, r = refutation_entry(v)
        assert eval_M(ts, e)[q, r] != eval_M(ts, f)[q, r]
        he, hf = ctx.hat(e).to_expr(), ctx.hat(f).to_expr()
        assert not bounded_equiv(he, hf, 3, al, TROP3).agrees
    assert separated > 10


def test_hat_agrees_with_source():
    cfg = GenConfig(depth=4, semiring=get_builtin("LUK4"), seed=13)
    ctx = Normalizer(cfg.alphabets, cfg.semiring)
    for e in itertools.islice(gen_random(cfg), 40):
        assert bounded_equiv(e, ctx.hat(e).to_expr(), 4, cfg.alphabets, cfg.semiring).agrees


def test_random_expr_respects_depth():
    from wkat.syntax import expr_depth
    cfg = GenConfig(depth=4, seed=0)
    rng = random.Random(0)
    for _ in range(100):
        e = random_expr(rng, cfg)
        assert isinstance(e, Expr) and expr_depth(e) <= 4
