import pytest
from hypothesis import given, strategies as st

from wkat.semiring import (
    SemiringStructureError, UnsupportedDerivation, Semiring, Weight, boolean, builtin_semirings,
    derive_natural_order, format_semiring, get_builtin, load_semiring, natural_order,
    parse_semiring, scalar_star, tropical, verify_copi,
)

from oracles import is_copi, scalar_star as oracle_star

BUILTINS = builtin_semirings()


@pytest.mark.parametrize("sr", BUILTINS, ids=lambda s: s.name)
def test_builtins_are_copi(sr):
    report = verify_copi(sr)
    assert report.passed, report.render()
    assert is_copi(sr)


@pytest.mark.parametrize("sr", BUILTINS, ids=lambda s: s.name)
def test_star_is_one_and_a_fixpoint(sr):
    for s in range(len(sr)):
        st_ = sr.star(s)
        assert st_ == sr.one
        assert st_ == sr.add(sr.one, sr.mul(s, st_))
        assert st_ == oracle_star(sr, s)


def test_trop3_tables():
    t = get_builtin("TROP3")
    assert t.elements == ("0", "1", "2", "∞")
    assert t.token(t.zero) == "∞" and t.token(t.one) == "0"
    assert t.token(t.mul(t.index("1"), t.index("1"))) == "2"
    assert t.token(t.mul(t.index("2"), t.index("1"))) == "∞"
    assert t.token(t.add(t.index("2"), t.index("1"))) == "1"
    assert t.index("inf") == t.zero


def test_luk3_tables():
    luk = get_builtin("LUK3")
    assert luk.elements == ("0", "1/2", "1")
    half = luk.index("1/2")
    assert luk.token(luk.mul(half, half)) == "0"
    assert luk.token(luk.add(half, luk.zero)) == "1/2"


def test_scalar_star_examples():
    luk = get_builtin("LUK3")
    assert scalar_star(luk.weight("1/2")).token == "1"
    t = get_builtin("TROP3")
    assert scalar_star(t.weight("1")).token == "0"
    for sr in (luk, t, get_builtin("BOOL")):
        assert scalar_star(Weight(sr, sr.zero)).index == sr.one


def test_zero_bounded_witness():
    add = [[0, 1], [1, 1]]
    mul = [[0, 0], [0, 1]]
    leq = [[True, False], [True, True]]   # 1 <= 0, reflexive
    bad = Semiring("B?", ["0", "1"], add, mul, 0, 1, leq)
    report = verify_copi(bad)
    assert not report.passed
    check = report.check("zero_bounded")
    assert not check.passed and check.witness == ("1",)


def test_idempotence_is_informative_only():
    report = verify_copi(get_builtin("TROP2"))
    assert report.check("add_idempotent").required is False


def test_natural_order_trop3_is_total():
    t = derive_natural_order(get_builtin("TROP3"))
    order = ["∞", "2", "1", "0"]
    for i, x in enumerate(order):
        for j, y in enumerate(order):
            assert t.le(t.index(x), t.index(y)) == (i <= j)


def test_natural_order_boolean():
    assert natural_order(boolean().add_table, 2) == [[True, True], [False, True]]


def test_natural_order_needs_idempotence():
    with pytest.raises(UnsupportedDerivation):
        natural_order([[0, 1], [1, 0]], 2)


def test_file_round_trip():
    for sr in (get_builtin("TROP3"), get_builtin("LUK4"), boolean()):
        back = parse_semiring(format_semiring(sr))
        assert back.elements == sr.elements
        assert back.add_table == sr.add_table and back.mul_table == sr.mul_table
        assert back.leq_table == sr.leq_table
        assert (back.zero, back.one) == (sr.zero, sr.one)


def test_file_errors():
    text = format_semiring(boolean())
    missing = "\n".join(line for line in text.splitlines() if line != "add 1 1 1")
    with pytest.raises(SemiringStructureError, match="unspecified"):
        parse_semiring(missing)
    with pytest.raises(SemiringStructureError, match="unknown element"):
        parse_semiring(text.replace("mul 1 1 1", "mul 1 1 7"))
    with pytest.raises(SemiringStructureError):
        parse_semiring(text + "frobnicate 1\n")
    with pytest.raises(SemiringStructureError):
        Semiring("X", ["0", "1"], [[0, 1]], [[0, 0], [0, 1]], 0, 1, [[True, True], [False, True]])


def test_order_natural_line():
    text = format_semiring(boolean())
    text = "\n".join(line for line in text.splitlines() if not line.startswith("leq"))
    assert parse_semiring(text + "\norder natural\n").leq_table == boolean().leq_table


def test_lookup():
    assert get_builtin("TROP(3)") is get_builtin("trop3")
    assert load_semiring("LUK5").name == "LUK5"
    assert get_builtin("TROP11").name == "TROP11"
    with pytest.raises(KeyError):
        load_semiring("NOPE")
    with pytest.raises(ValueError):
        tropical(0)


def test_weights_do_not_mix():
    a = get_builtin("TROP3").weight("1")
    b = get_builtin("TROP4").weight("1")
    with pytest.raises(ValueError):
        a + b
    assert (a * a).token == "2"
    assert (a + a).token == "1"


@given(st.sampled_from(BUILTINS), st.data())
def test_weight_arithmetic_distributes(sr, data):
    idx = st.integers(0, len(sr) - 1)
    x, y, z = (Weight(sr, data.draw(idx)) for _ in range(3))
    assert x * (y + z) == x * y + x * z
    assert (x * y) * z == x * (y * z)
    assert Weight(sr, sr.zero) <= x <= Weight(sr, sr.one)
