"""Length-bounded weighted languages and the standard interpretations.

Two carriers share one engine:

* guarded strings, stored as tuples ``(G1, a1, G2, ..., Gn)`` with atoms as
  integer indices (see :attr:`Alphabets.atoms`) and actions as names; the
  length of such a string is its atom count ``n``;
* words of the free monoid, stored as tuples of letter names; the length is
  the letter count.

A :class:`Series` keeps only nonzero coefficients, as element indices of its
semiring.  Every operation is exact for all keys within the bound because
factors of a word are never longer than the word itself.
"""

from __future__ import annotations

import itertools
from collections import defaultdict

from .semiring import InvariantViolation, Semiring, Weight
from .syntax import (
    Action, Alphabets, Expr, Plus, Scalar, Seq, Star, TAnd, Test, TLetter, TNot,
    TOne, TOr, TZero, bnf_expr,
)

MAX_BOUND = 8
DEFAULT_BOUND = 4


class CarrierMismatch(ValueError):
    pass


# -- guarded strings ---------------------------------------------------------

def gs_length(w: tuple) -> int:
    return (len(w) + 1) // 2


def gs_head(w: tuple) -> int:
    return w[0]


def gs_tail(w: tuple) -> int:
    return w[-1]


def gs_body(w: tuple) -> tuple:
    return w[1:]


def make_guarded(atoms, letters) -> tuple:
    atoms, letters = list(atoms), list(letters)
    if not atoms or len(atoms) != len(letters) + 1:
        raise ValueError("a guarded string has one more atom than it has actions")
    out = [atoms[0]]
    for a, g in zip(letters, atoms[1:]):
        out += [a, g]
    return tuple(out)


def fusion(s1: tuple, s2: tuple):
    """``s1 ⋄ s2``, or ``None`` when the tail of ``s1`` is not the head of ``s2``."""
    if s1[-1] != s2[0]:
        return None
    return s1 + s2[1:]


def format_guarded(w: tuple, alphabets: Alphabets) -> str:
    return " ".join(alphabets.atom_str(x) if i % 2 == 0 else x for i, x in enumerate(w))


def parse_guarded(text: str, alphabets: Alphabets) -> tuple:
    """Read back :func:`format_guarded` output (atoms spelled with ``~``
    accepted as well, e.g. ``p~q a ~pq``)."""
    names = {}
    for i, g in enumerate(alphabets.atoms):
        names[str(g)] = i
        names["".join(g.literals())] = i
    parts = text.split()
    out = []
    for k, part in enumerate(parts):
        if k % 2 == 0:
            if part not in names:
                raise ValueError(f"{part!r} is not an atom")
            out.append(names[part])
        else:
            if part not in alphabets.actions:
                raise ValueError(f"{part!r} is not an action")
            out.append(part)
    if not out or len(out) % 2 == 0:
        raise ValueError("a guarded string starts and ends with an atom")
    return tuple(out)


def guarded_to_word(w: tuple, alphabets: Alphabets) -> tuple:
    """Spell a guarded string as a word over actions and literals."""
    out = []
    for i, x in enumerate(w):
        if i % 2 == 0:
            out += alphabets.atoms[x].literals()
        else:
            out.append(x)
    return tuple(out)


def free_length_of(k: int, n_tests: int) -> int:
    """Letter count of a guarded string with ``k`` atoms."""
    return k * n_tests + (k - 1)


# -- carriers ----------------------------------------------------------------

class GuardedCarrier:
    kind = "guarded"

    def __init__(self, alphabets: Alphabets):
        self.alphabets = alphabets

    def __eq__(self, other):
        return isinstance(other, GuardedCarrier) and other.alphabets == self.alphabets

    def __hash__(self):
        return hash(("guarded", self.alphabets))

    def length(self, w):
        return (len(w) + 1) // 2

    def units(self):
        return [(g,) for g in range(self.alphabets.n_atoms)]

    def words(self, bound):
        """All guarded strings with at most ``bound`` atoms, shortest first."""
        atoms = range(self.alphabets.n_atoms)
        acts = self.alphabets.actions
        for k in range(1, bound + 1):
            for gs in itertools.product(atoms, repeat=k):
                for letters in itertools.product(acts, repeat=k - 1):
                    yield make_guarded(gs, letters)

    def count(self, bound):
        a, s = self.alphabets.n_atoms, len(self.alphabets.actions)
        return sum(a ** k * s ** (k - 1) for k in range(1, bound + 1))

    def factorizations(self, w):
        return [(w[: 2 * i + 1], w[2 * i:]) for i in range(self.length(w))]

    def format(self, w):
        return format_guarded(w, self.alphabets)

    def sort_key(self, w):
        return (self.length(w), tuple(str(x) for x in w))


class FreeCarrier:
    kind = "free"

    def __init__(self, letters):
        self.letters = tuple(letters)

    def __eq__(self, other):
        return isinstance(other, FreeCarrier) and other.letters == self.letters

    def __hash__(self):
        return hash(("free", self.letters))

    def length(self, w):
        return len(w)

    def units(self):
        return [()]

    def words(self, bound):
        for k in range(bound + 1):
            yield from itertools.product(self.letters, repeat=k)

    def count(self, bound):
        return sum(len(self.letters) ** k for k in range(bound + 1))

    def factorizations(self, w):
        return [(w[:i], w[i:]) for i in range(len(w) + 1)]

    def format(self, w):
        return " ".join(w) if w else "ε"

    def sort_key(self, w):
        return (len(w), w)


def free_letters(alphabets: Alphabets) -> tuple[str, ...]:
    """Actions followed by the literals ``p`` and ``~p`` of every test letter."""
    return alphabets.actions + alphabets.tests + tuple("~" + p for p in alphabets.tests)


def factorizations(w: tuple, carrier) -> list[tuple[tuple, tuple]]:
    return carrier.factorizations(w)


# -- series ------------------------------------------------------------------

class Series:
    """A weighted language truncated to words of length at most ``bound``."""

    __slots__ = ("carrier", "bound", "semiring", "coeffs")

    def __init__(self, carrier, bound: int, semiring: Semiring, coeffs=None):
        if bound < 0 or bound > MAX_BOUND * 4:
            raise ValueError(f"bound {bound} outside the supported range")
        self.carrier = carrier
        self.bound = bound
        self.semiring = semiring
        z = semiring.zero
        self.coeffs: dict[tuple, int] = {}
        if coeffs:
            for w, c in coeffs.items():
                if carrier.length(w) > bound:
                    raise ValueError(f"key {w!r} exceeds bound {bound}")
                if c != z:
                    self.coeffs[w] = c

    @classmethod
    def zero(cls, carrier, bound, semiring):
        return cls(carrier, bound, semiring)

    @classmethod
    def unit(cls, carrier, bound, semiring):
        return cls(carrier, bound, semiring, {u: semiring.one for u in carrier.units()})

    @classmethod
    def indicator(cls, carrier, bound, semiring, keys, weight=None):
        """``s_K``: weight ``s`` (default the semiring one) on every key in ``K``."""
        s = semiring.one if weight is None else weight
        return cls(carrier, bound, semiring,
                   {w: s for w in keys if carrier.length(w) <= bound})

    def __getitem__(self, w) -> int:
        return self.coeffs.get(w, self.semiring.zero)

    def weight_at(self, w) -> Weight:
        return Weight(self.semiring, self[w])

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (self.carrier == other.carrier and self.bound == other.bound
                and self.semiring is other.semiring and self.coeffs == other.coeffs)

    def __repr__(self):
        return f"Series({self.carrier.kind}, L={self.bound}, {len(self.coeffs)} nonzero)"

    def support(self):
        return sorted(self.coeffs, key=self.carrier.sort_key)

    def restrict(self, bound: int) -> "Series":
        length = self.carrier.length
        return Series(self.carrier, bound, self.semiring,
                      {w: c for w, c in self.coeffs.items() if length(w) <= bound})

    def items_formatted(self):
        tok = self.semiring.token
        return [(self.carrier.format(w), tok(self.coeffs[w])) for w in self.support()]

    def __add__(self, other):
        return series_add(self, other)

    def __mul__(self, other):
        return series_mul(self, other)


def _check(r1: Series, r2: Series):
    if r1.carrier != r2.carrier:
        raise CarrierMismatch("series over different carriers")
    if r1.semiring is not r2.semiring:
        raise CarrierMismatch(
            f"series over different semirings ({r1.semiring.name}, {r2.semiring.name})")
    if r1.bound != r2.bound:
        raise CarrierMismatch(f"series with different bounds ({r1.bound}, {r2.bound})")


def series_add(r1: Series, r2: Series) -> Series:
    _check(r1, r2)
    add = r1.semiring.add_table
    z = r1.semiring.zero
    out = dict(r1.coeffs)
    for w, c in r2.coeffs.items():
        out[w] = add[out.get(w, z)][c]
    return Series(r1.carrier, r1.bound, r1.semiring, out)


def series_scalar(r: Series, s) -> Series:
    """``(r ⊙ s)(w) = r(w) · s``; ``s`` may be a :class:`Weight` or an index."""
    if isinstance(s, Weight):
        if s.semiring is not r.semiring:
            raise CarrierMismatch("scalar from a different semiring")
        s = s.index
    mul = r.semiring.mul_table
    return Series(r.carrier, r.bound, r.semiring,
                  {w: mul[c][s] for w, c in r.coeffs.items()})


def series_mul(r1: Series, r2: Series) -> Series:
    """Cauchy product: sum over all factorizations of each word."""
    _check(r1, r2)
    sr = r1.semiring
    add, mul, z = sr.add_table, sr.mul_table, sr.zero
    bound = r1.bound
    out: dict[tuple, int] = {}
    if isinstance(r1.carrier, GuardedCarrier):
        by_head = defaultdict(list)
        for w2, c2 in r2.coeffs.items():
            by_head[w2[0]].append((len(w2), w2, c2))
        for bucket in by_head.values():
            bucket.sort(key=lambda t: t[0])
        # raw tuple lengths: 2k-1 for k atoms; fused length = n1 + n2 - 1
        cap = 2 * bound - 1
        for w1, c1 in r1.coeffs.items():
            bucket = by_head.get(w1[-1])
            if not bucket:
                continue
            n1 = len(w1)
            prefix = w1[:-1]
            for n2, w2, c2 in bucket:
                if n1 + n2 - 1 > cap:
                    break
                w = prefix + w2
                out[w] = add[out.get(w, z)][mul[c1][c2]]
    else:
        by_len = defaultdict(list)
        for w2, c2 in r2.coeffs.items():
            by_len[len(w2)].append((w2, c2))
        for w1, c1 in r1.coeffs.items():
            room = bound - len(w1)
            for n2 in range(room + 1):
                for w2, c2 in by_len.get(n2, ()):
                    w = w1 + w2
                    out[w] = add[out.get(w, z)][mul[c1][c2]]
    return Series(r1.carrier, bound, sr, out)


def series_star(r: Series) -> Series:
    """Least fixpoint of ``X = 1 + r·X``, iterated from the zero series.

    The iterates are the partial sums of ``r^n``; one repeated iterate is a
    fixpoint.  The step ceiling only turns a broken semiring into an error.
    """
    unit = Series.unit(r.carrier, r.bound, r.semiring)
    x = Series.zero(r.carrier, r.bound, r.semiring)
    ceiling = len(r.semiring) * r.carrier.count(r.bound) + 2
    for _ in range(ceiling):
        nxt = series_add(unit, series_mul(r, x))
        if nxt.coeffs == x.coeffs:
            return x
        x = nxt
    raise InvariantViolation(f"series star did not stabilise in {ceiling} steps")


# -- interpretations ---------------------------------------------------------

class _Evaluator:
    """Homomorphic evaluation with sharing: identical subtrees (by identity)
    are evaluated once."""

    def __init__(self, leaf):
        self.leaf = leaf
        self.memo: dict[int, tuple[Expr, Series]] = {}

    def __call__(self, e: Expr) -> Series:
        hit = self.memo.get(id(e))
        if hit is not None and hit[0] is e:
            return hit[1]
        if isinstance(e, Plus):
            out = series_add(self(e.left), self(e.right))
        elif isinstance(e, Seq):
            out = series_mul(self(e.left), self(e.right))
        elif isinstance(e, Star):
            out = series_star(self(e.arg))
        elif isinstance(e, Scalar):
            out = series_scalar(self(e.arg), e.weight)
        else:
            out = self.leaf(e)
        self.memo[id(e)] = (e, out)
        return out


def interp_G(e: Expr, bound: int, alphabets: Alphabets, semiring: Semiring) -> Series:
    """Guarded-language semantics of ``e`` up to ``bound`` atoms."""
    if not 1 <= bound <= MAX_BOUND:
        raise ValueError(f"bound must be within 1..{MAX_BOUND}")
    carrier = GuardedCarrier(alphabets)
    n = alphabets.n_atoms
    cache: dict = {}

    def leaf(x):
        if isinstance(x, Action):
            if x.name not in alphabets.actions:
                raise KeyError(f"unknown action {x.name!r}")
            keys = [(g, x.name, h) for g in range(n) for h in range(n)]
            return Series.indicator(carrier, bound, semiring, keys)
        if isinstance(x, Test):
            key = ("test", x.test)
            if key not in cache:
                cache[key] = Series.indicator(
                    carrier, bound, semiring, [(g,) for g in alphabets.sat_atoms(x.test)])
            return cache[key]
        raise TypeError(x)

    return _Evaluator(leaf)(e)


def interp_L(e: Expr, bound: int, alphabets: Alphabets, semiring: Semiring) -> Series:
    """Free-monoid semantics of ``e`` over actions and literals.

    Tests are put into Boolean normal form first; each literal ``p`` / ``~p``
    is then an ordinary letter, test sums and products are sums and products
    of words, ``1`` is the empty word.
    """
    carrier = FreeCarrier(free_letters(alphabets))
    e = bnf_expr(e)

    def test_series(b):
        if isinstance(b, TLetter):
            return Series.indicator(carrier, bound, semiring, [(b.name,)])
        if isinstance(b, TNot):
            return Series.indicator(carrier, bound, semiring, [("~" + b.arg.name,)])
        if isinstance(b, TOr):
            return series_add(test_series(b.left), test_series(b.right))
        if isinstance(b, TAnd):
            return series_mul(test_series(b.left), test_series(b.right))
        if isinstance(b, TZero):
            return Series.zero(carrier, bound, semiring)
        if isinstance(b, TOne):
            return Series.unit(carrier, bound, semiring)
        raise TypeError(b)

    def leaf(x):
        if isinstance(x, Action):
            return Series.indicator(carrier, bound, semiring, [(x.name,)])
        if isinstance(x, Test):
            return test_series(x.test)
        raise TypeError(x)

    return _Evaluator(leaf)(e)
