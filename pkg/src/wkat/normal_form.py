"""Guarded sums and the hat transform ``e ↦ ê``.

A guarded expression is one of

* ``ZeroForm``             the expression ``0 ⊙ 1``
* ``AtomForm(G, s)``       ``G ⊙ s``
* ``SpanForm(G, m, H, s)`` ``G m H ⊙ s``

where the middle ``m`` always begins and ends with an action when read as a
word over actions and literals, so that ``G m H`` spells guarded strings
only.  A guarded sum is a tuple of guarded expressions; the empty tuple is
``0 ⊙ 1``.

Middles are hash-consed inside a :class:`Normalizer`, so syntactically equal
middles are the same object and summands merge by identity.
"""

from __future__ import annotations

from dataclasses import dataclass

from .semiring import Semiring, Weight, verify_copi
from .syntax import (
    ONE, Action, Alphabets, Expr, Plus, Scalar, Seq, Star, TAnd, Test, TLetter,
    TNot, TOne, TOr, TZero, expr_to_str, to_bnf,
)


class IntegralityError(ValueError):
    """The semiring has an element above its one; normal forms are unsound."""

    def __init__(self, semiring: Semiring, witness: str):
        self.witness = witness
        super().__init__(
            f"semiring {semiring.name} is not integral: element {witness!r} is not "
            f"below the one {semiring.token(semiring.one)!r}; refusing to normalize")


@dataclass(frozen=True)
class ZeroForm:
    pass


@dataclass(frozen=True)
class AtomForm:
    g: int
    weight: Weight


@dataclass(frozen=True, eq=False)
class SpanForm:
    g: int
    mid: Expr
    h: int
    weight: Weight

    def __eq__(self, other):
        return (isinstance(other, SpanForm) and self.g == other.g and self.h == other.h
                and self.weight == other.weight
                and (self.mid is other.mid or self.mid == other.mid))

    def __hash__(self):
        return hash((self.g, self.h, self.weight))


GuardedExpr = ZeroForm | AtomForm | SpanForm


def head(x: GuardedExpr) -> int:
    if isinstance(x, ZeroForm):
        raise ValueError("0 ⊙ 1 has no head")
    return x.g


def tail(x: GuardedExpr) -> int:
    if isinstance(x, ZeroForm):
        raise ValueError("0 ⊙ 1 has no tail")
    return x.g if isinstance(x, AtomForm) else x.h


def weight(x: GuardedExpr, semiring: Semiring) -> Weight:
    if isinstance(x, ZeroForm):
        return Weight(semiring, semiring.one)
    return x.weight


class Normalizer:
    """Operations on guarded sums over fixed alphabets and semiring."""

    def __init__(self, alphabets: Alphabets, semiring: Semiring, check_integral=True):
        if check_integral:
            check = verify_copi(semiring).check("integral")
            if not check.passed:
                raise IntegralityError(semiring, check.witness[0])
        self.alphabets = alphabets
        self.semiring = semiring
        self.one_w = Weight(semiring, semiring.one)
        self._table: dict[tuple, Expr] = {}
        self._canon: dict[int, Expr] = {}
        self._atoms = [self.intern(alphabets.atom_expr(i)) for i in range(alphabets.n_atoms)]

    # -- hash-consing ---------------------------------------------------------

    def intern(self, e: Expr) -> Expr:
        if id(e) in self._canon:
            return e
        if isinstance(e, (Plus, Seq)):
            left, right = self.intern(e.left), self.intern(e.right)
            key = (type(e), id(left), id(right))
            make = lambda: type(e)(left, right)  # noqa: E731
        elif isinstance(e, Star):
            arg = self.intern(e.arg)
            key = (Star, id(arg))
            make = lambda: Star(arg)  # noqa: E731
        elif isinstance(e, Scalar):
            arg = self.intern(e.arg)
            key = (Scalar, id(arg), e.weight.index)
            make = lambda: Scalar(arg, e.weight)  # noqa: E731
        else:
            key = (type(e), e)
            make = lambda: e  # noqa: E731
        node = self._table.get(key)
        if node is None:
            node = self._table[key] = make()
            self._canon[id(node)] = node
        return node

    def seq(self, left, right):
        return self.intern(Seq(left, right))

    def weighted(self, e: Expr, w: Weight) -> Expr:
        """``e ⊙ w``, or ``e`` itself when ``w`` is the one."""
        return e if w.index == self.semiring.one else self.intern(Scalar(e, w))

    def atom(self, i: int) -> Expr:
        return self._atoms[i]

    # -- sums ------------------------------------------------------------------

    def wrap(self, summands) -> "GuardedSum":
        return GuardedSum(self, self.canonical(summands))

    def canonical(self, summands) -> tuple:
        """Drop ``0 ⊙ 1`` and zero weights, then merge summands sharing head
        and tail.

        Atoms merge by adding weights.  Spans with the same middle do too;
        spans with different middles become one span
        ``G (m1@{s1} + m2@{s2} + ...) H @{1}``.  A sum therefore never holds
        more than ``|At|^2 + |At|`` summands.
        """
        zero = self.semiring.zero
        atoms: dict[int, Weight] = {}
        spans: dict[tuple[int, int], list] = {}
        for x in summands:
            if isinstance(x, ZeroForm) or x.weight.index == zero:
                continue
            if isinstance(x, AtomForm):
                atoms[x.g] = atoms[x.g] + x.weight if x.g in atoms else x.weight
                continue
            group = spans.setdefault((x.g, x.h), [])
            for i, (mid, w) in enumerate(group):
                if mid is x.mid:
                    group[i] = (mid, w + x.weight)
                    break
            else:
                group.append((x.mid, x.weight))
        out: list[GuardedExpr] = [AtomForm(g, w) for g, w in atoms.items() if w.index != zero]
        for (g, h), group in spans.items():
            group = [(m, w) for m, w in group if w.index != zero]
            if not group:
                continue
            if len(group) == 1:
                out.append(SpanForm(g, group[0][0], h, group[0][1]))
                continue
            parts = [m if w.index == self.semiring.one else self.intern(Scalar(m, w))
                     for m, w in group]
            mid = parts[0]
            for p in parts[1:]:
                mid = self.intern(Plus(mid, p))
            out.append(SpanForm(g, mid, h, self.one_w))
        return tuple(out)

    def one(self) -> "GuardedSum":
        return self.wrap(AtomForm(g, self.one_w) for g in range(self.alphabets.n_atoms))

    def zero(self) -> "GuardedSum":
        return GuardedSum(self, ())

    def bullet(self, e: GuardedExpr, f: GuardedExpr) -> GuardedExpr:
        if isinstance(e, ZeroForm) or isinstance(f, ZeroForm) or tail(e) != head(f):
            return ZeroForm()
        w = e.weight * f.weight
        if isinstance(f, AtomForm):
            if isinstance(e, AtomForm):
                return AtomForm(e.g, w)
            return SpanForm(e.g, e.mid, e.h, w)
        if isinstance(e, AtomForm):
            return SpanForm(e.g, f.mid, f.h, w)
        mid = self.seq(self.seq(e.mid, self.atom(e.h)), f.mid)
        return SpanForm(e.g, mid, f.h, w)

    def add(self, u, v):
        return self.wrap(tuple(u) + tuple(v))

    def mul(self, u, v):
        return self.wrap(self.bullet(e, f) for e in u for f in v)

    def scalar(self, u, t: Weight):
        out = []
        for x in u:
            if isinstance(x, AtomForm):
                out.append(AtomForm(x.g, x.weight * t))
            elif isinstance(x, SpanForm):
                out.append(SpanForm(x.g, x.mid, x.h, x.weight * t))
        return self.wrap(out)

    def star_single(self, x: GuardedExpr) -> "GuardedSum":
        if not isinstance(x, SpanForm):
            return self.one()
        if x.g != x.h:
            return self.add(self.one(), (x,))
        # G m (G m ⊙ s)* G ⊙ s
        loop = self.intern(Star(self.weighted(self.seq(self.atom(x.g), x.mid), x.weight)))
        return self.add(self.one(), (SpanForm(x.g, self.seq(x.mid, loop), x.g, x.weight),))

    def loop_form(self, estar, g: SpanForm):
        """``head(g) body(g) e⊛ head(g) ⊙ weight(g)`` with the adjacent atoms
        fused, i.e. restricted to the summands of ``e⊛`` running from
        ``tail(g)`` back to ``head(g)``.  ``None`` when no summand does
        (the loop is then ``0``)."""
        terms = []
        for h in estar:
            if head(h) != g.h or tail(h) != g.g:
                continue
            if isinstance(h, AtomForm):
                terms.append(self.weighted(ONE, h.weight))
            else:
                terms.append(self.weighted(self.seq(self.atom(g.h), h.mid), h.weight))
        if not terms:
            return None
        z = terms[0]
        for t in terms[1:]:
            z = self.intern(Plus(z, t))
        return SpanForm(g.g, self.seq(g.mid, z), g.g, g.weight)

    def star(self, u) -> "GuardedSum":
        summands = self.canonical(u)
        if not summands:
            return self.one()
        if len(summands) == 1:
            return self.star_single(summands[0])
        estar = self.star(summands[:-1])
        g = summands[-1]
        if isinstance(g, AtomForm):
            # g ≤ 1 by integrality, so (e + g)* = e*
            return estar
        f = self.loop_form(estar, g)
        fstar = self.one() if f is None else self.star_single(f)
        chain = self.mul(self.mul(self.mul(estar, fstar), (g,)), estar)
        return self.add(estar, chain)

    # -- hat ---------------------------------------------------------------------

    def hat(self, e: Expr) -> "GuardedSum":
        memo: dict[int, tuple] = {}

        def go(x):
            hit = memo.get(id(x))
            if hit is not None and hit[0] is x:
                return hit[1]
            if isinstance(x, Action):
                if x.name not in self.alphabets.actions:
                    raise KeyError(f"unknown action {x.name!r}")
                act = self.intern(x)
                n = self.alphabets.n_atoms
                out = self.wrap(SpanForm(g, act, h, self.one_w)
                                for g in range(n) for h in range(n))
            elif isinstance(x, Test):
                out = self.hat_test(to_bnf(x.test))
            elif isinstance(x, Plus):
                out = self.add(go(x.left), go(x.right))
            elif isinstance(x, Seq):
                out = self.mul(go(x.left), go(x.right))
            elif isinstance(x, Scalar):
                if x.weight.semiring is not self.semiring:
                    raise ValueError("weight from a different semiring")
                out = self.scalar(go(x.arg), x.weight)
            elif isinstance(x, Star):
                out = self.star(go(x.arg))
            else:
                raise TypeError(x)
            memo[id(x)] = (x, out)
            return out

        return go(e)

    def hat_test(self, b) -> "GuardedSum":
        if isinstance(b, (TLetter, TNot)):
            return self.wrap(AtomForm(g, self.one_w) for g in sorted(self.alphabets.sat_atoms(b)))
        if isinstance(b, TOr):
            return self.add(self.hat_test(b.left), self.hat_test(b.right))
        if isinstance(b, TAnd):
            return self.mul(self.hat_test(b.left), self.hat_test(b.right))
        if isinstance(b, TZero):
            return self.zero()
        if isinstance(b, TOne):
            return self.one()
        raise TypeError(b)

    # -- rendering ---------------------------------------------------------------

    def summand_expr(self, x: GuardedExpr) -> Expr:
        if isinstance(x, ZeroForm):
            return Scalar(Test(TZero()), self.one_w)
        if isinstance(x, AtomForm):
            return Scalar(self.atom(x.g), x.weight)
        return Scalar(self.seq(self.seq(self.atom(x.g), x.mid), self.atom(x.h)), x.weight)


class GuardedSum:
    """A normalized expression: a finite sum of guarded expressions."""

    def __init__(self, ctx: Normalizer, summands: tuple):
        self.ctx = ctx
        self.summands = tuple(summands)
        self._expr = None

    def __iter__(self):
        return iter(self.summands)

    def __len__(self):
        return len(self.summands)

    def __repr__(self):
        return f"GuardedSum({len(self.summands)} summands)"

    def __eq__(self, other):
        if not isinstance(other, GuardedSum):
            return NotImplemented
        return set(self.summands) == set(other.summands) and len(self) == len(other)

    __hash__ = None

    def to_expr(self) -> Expr:
        """The sum as an ordinary expression (``0@{1}`` when empty)."""
        if self._expr is None:
            ctx = self.ctx
            parts = [ctx.summand_expr(x) for x in self.summands]
            if not parts:
                self._expr = ctx.summand_expr(ZeroForm())
            else:
                out = parts[0]
                for p in parts[1:]:
                    out = Plus(out, p)
                self._expr = out
        return self._expr

    def sorted_summands(self) -> list:
        """Summands ordered by (head, printed body, tail)."""
        ctx = self.ctx

        def key(x):
            if isinstance(x, AtomForm):
                return (x.g, "", x.g)
            return (x.g, expr_to_str(Seq(x.mid, ctx.atom(x.h))), x.h)

        return sorted(self.summands, key=key)

    def format(self) -> str:
        """Canonical printing, one summand per line as ``G body @{s}``."""
        ctx = self.ctx
        if not self.summands:
            return "0@{" + ctx.one_w.token + "}"
        lines = []
        for x in self.sorted_summands():
            e = ctx.atom(x.g) if isinstance(x, AtomForm) else Seq(
                Seq(ctx.atom(x.g), x.mid), ctx.atom(x.h))
            lines.append(f"{expr_to_str(e)} @{{{x.weight.token}}}")
        return "\n".join(lines)

    def is_well_formed(self) -> bool:
        n = self.ctx.alphabets.n_atoms
        for x in self.summands:
            if isinstance(x, AtomForm):
                if not 0 <= x.g < n:
                    return False
            elif isinstance(x, SpanForm):
                if not (0 <= x.g < n and 0 <= x.h < n and isinstance(x.mid, Expr)):
                    return False
            elif not isinstance(x, ZeroForm):
                return False
        return True


# -- module-level conveniences ---------------------------------------------------

def hat(e: Expr, alphabets: Alphabets, semiring: Semiring) -> GuardedSum:
    return Normalizer(alphabets, semiring).hat(e)


def bullet(e: GuardedExpr, f: GuardedExpr, ctx: Normalizer) -> GuardedExpr:
    return ctx.bullet(e, f)


def gs_mul(u: GuardedSum, v: GuardedSum) -> GuardedSum:
    return u.ctx.mul(u, v)


def gs_add(u: GuardedSum, v: GuardedSum) -> GuardedSum:
    return u.ctx.add(u, v)


def gs_scalar(u: GuardedSum, t: Weight) -> GuardedSum:
    return u.ctx.scalar(u, t)


def gs_star(u: GuardedSum) -> GuardedSum:
    return u.ctx.star(u)
