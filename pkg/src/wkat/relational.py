"""Semiring-weighted matrices, transition systems and the Cayley embedding.

Matrices are sparse: ``rows[i][j]`` holds the element index at state
positions ``(i, j)`` and zero entries are never stored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .semiring import InvariantViolation, Semiring, Weight, load_semiring
from .series import GuardedCarrier, Series, interp_G
from .syntax import (
    Action, Alphabets, Expr, Plus, Scalar, Seq, Star, TAnd, Test, TestExpr, TLetter,
    TNot, TOne, TOr, TZero,
)

DEFAULT_STATE_CAP = 5000


class MatrixMismatch(ValueError):
    pass


class StructureError(ValueError):
    """A transition-system description is malformed."""


class Matrix:
    """A square matrix over a finite semiring, indexed by ``states``."""

    __slots__ = ("states", "semiring", "rows", "_pos")

    def __init__(self, states, semiring: Semiring, rows=None, _pos=None):
        self.states = tuple(states)
        self.semiring = semiring
        self._pos = _pos if _pos is not None else {q: i for i, q in enumerate(self.states)}
        if len(self._pos) != len(self.states):
            raise ValueError("duplicate states")
        z = semiring.zero
        self.rows: dict[int, dict[int, int]] = {}
        for i, row in (rows or {}).items():
            kept = {j: v for j, v in row.items() if v != z}
            if kept:
                self.rows[i] = kept

    @classmethod
    def zero(cls, states, semiring):
        return cls(states, semiring)

    @classmethod
    def identity(cls, states, semiring):
        return cls.diagonal(states, semiring, semiring.one)

    @classmethod
    def diagonal(cls, states, semiring, s: int, where=None):
        """Diagonal matrix with ``s`` at the positions in ``where`` (default all)."""
        states = tuple(states)
        idx = range(len(states)) if where is None else where
        return cls(states, semiring, {i: {i: s} for i in idx})

    @classmethod
    def from_entries(cls, states, semiring, entries):
        """``entries`` maps ``(q, q')`` to a :class:`Weight`, index or token."""
        m = cls(states, semiring)
        rows: dict[int, dict[int, int]] = {}
        for (q, r), v in entries.items():
            rows.setdefault(m.pos(q), {})[m.pos(r)] = _as_index(semiring, v)
        return cls(m.states, semiring, rows, m._pos)

    def pos(self, q) -> int:
        try:
            return self._pos[q]
        except KeyError:
            raise KeyError(f"unknown state {q!r}") from None

    def like(self, rows) -> "Matrix":
        return Matrix(self.states, self.semiring, rows, self._pos)

    def __getitem__(self, key) -> int:
        q, r = key
        return self.rows.get(self.pos(q), {}).get(self.pos(r), self.semiring.zero)

    def weight(self, q, r) -> Weight:
        return Weight(self.semiring, self[q, r])

    def entries(self):
        """Nonzero entries as ``((q, q'), index)`` in state order."""
        for i in sorted(self.rows):
            row = self.rows[i]
            for j in sorted(row):
                yield (self.states[i], self.states[j]), row[j]

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (self.states == other.states and self.semiring is other.semiring
                and self.rows == other.rows)

    def __repr__(self):
        n = sum(len(r) for r in self.rows.values())
        return f"Matrix({len(self.states)} states, {n} nonzero, {self.semiring.name})"

    def __add__(self, other):
        return mat_add(self, other)

    def __matmul__(self, other):
        return mat_mul(self, other)

    def is_diagonal01(self) -> bool:
        one = self.semiring.one
        return all(list(row) == [i] and row[i] == one for i, row in self.rows.items())

    def format(self, state_name=str) -> str:
        tok = self.semiring.token
        lines = [f"matrix over {self.semiring.name} ({len(self.states)} states)"]
        for i in sorted(self.rows):
            row = self.rows[i]
            cells = "  ".join(f"{state_name(self.states[j])}:{tok(row[j])}" for j in sorted(row))
            lines.append(f"{state_name(self.states[i])} -> {cells}")
        return "\n".join(lines)

    def to_dict(self, state_name=str) -> dict:
        tok = self.semiring.token
        return {
            "semiring": self.semiring.name,
            "states": [state_name(q) for q in self.states],
            "entries": [[state_name(q), state_name(r), tok(v)] for (q, r), v in self.entries()],
        }


def _as_index(semiring: Semiring, v) -> int:
    if isinstance(v, Weight):
        if v.semiring is not semiring:
            raise MatrixMismatch("weight from a different semiring")
        return v.index
    if isinstance(v, str):
        return semiring.index(v)
    return int(v)


def _check(m: Matrix, n: Matrix):
    if m.states != n.states:
        raise MatrixMismatch("matrices over different state sets")
    if m.semiring is not n.semiring:
        raise MatrixMismatch(f"matrices over {m.semiring.name} and {n.semiring.name}")


def mat_add(m: Matrix, n: Matrix) -> Matrix:
    _check(m, n)
    add, z = m.semiring.add_table, m.semiring.zero
    rows = {i: dict(r) for i, r in m.rows.items()}
    for i, row in n.rows.items():
        acc = rows.setdefault(i, {})
        for j, v in row.items():
            acc[j] = add[acc.get(j, z)][v]
    return m.like(rows)


def mat_mul(m: Matrix, n: Matrix) -> Matrix:
    _check(m, n)
    sr = m.semiring
    add, mul, z = sr.add_table, sr.mul_table, sr.zero
    rows = {}
    nrows = n.rows
    for i, row in m.rows.items():
        acc: dict[int, int] = {}
        for k, a in row.items():
            right = nrows.get(k)
            if not right:
                continue
            ma = mul[a]
            for j, b in right.items():
                acc[j] = add[acc.get(j, z)][ma[b]]
        rows[i] = acc
    return m.like(rows)


def mat_scalar(m: Matrix, s) -> Matrix:
    """``M · diag(s)``: every entry multiplied by ``s`` on the right."""
    s = _as_index(m.semiring, s)
    mul = m.semiring.mul_table
    return m.like({i: {j: mul[v][s] for j, v in row.items()} for i, row in m.rows.items()})


def mat_complement(d: Matrix) -> Matrix:
    """Swap 0 and 1 on the diagonal of a diagonal 0/1 matrix."""
    sr = d.semiring
    for i, row in d.rows.items():
        for j, v in row.items():
            if i != j:
                raise MatrixMismatch("complement of a non-diagonal matrix")
            if v != sr.one:
                raise MatrixMismatch(
                    f"complement of a matrix with diagonal entry {sr.token(v)!r} (not 0/1)")
    return d.like({i: {i: sr.one} for i in range(len(d.states)) if i not in d.rows})


def mat_star(m: Matrix) -> Matrix:
    """Least fixpoint of ``X = I + M·X`` iterated from the zero matrix."""
    ident = Matrix.identity(m.states, m.semiring)
    x = Matrix.zero(m.states, m.semiring)
    ceiling = len(m.semiring) * len(m.states) ** 2 + 2
    for _ in range(ceiling):
        nxt = mat_add(ident, mat_mul(m, x))
        if nxt.rows == x.rows:
            return x
        x = nxt
    raise InvariantViolation(f"matrix star did not stabilise in {ceiling} steps")


def mat_power(m: Matrix, n: int) -> Matrix:
    out = Matrix.identity(m.states, m.semiring)
    for _ in range(n):
        out = mat_mul(out, m)
    return out


# -- transition systems --------------------------------------------------------

@dataclass
class TransitionSystem:
    """States, a weighted matrix per action, and a state set per test letter."""

    alphabets: Alphabets
    semiring: Semiring
    states: tuple
    rel: dict[str, Matrix] = field(default_factory=dict)
    sat: dict[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        self.states = tuple(self.states)
        if not self.states:
            raise StructureError("a transition system needs at least one state")
        pos = {q: i for i, q in enumerate(self.states)}
        if len(pos) != len(self.states):
            raise StructureError("duplicate states")
        for a in self.rel:
            if a not in self.alphabets.actions:
                raise StructureError(f"relation for unknown action {a!r}")
        for p in self.sat:
            if p not in self.alphabets.tests:
                raise StructureError(f"sat set for unknown test letter {p!r}")
        for a in self.alphabets.actions:
            m = self.rel.get(a)
            if m is None:
                self.rel[a] = Matrix(self.states, self.semiring, _pos=pos)
            elif m.states != self.states or m.semiring is not self.semiring:
                raise StructureError(f"relation for {a!r} has the wrong shape or semiring")
        for p in self.alphabets.tests:
            qs = frozenset(self.sat.get(p, ()))
            if not qs <= set(self.states):
                raise StructureError(f"sat({p}) mentions unknown states")
            self.sat[p] = qs
        self._pos = pos

    def test_matrix(self, b: TestExpr) -> Matrix:
        sr = self.semiring
        if isinstance(b, TLetter):
            if b.name not in self.sat:
                raise KeyError(f"unknown test letter {b.name!r}")
            where = [self._pos[q] for q in self.sat[b.name]]
            return Matrix.diagonal(self.states, sr, sr.one, where)
        if isinstance(b, TNot):
            return mat_complement(self.test_matrix(b.arg))
        if isinstance(b, TOr):
            return mat_add(self.test_matrix(b.left), self.test_matrix(b.right))
        if isinstance(b, TAnd):
            return mat_mul(self.test_matrix(b.left), self.test_matrix(b.right))
        if isinstance(b, TZero):
            return Matrix.zero(self.states, sr)
        if isinstance(b, TOne):
            return Matrix.identity(self.states, sr)
        raise TypeError(b)


def eval_M(ts: TransitionSystem, e: Expr) -> Matrix:
    """Evaluate ``e`` to a matrix over the states of ``ts``."""
    memo: dict[int, tuple[Expr, Matrix]] = {}

    def go(x):
        hit = memo.get(id(x))
        if hit is not None and hit[0] is x:
            return hit[1]
        if isinstance(x, Action):
            if x.name not in ts.rel:
                raise KeyError(f"unknown action {x.name!r}")
            out = ts.rel[x.name]
        elif isinstance(x, Test):
            out = ts.test_matrix(x.test)
        elif isinstance(x, Plus):
            out = mat_add(go(x.left), go(x.right))
        elif isinstance(x, Seq):
            out = mat_mul(go(x.left), go(x.right))
        elif isinstance(x, Star):
            out = mat_star(go(x.arg))
        elif isinstance(x, Scalar):
            out = mat_scalar(go(x.arg), x.weight)
        else:
            raise TypeError(x)
        memo[id(x)] = (x, out)
        return out

    return go(e)


# -- file format ---------------------------------------------------------------

def parse_ts(text: str, alphabets: Alphabets | None = None,
             semiring: Semiring | None = None, base_dir: Path | None = None) -> TransitionSystem:
    """Read the line-oriented transition-system format::

        semiring NAME
        actions a b        (optional; inferred from rel lines otherwise)
        tests p q          (optional; inferred from sat lines otherwise)
        states q0 q1 ...
        rel a q q' s       (unlisted entries are zero)
        sat p q1 q2 ...

    With ``alphabets`` given, symbols outside them are structural errors.
    """
    sr_name = None
    states = None
    decl_actions = decl_tests = None
    rels: list[tuple[int, str, str, str, str]] = []
    sats: list[tuple[int, str, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        if head == "semiring":
            if len(args) != 1:
                raise StructureError(f"line {lineno}: semiring expects one name")
            sr_name = args[0]
        elif head == "states":
            if not args:
                raise StructureError(f"line {lineno}: empty state list")
            states = args
        elif head == "actions":
            decl_actions = args
        elif head == "tests":
            decl_tests = args
        elif head == "rel":
            if len(args) != 4:
                raise StructureError(f"line {lineno}: rel expects 'a q q2 weight'")
            rels.append((lineno, *args))
        elif head == "sat":
            if not args:
                raise StructureError(f"line {lineno}: sat expects a test letter")
            sats.append((lineno, args[0], args[1:]))
        else:
            raise StructureError(f"line {lineno}: unknown directive {head!r}")
    if states is None:
        raise StructureError("missing 'states' line")
    if semiring is None:
        if sr_name is None:
            raise StructureError("missing 'semiring' line")
        try:
            semiring = load_semiring(sr_name if base_dir is None or not (base_dir / sr_name).exists()
                                     else str(base_dir / sr_name))
        except KeyError as exc:
            raise StructureError(str(exc)) from None
    if alphabets is None:
        acts = decl_actions if decl_actions is not None else list(dict.fromkeys(r[1] for r in rels))
        tests = decl_tests if decl_tests is not None else list(dict.fromkeys(s[1] for s in sats))
        alphabets = Alphabets(tuple(acts), tuple(tests))
    state_set = set(states)
    entries: dict[str, dict] = {}
    for lineno, a, q, r, s in rels:
        if a not in alphabets.actions:
            raise StructureError(f"line {lineno}: unknown action {a!r}")
        for x in (q, r):
            if x not in state_set:
                raise StructureError(f"line {lineno}: unknown state {x!r}")
        try:
            entries.setdefault(a, {})[(q, r)] = semiring.index(s)
        except KeyError as exc:
            raise StructureError(f"line {lineno}: {exc.args[0]}") from None
    sat: dict[str, frozenset] = {}
    for lineno, p, qs in sats:
        if p not in alphabets.tests:
            raise StructureError(f"line {lineno}: unknown test letter {p!r}")
        bad = [q for q in qs if q not in state_set]
        if bad:
            raise StructureError(f"line {lineno}: unknown state {bad[0]!r}")
        sat[p] = sat.get(p, frozenset()) | frozenset(qs)
    rel = {a: Matrix.from_entries(states, semiring, es) for a, es in entries.items()}
    return TransitionSystem(alphabets, semiring, tuple(states), rel, sat)


def format_ts(ts: TransitionSystem) -> str:
    tok = ts.semiring.token
    lines = [f"semiring {ts.semiring.name}",
             "actions " + " ".join(ts.alphabets.actions),
             "tests " + " ".join(ts.alphabets.tests),
             "states " + " ".join(map(str, ts.states))]
    for a in ts.alphabets.actions:
        for (q, r), v in ts.rel[a].entries():
            lines.append(f"rel {a} {q} {r} {tok(v)}")
    for p in ts.alphabets.tests:
        members = [q for q in ts.states if q in ts.sat[p]]
        lines.append(" ".join(["sat", p, *map(str, members)]))
    return "\n".join(lines) + "\n"


# -- Cayley construction --------------------------------------------------------

def guarded_states(alphabets: Alphabets, bound: int, cap: int = DEFAULT_STATE_CAP) -> tuple:
    carrier = GuardedCarrier(alphabets)
    n = carrier.count(bound)
    if n > cap:
        raise ValueError(f"{n} guarded strings up to length {bound} exceed the cap {cap}")
    return tuple(carrier.words(bound))


def cayley_of_series(r: Series, bound: int, states: tuple | None = None) -> Matrix:
    """``cay(r)[w, v] = r(u)`` when ``v = w ⋄ u``, zero otherwise, over the
    guarded strings of length at most ``bound``."""
    if not isinstance(r.carrier, GuardedCarrier):
        raise ValueError("cay is defined on guarded series")
    if r.bound < bound:
        raise ValueError(f"series bound {r.bound} is below the state bound {bound}")
    if states is None:
        states = guarded_states(r.carrier.alphabets, bound)
    pos = {q: i for i, q in enumerate(states)}
    by_head: dict[int, list] = {}
    for u, c in r.coeffs.items():
        by_head.setdefault(u[0], []).append((u, c))
    rows = {}
    for i, w in enumerate(states):
        row = {}
        prefix = w[:-1]
        for u, c in by_head.get(w[-1], ()):
            j = pos.get(prefix + u)
            if j is not None:
                row[j] = c
        if row:
            rows[i] = row
    return Matrix(states, r.semiring, rows, pos)


def cayley_system(alphabets: Alphabets, semiring: Semiring, bound: int,
                  cap: int = DEFAULT_STATE_CAP) -> TransitionSystem:
    """The system on guarded strings ``≤ bound`` whose actions and tests are
    the Cayley images of their guarded-language semantics."""
    states = guarded_states(alphabets, bound, cap)
    rel = {a: cayley_of_series(interp_G(Action(a), bound, alphabets, semiring), bound, states)
           for a in alphabets.actions}
    sat = {}
    for p in alphabets.tests:
        m = cayley_of_series(interp_G(Test(TLetter(p)), bound, alphabets, semiring), bound, states)
        if not m.is_diagonal01():
            raise InvariantViolation(f"cay of test {p!r} is not a 0/1 diagonal")
        sat[p] = frozenset(states[i] for i in m.rows)
    return TransitionSystem(alphabets, semiring, states, rel, sat)


@dataclass
class AgreementReport:
    bound: int
    states: int
    entries_checked: int
    mismatches: list[tuple[tuple, tuple, str, str]]

    @property
    def agrees(self) -> bool:
        return not self.mismatches


def check_cayley(e: Expr, bound: int, alphabets: Alphabets, semiring: Semiring,
                 system: TransitionSystem | None = None) -> AgreementReport:
    """Compare ``eval_M`` on the Cayley system with ``cay(interp_G(e))``
    entry by entry (every pair of states, exact equality)."""
    ts = system if system is not None else cayley_system(alphabets, semiring, bound)
    lhs = eval_M(ts, e)
    rhs = cayley_of_series(interp_G(e, bound, alphabets, semiring), bound, ts.states)
    tok = semiring.token
    mismatches = []
    for i in set(lhs.rows) | set(rhs.rows):
        a, b = lhs.rows.get(i, {}), rhs.rows.get(i, {})
        for j in set(a) | set(b):
            x, y = a.get(j, semiring.zero), b.get(j, semiring.zero)
            if x != y:
                mismatches.append((ts.states[i], ts.states[j], tok(x), tok(y)))
    n = len(ts.states)
    return AgreementReport(bound, n, n * n, sorted(mismatches, key=str))
