"""Finite commutative semirings given as explicit operation tables.

Elements are opaque string tokens; internally every operation works on
element indices so that tables can be looked up directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path


class SemiringStructureError(ValueError):
    """A semiring description is malformed (missing cells, unknown tokens)."""


class UnsupportedDerivation(ValueError):
    """The natural order was requested for a non-idempotent addition."""


class InvariantViolation(RuntimeError):
    """An iteration that must terminate did not; the semiring is broken."""


class Semiring:
    """A finite semiring with a declared partial order.

    ``add``, ``mul`` and ``leq`` are square tables indexed by element
    position.  ``aliases`` maps extra spellings to element indices, for
    instance ``inf`` for the tropical ``∞``.
    """

    def __init__(self, name, elements, add, mul, zero, one, leq, aliases=None):
        self.name = name
        self.elements = tuple(elements)
        n = len(self.elements)
        if n == 0:
            raise SemiringStructureError(f"{name}: no elements")
        if len(set(self.elements)) != n:
            raise SemiringStructureError(f"{name}: duplicate element tokens")
        self.add_table = _check_table(name, "add", add, n, closed=True)
        self.mul_table = _check_table(name, "mul", mul, n, closed=True)
        self.leq_table = _check_table(name, "leq", leq, n, closed=False)
        for label, idx in (("zero", zero), ("one", one)):
            if not isinstance(idx, int) or not 0 <= idx < n:
                raise SemiringStructureError(f"{name}: {label} index {idx!r} out of range")
        self.zero = zero
        self.one = one
        self._index = {tok: i for i, tok in enumerate(self.elements)}
        for alias, idx in (aliases or {}).items():
            self._index.setdefault(alias, idx)
        self._star_cache: dict[int, int] = {}

    def __repr__(self):
        return f"Semiring({self.name!r}, {len(self.elements)} elements)"

    def __len__(self):
        return len(self.elements)

    def index(self, token: str) -> int:
        try:
            return self._index[token.strip()]
        except KeyError:
            raise KeyError(f"{token!r} is not an element of {self.name}") from None

    def token(self, i: int) -> str:
        return self.elements[i]

    def weight(self, token: str) -> "Weight":
        return Weight(self, self.index(token))

    def add(self, x: int, y: int) -> int:
        return self.add_table[x][y]

    def mul(self, x: int, y: int) -> int:
        return self.mul_table[x][y]

    def le(self, x: int, y: int) -> bool:
        return self.leq_table[x][y]

    def sum(self, xs) -> int:
        acc = self.zero
        add = self.add_table
        for x in xs:
            acc = add[acc][x]
        return acc

    @property
    def idempotent(self) -> bool:
        return all(self.add_table[x][x] == x for x in range(len(self)))

    def star(self, s: int) -> int:
        """Stabilised sum of powers ``1 + s + s^2 + ...``."""
        try:
            return self._star_cache[s]
        except KeyError:
            pass
        n = len(self)
        total = self.one
        power = self.one
        for _ in range(n * n + 1):
            power = self.mul_table[power][s]
            nxt = self.add_table[total][power]
            # P_{k+1} = 1 + s*P_k, so one repeated partial sum is final
            if nxt == total:
                self._star_cache[s] = total
                return total
            total = nxt
        raise InvariantViolation(
            f"star of {self.token(s)!r} in {self.name} did not stabilise "
            f"within {n * n} steps"
        )


def _check_table(name, label, table, n, closed):
    rows = [list(row) for row in table]
    if len(rows) != n or any(len(row) != n for row in rows):
        raise SemiringStructureError(f"{name}: {label} table is not {n}x{n}")
    for i, row in enumerate(rows):
        for j, v in enumerate(row):
            if closed:
                if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < n:
                    raise SemiringStructureError(
                        f"{name}: {label}[{i}][{j}] = {v!r} is not an element index"
                    )
            elif not isinstance(v, bool):
                raise SemiringStructureError(f"{name}: {label}[{i}][{j}] must be a bool")
    return tuple(tuple(row) for row in rows)


@dataclass(frozen=True)
class Weight:
    """An element of a particular semiring."""

    semiring: Semiring = field(compare=False, repr=False)
    index: int

    def __post_init__(self):
        if not 0 <= self.index < len(self.semiring):
            raise ValueError(f"index {self.index} out of range for {self.semiring.name}")

    def __eq__(self, other):
        if not isinstance(other, Weight):
            return NotImplemented
        return self.semiring is other.semiring and self.index == other.index

    def __hash__(self):
        return hash((id(self.semiring), self.index))

    def _same(self, other):
        if not isinstance(other, Weight):
            return NotImplemented
        if other.semiring is not self.semiring:
            raise ValueError(
                f"cannot combine weights of {self.semiring.name} and {other.semiring.name}"
            )
        return other

    def __add__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return Weight(self.semiring, self.semiring.add(self.index, other.index))

    def __mul__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return Weight(self.semiring, self.semiring.mul(self.index, other.index))

    def __le__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return self.semiring.le(self.index, other.index)

    def star(self) -> "Weight":
        return Weight(self.semiring, self.semiring.star(self.index))

    @property
    def token(self) -> str:
        return self.semiring.token(self.index)

    def __str__(self):
        return self.token

    def __repr__(self):
        return f"Weight({self.semiring.name}:{self.token})"


def scalar_star(s: Weight) -> Weight:
    return s.star()


# -- axiom verification ------------------------------------------------------

REQUIRED_CHECKS = (
    "add_associative",
    "mul_associative",
    "add_commutative",
    "mul_commutative",
    "add_identity",
    "mul_identity",
    "annihilation",
    "left_distributive",
    "right_distributive",
    "leq_reflexive",
    "leq_antisymmetric",
    "leq_transitive",
    "add_monotone",
    "mul_monotone",
    "zero_bounded",
    "integral",
)
INFORMATIVE_CHECKS = ("add_idempotent",)


@dataclass
class AxiomCheck:
    name: str
    passed: bool
    required: bool = True
    witness: tuple | None = None


@dataclass
class VerificationReport:
    semiring: str
    checks: list[AxiomCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def check(self, name: str) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def failures(self) -> list[AxiomCheck]:
        return [c for c in self.checks if c.required and not c.passed]

    def to_dict(self) -> dict:
        return {
            "semiring": self.semiring,
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "required": c.required,
                    "witness": list(c.witness) if c.witness is not None else None,
                }
                for c in self.checks
            ],
        }

    def render(self) -> str:
        lines = [f"semiring {self.semiring}"]
        for c in self.checks:
            status = "ok" if c.passed else ("FAIL" if c.required else "no")
            tag = "" if c.required else " (informative)"
            wit = f"  witness={c.witness}" if c.witness is not None else ""
            lines.append(f"  {c.name:<20} {status}{tag}{wit}")
        lines.append("verdict: " + ("copi-semiring" if self.passed else "NOT a copi-semiring"))
        return "\n".join(lines)


def _first(pred, arity, n):
    for xs in itertools.product(range(n), repeat=arity):
        if not pred(*xs):
            return xs
    return None


def verify_copi(spec: Semiring) -> VerificationReport:
    """Check every copi-semiring axiom by exhaustive enumeration.

    Witnesses are reported as element tokens.
    """
    n = len(spec)
    A, M, L = spec.add_table, spec.mul_table, spec.leq_table
    z, o = spec.zero, spec.one
    preds = {
        "add_associative": (3, lambda x, y, w: A[A[x][y]][w] == A[x][A[y][w]]),
        "mul_associative": (3, lambda x, y, w: M[M[x][y]][w] == M[x][M[y][w]]),
        "add_commutative": (2, lambda x, y: A[x][y] == A[y][x]),
        "mul_commutative": (2, lambda x, y: M[x][y] == M[y][x]),
        "add_identity": (1, lambda x: A[z][x] == x and A[x][z] == x),
        "mul_identity": (1, lambda x: M[o][x] == x and M[x][o] == x),
        "annihilation": (1, lambda x: M[z][x] == z and M[x][z] == z),
        "left_distributive": (3, lambda x, y, w: M[x][A[y][w]] == A[M[x][y]][M[x][w]]),
        "right_distributive": (3, lambda x, y, w: M[A[x][y]][w] == A[M[x][w]][M[y][w]]),
        "add_idempotent": (1, lambda x: A[x][x] == x),
        "leq_reflexive": (1, lambda x: L[x][x]),
        "leq_antisymmetric": (2, lambda x, y: not (L[x][y] and L[y][x]) or x == y),
        "leq_transitive": (3, lambda x, y, w: not (L[x][y] and L[y][w]) or L[x][w]),
        "add_monotone": (3, lambda x, y, w: not L[x][y] or L[A[x][w]][A[y][w]]),
        "mul_monotone": (3, lambda x, y, w: not L[x][y] or L[M[x][w]][M[y][w]]),
        "zero_bounded": (1, lambda x: L[z][x]),
        "integral": (1, lambda x: L[x][o]),
    }
    checks = []
    for name in REQUIRED_CHECKS + INFORMATIVE_CHECKS:
        arity, pred = preds[name]
        bad = _first(pred, arity, n)
        checks.append(
            AxiomCheck(
                name,
                bad is None,
                required=name in REQUIRED_CHECKS,
                witness=None if bad is None else tuple(spec.token(i) for i in bad),
            )
        )
    return VerificationReport(spec.name, checks)


def natural_order(add, n) -> list[list[bool]]:
    """``x <= y`` iff ``x + y == y``; only meaningful for idempotent addition."""
    for x in range(n):
        if add[x][x] != x:
            raise UnsupportedDerivation(
                f"addition is not idempotent (element #{x}); supply the order explicitly"
            )
    return [[add[x][y] == y for y in range(n)] for x in range(n)]


def derive_natural_order(spec: Semiring) -> Semiring:
    """Return a copy of ``spec`` whose order is the natural one."""
    try:
        leq = natural_order(spec.add_table, len(spec))
    except UnsupportedDerivation as exc:
        raise UnsupportedDerivation(f"{spec.name}: {exc}") from None
    return Semiring(spec.name, spec.elements, spec.add_table, spec.mul_table,
                    spec.zero, spec.one, leq)


# -- built-ins -----------------------------------------------------------------

INF = "∞"


def boolean() -> Semiring:
    add = [[0, 1], [1, 1]]
    mul = [[0, 0], [0, 1]]
    return Semiring("BOOL", ["0", "1"], add, mul, 0, 1, natural_order(add, 2))


def tropical(k: int) -> Semiring:
    """Truncated tropical semiring on ``{0, ..., k-1, ∞}`` with min and
    saturating addition."""
    if k < 1:
        raise ValueError("tropical semiring needs k >= 1")
    elements = [str(i) for i in range(k)] + [INF]
    inf = k

    def plus(x, y):
        return min(x, y)

    def times(x, y):
        if x == inf or y == inf:
            return inf
        return x + y if x + y < k else inf

    idx = range(k + 1)
    add = [[plus(x, y) for y in idx] for x in idx]
    mul = [[times(x, y) for y in idx] for x in idx]
    return Semiring(f"TROP{k}", elements, add, mul, inf, 0,
                    natural_order(add, k + 1), aliases={"inf": inf})


def lukasiewicz(n: int) -> Semiring:
    """``n``-element Łukasiewicz semiring on ``{m/(n-1)}`` with max and the
    Łukasiewicz t-norm."""
    if n < 2:
        raise ValueError("Łukasiewicz semiring needs n >= 2")
    vals = [Fraction(m, n - 1) for m in range(n)]
    elements = [str(v) for v in vals]
    add = [[max(x, y) for y in range(n)] for x in range(n)]
    mul = [[vals.index(max(Fraction(0), vals[x] + vals[y] - 1)) for y in range(n)]
           for x in range(n)]
    return Semiring(f"LUK{n}", elements, add, mul, 0, n - 1, natural_order(add, n))


def builtin_semirings() -> list[Semiring]:
    """Every shipped semiring: BOOL, TROP1..TROP8, LUK2..LUK8."""
    return ([boolean()] + [tropical(k) for k in range(1, 9)]
            + [lukasiewicz(n) for n in range(2, 9)])


_BUILTIN_CACHE: dict[str, Semiring] = {}


def get_builtin(name: str) -> Semiring:
    """Look up ``BOOL``, ``TROPk`` / ``TROP(k)`` or ``LUKn`` / ``LUK(n)``.

    Tropical and Łukasiewicz semirings of any size are constructed on demand.
    """
    key = name.strip().upper().replace("(", "").replace(")", "")
    if key in _BUILTIN_CACHE:
        return _BUILTIN_CACHE[key]
    if key == "BOOL":
        sr = boolean()
    elif key.startswith("TROP") and key[4:].isdigit():
        sr = tropical(int(key[4:]))
    elif key.startswith("LUK") and key[3:].isdigit():
        sr = lukasiewicz(int(key[3:]))
    else:
        raise KeyError(f"unknown semiring {name!r}")
    _BUILTIN_CACHE[key] = sr
    return sr


# -- file format -------------------------------------------------------------

def parse_semiring(text: str) -> Semiring:
    """Parse the line-oriented semiring format::

        semiring NAME
        elements e1 e2 ...
        zero e
        one e
        add x y z      (one line per cell)
        mul x y z
        leq x y        (or: order natural)
    """
    name = None
    elements: list[str] | None = None
    zero = one = None
    add: dict[tuple[str, str], str] = {}
    mul: dict[tuple[str, str], str] = {}
    leq: set[tuple[str, str]] = set()
    natural = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()

        def need(k):
            if len(args) != k:
                raise SemiringStructureError(
                    f"line {lineno}: '{head}' expects {k} argument(s), got {len(args)}")

        if head == "semiring":
            need(1)
            name = args[0]
        elif head == "elements":
            if not args:
                raise SemiringStructureError(f"line {lineno}: empty element list")
            elements = args
        elif head in ("zero", "one"):
            need(1)
            if head == "zero":
                zero = args[0]
            else:
                one = args[0]
        elif head in ("add", "mul"):
            need(3)
            table = add if head == "add" else mul
            key = (args[0], args[1])
            if key in table and table[key] != args[2]:
                raise SemiringStructureError(f"line {lineno}: conflicting {head} cell {key}")
            table[key] = args[2]
        elif head == "leq":
            need(2)
            leq.add((args[0], args[1]))
        elif head == "order":
            need(1)
            if args[0] != "natural":
                raise SemiringStructureError(f"line {lineno}: unknown order '{args[0]}'")
            natural = True
        else:
            raise SemiringStructureError(f"line {lineno}: unknown directive '{head}'")

    if name is None or elements is None or zero is None or one is None:
        raise SemiringStructureError("missing one of: semiring, elements, zero, one")
    pos = {e: i for i, e in enumerate(elements)}

    def idx(tok, what):
        if tok not in pos:
            raise SemiringStructureError(f"{what}: unknown element token {tok!r}")
        return pos[tok]

    n = len(elements)
    tables = {}
    for label, cells in (("add", add), ("mul", mul)):
        t = [[None] * n for _ in range(n)]
        for (x, y), v in cells.items():
            t[idx(x, label)][idx(y, label)] = idx(v, label)
        for i, j in itertools.product(range(n), repeat=2):
            if t[i][j] is None:
                raise SemiringStructureError(
                    f"{label} cell ({elements[i]}, {elements[j]}) unspecified")
        tables[label] = t
    if natural and leq:
        raise SemiringStructureError("give either 'order natural' or leq lines, not both")
    if natural:
        order = natural_order(tables["add"], n)
    else:
        if not leq:
            raise SemiringStructureError("no order given (use leq lines or 'order natural')")
        order = [[False] * n for _ in range(n)]
        for x, y in leq:
            order[idx(x, "leq")][idx(y, "leq")] = True
    return Semiring(name, elements, tables["add"], tables["mul"],
                    idx(zero, "zero"), idx(one, "one"), order)


def format_semiring(spec: Semiring) -> str:
    """Inverse of :func:`parse_semiring` (order written out explicitly)."""
    tok = spec.token
    n = len(spec)
    lines = [f"semiring {spec.name}", "elements " + " ".join(spec.elements),
             f"zero {tok(spec.zero)}", f"one {tok(spec.one)}"]
    for label, t in (("add", spec.add_table), ("mul", spec.mul_table)):
        for i, j in itertools.product(range(n), repeat=2):
            lines.append(f"{label} {tok(i)} {tok(j)} {tok(t[i][j])}")
    for i, j in itertools.product(range(n), repeat=2):
        if spec.leq_table[i][j]:
            lines.append(f"leq {tok(i)} {tok(j)}")
    return "\n".join(lines) + "\n"


def load_semiring(name_or_path: str) -> Semiring:
    """Resolve a built-in name or read a semiring file."""
    try:
        return get_builtin(name_or_path)
    except KeyError:
        pass
    path = Path(name_or_path)
    if not path.exists():
        raise KeyError(f"unknown semiring {name_or_path!r} (not a built-in, no such file)")
    return parse_semiring(path.read_text(encoding="utf-8"))
