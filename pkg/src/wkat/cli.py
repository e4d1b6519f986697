"""Command-line interface.

Exit codes: 0 success, 1 negative verdict, 2 usage or structural error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

from .equiv import (
    DISCLAIMER, GenConfig, MatrixModel, SeriesModel, axiom_suite, bounded_equiv,
    properness_violations, random_expr, random_system,
)
from .normal_form import IntegralityError, Normalizer
from .relational import StructureError, check_cayley, eval_M, parse_ts
from .semiring import (
    InvariantViolation, SemiringStructureError, builtin_semirings, load_semiring, verify_copi,
)
from .series import MAX_BOUND, interp_G
from .syntax import Alphabets, ParseError, ResourceLimitError, parse_expr, scan_identifiers
from .wprog import parse_program, run_program, ski_rental

OK, NEGATIVE, ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _split(text: str | None) -> tuple[str, ...] | None:
    if text is None:
        return None
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _alphabets(args, *texts: str) -> Alphabets:
    """Tests come from ``--tests``; actions from ``--actions`` or, when that
    flag is absent, every other identifier in the expressions."""
    tests = _split(args.tests) or ()
    actions = _split(args.actions)
    if actions is None:
        seen = []
        for t in texts:
            seen += [x for x in scan_identifiers(t) if x not in tests]
        actions = tuple(dict.fromkeys(seen))
    return Alphabets(actions, tests)


def _bound(args) -> int:
    if not 1 <= args.bound <= MAX_BOUND:
        raise UsageError(f"--bound must be between 1 and {MAX_BOUND}")
    return args.bound


def _emit(args, text: str, data) -> None:
    if args.json:
        print(json.dumps(data, indent=2, ensure_ascii=False))
    else:
        print(text)


# -- commands ------------------------------------------------------------------------

def cmd_check_semiring(args) -> int:
    sr = load_semiring(args.target)
    report = verify_copi(sr)
    _emit(args, report.render(), report.to_dict())
    return OK if report.passed else NEGATIVE


def cmd_normalize(args) -> int:
    sr = load_semiring(args.semiring)
    al = _alphabets(args, *args.expr)
    ctx = Normalizer(al, sr)
    out, data = [], []
    for text in args.expr:
        g = ctx.hat(parse_expr(text, al, sr))
        out.append(g.format())
        data.append({"expr": text, "summands": g.format().splitlines()})
    _emit(args, "\n\n".join(out), data)
    return OK


def cmd_interp(args) -> int:
    sr = load_semiring(args.semiring)
    al = _alphabets(args, args.expr)
    r = interp_G(parse_expr(args.expr, al, sr), _bound(args), al, sr)
    items = r.items_formatted()
    text = "\n".join(f"{w}  {s}" for w, s in items) or "(zero series)"
    _emit(args, text, {"bound": r.bound, "semiring": sr.name,
                       "coefficients": [[w, s] for w, s in items]})
    return OK


def cmd_equiv(args) -> int:
    sr = load_semiring(args.semiring)
    al = _alphabets(args, args.e1, args.e2)
    v = bounded_equiv(parse_expr(args.e1, al, sr), parse_expr(args.e2, al, sr), _bound(args),
                      al, sr)
    text = v.render(al)
    if v.agrees:
        text += f"\nnote: {DISCLAIMER}"
    _emit(args, text, v.to_dict(al))
    return OK if v.agrees else NEGATIVE


def _load_ts(args, path):
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    al = None
    if args.actions is not None or args.tests is not None:
        al = Alphabets(_split(args.actions) or (), _split(args.tests) or ())
    return parse_ts(text, al, base_dir=p.parent)


def cmd_eval(args) -> int:
    ts = _load_ts(args, args.ts)
    m = eval_M(ts, parse_expr(args.expr, ts.alphabets, ts.semiring))
    _emit(args, m.format(), m.to_dict())
    return OK


def cmd_run(args) -> int:
    ts = _load_ts(args, args.ts)
    try:
        src = Path(args.prog).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.prog}: {exc.strerror}") from None
    m = run_program(parse_program(src, ts.alphabets, ts.semiring), ts)
    _emit(args, m.format(), m.to_dict())
    return OK


def cmd_cayley_check(args) -> int:
    sr = load_semiring(args.semiring)
    al = _alphabets(args, args.expr)
    rep = check_cayley(parse_expr(args.expr, al, sr), _bound(args), al, sr)
    if rep.agrees:
        text = f"agree: {rep.entries_checked} entries over {rep.states} states (bound {rep.bound})"
    else:
        lines = [f"{len(rep.mismatches)} mismatching entries (bound {rep.bound})"]
        lines += [f"  {q} -> {r}: M(e)={x} cay={y}" for q, r, x, y in rep.mismatches[:10]]
        text = "\n".join(lines)
    _emit(args, text, {"agrees": rep.agrees, "bound": rep.bound, "states": rep.states,
                       "entries_checked": rep.entries_checked,
                       "mismatches": [list(map(str, m)) for m in rep.mismatches]})
    return OK if rep.agrees else NEGATIVE


def cmd_srp(args) -> int:
    if args.days < 1 or args.price < 0:
        raise UsageError("need --days >= 1 and --price >= 0")
    inst = ski_rental(args.days, args.price)
    cost = inst.optimal_cost()
    _emit(args, f"optimal cost: {cost} (semiring {inst.semiring.name})",
          {"days": args.days, "price": args.price, "semiring": inst.semiring.name,
           "optimal_cost": cost})
    return OK


def selftest(seed: int = 0, samples: int = 50, log=print) -> bool:
    """Run the axiom suites and the normal-form, Cayley and truncation
    checks on every built-in semiring with a small sample budget."""
    ok = True

    def line(name, passed, detail=""):
        nonlocal ok
        ok = ok and passed
        log(f"{'PASS' if passed else 'FAIL'}  {name}{'  ' + detail if detail else ''}")

    al = Alphabets(("a", "b"), ("p",))
    for sr in builtin_semirings():
        t0 = time.perf_counter()
        cfg = GenConfig(depth=3, actions=al.actions, tests=al.tests, semiring=sr, seed=seed)
        line(f"copi axioms {sr.name}", verify_copi(sr).passed)
        series = axiom_suite(SeriesModel(al, sr, 3), cfg, samples)
        matrix = axiom_suite(MatrixModel(sr, 4), cfg, samples)
        line(f"series axioms {sr.name}", series.passed)
        line(f"matrix axioms {sr.name}", matrix.passed)
        rng = random.Random(seed)
        ctx = Normalizer(al, sr)
        systems = [random_system(rng, al, sr, rng.randint(1, 4)) for _ in range(3)]
        sound = proper = cay = trunc = True
        for _ in range(samples):
            e = random_expr(rng, cfg)
            g = ctx.hat(e)
            ge = g.to_expr()
            sound &= bounded_equiv(e, ge, 3, al, sr).agrees
            sound &= all(eval_M(ts, e) == eval_M(ts, ge) for ts in systems)
            proper &= not properness_violations(g, 3)
            cay &= check_cayley(e, 2, al, sr).agrees
            trunc &= interp_G(e, 4, al, sr).restrict(3) == interp_G(e, 3, al, sr)
        line(f"hat soundness {sr.name}", sound)
        line(f"hat properness {sr.name}", proper)
        line(f"cayley claim {sr.name}", cay)
        line(f"truncation {sr.name}", trunc, f"{time.perf_counter() - t0:.1f}s")
    # buying on day one costs the price, renting throughout costs the days
    srp_ok = all(ski_rental(n, s).optimal_cost() == str(min(n, s))
                 for n in range(1, 4) for s in range(4))
    line("ski rental", srp_ok)
    return ok


def cmd_selftest(args) -> int:
    lines = []

    def log(s):
        lines.append(s)
        if not args.json:
            print(s, flush=True)

    passed = selftest(args.seed, args.samples, log)
    if args.json:
        print(json.dumps({"passed": passed, "checks": lines}, indent=2, ensure_ascii=False))
    return OK if passed else NEGATIVE


# -- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--actions", help="comma-separated action letters")
    common.add_argument("--tests", help="comma-separated test letters")
    common.add_argument("--semiring", default="BOOL", help="built-in name or file (default BOOL)")
    common.add_argument("--bound", type=int, default=4, help="guarded-string length bound")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    p = argparse.ArgumentParser(prog="wkat", description="Weighted Kleene algebra with tests.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check-semiring", parents=[common], help="verify a semiring")
    c.add_argument("target", help="built-in name or semiring file")
    c.set_defaults(func=cmd_check_semiring)

    c = sub.add_parser("normalize", parents=[common], help="print guarded normal forms")
    c.add_argument("-e", dest="expr", action="append", required=True)
    c.set_defaults(func=cmd_normalize)

    c = sub.add_parser("interp", parents=[common], help="guarded-language coefficients")
    c.add_argument("-e", dest="expr", required=True)
    c.set_defaults(func=cmd_interp)

    c = sub.add_parser("equiv", parents=[common], help="bounded equivalence check")
    c.add_argument("-e1", required=True)
    c.add_argument("-e2", required=True)
    c.set_defaults(func=cmd_equiv)

    c = sub.add_parser("eval", parents=[common], help="evaluate on a transition system")
    c.add_argument("--ts", required=True)
    c.add_argument("-e", dest="expr", required=True)
    c.set_defaults(func=cmd_eval)

    c = sub.add_parser("run", parents=[common], help="run a program on a transition system")
    c.add_argument("--prog", required=True)
    c.add_argument("--ts", required=True)
    c.set_defaults(func=cmd_run)

    c = sub.add_parser("cayley-check", parents=[common], help="compare M(e) with cay(G(e))")
    c.add_argument("-e", dest="expr", required=True)
    c.set_defaults(func=cmd_cayley_check)

    c = sub.add_parser("selftest", parents=[common], help="run the law and lemma suites")
    c.add_argument("--samples", type=int, default=50)
    c.set_defaults(func=cmd_selftest)

    c = sub.add_parser("srp", parents=[common], help="ski rental instance")
    c.add_argument("--days", type=int, required=True)
    c.add_argument("--price", type=int, required=True)
    c.set_defaults(func=cmd_srp)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, StructureError, SemiringStructureError, IntegralityError,
            ResourceLimitError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error ({args.command}): {msg}", file=sys.stderr)
        return ERROR
    except InvariantViolation as exc:
        print(f"internal error ({args.command}): {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
