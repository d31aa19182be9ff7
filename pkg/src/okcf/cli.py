"""Command-line interface.

Commands: eval, expand, analyze, radius, corpus.  Exit codes: 0 success,
2 parse error, 3 precondition rejection, 4 max-steps exceeded, 5 internal
consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
from dataclasses import dataclass
from decimal import Decimal, getcontext
from fractions import Fraction
from typing import Sequence

from .cf import eval_periodic
from .field import FieldSpec, KElement, SurdElement, sign_of
from .golden import (
    ExpansionConfig,
    ExpansionError,
    ExpansionResult,
    GoldenPreconditionError,
    MaxStepsError,
    PairContext,
    PairState,
    choose_quotient,
    covering_radius,
    expand_pair,
)
from .intervals import PrecisionError
from .parsing import ParseError, parse_element_list, parse_expansion, parse_k
from .quartic import (
    QuadraticPolyK,
    SeedError,
    diagnostics,
    make_state,
    step_state,
    summarize,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_MAX_STEPS = 4
EXIT_INTERNAL = 5


@dataclass
class SessionConfig:
    d: int = 5
    precision_bits: int = 64
    output: str = "text"
    max_steps: int = 10_000
    digits: int = 30
    seed: int = 0

    def __post_init__(self) -> None:
        if self.precision_bits < 16:
            raise ValueError("precision must be at least 16 bits")

    @property
    def spec(self) -> FieldSpec:
        return FieldSpec(self.d)


def decimal_str(value: KElement | SurdElement, digits: int) -> str:
    """Display-only decimal rendering at `digits` significant digits."""
    bits = max(64, int(digits * 3.33) + 16)
    iv = value.embed(bits)
    while iv.width > Fraction(1, 10 ** (digits + 2)) * max(1, abs(iv.lo)):
        bits *= 2
        iv = value.embed(bits)
    mid = iv.mid
    getcontext().prec = digits
    dec = Decimal(mid.numerator) / Decimal(mid.denominator)
    return str(dec)


def _poly_json(poly: tuple[KElement, KElement, KElement] | QuadraticPolyK) -> dict:
    if isinstance(poly, QuadraticPolyK):
        a, b, c = poly.A, poly.B, poly.C
    else:
        a, b, c = poly
    return {"A": str(a), "B": str(b), "C": str(c)}


def cmd_eval(args: argparse.Namespace, cfg: SessionConfig) -> int:
    expansion = parse_expansion(args.expansion, cfg.spec)
    if not expansion.is_periodic:
        raise ParseError("expansion must have a nonempty period")
    res = eval_periodic(expansion)
    payload: dict = {
        "expansion": {
            "preperiod": [str(a) for a in expansion.preperiod],
            "period": [str(a) for a in expansion.period],
        },
        "e_matrix": [
            [str(res.e.e11), str(res.e.e12)],
            [str(res.e.e21), str(res.e.e22)],
        ],
        "poly": _poly_json(res.poly),
        "discriminant": str(res.discriminant),
    }
    if res.value is not None:
        payload["outcome"] = "value"
        payload["value"] = str(res.value)
        payload["decimal"] = decimal_str(res.value, cfg.digits)
    elif res.value_in_k is not None:
        payload["outcome"] = "value_in_k"
        payload["value"] = str(res.value_in_k)
        payload["decimal"] = decimal_str(res.value_in_k, cfg.digits)
    else:
        payload["outcome"] = "does_not_exist"
        payload["reason"] = res.failure.value
        if res.window is not None:
            payload["window"] = res.window
        if res.negative_discriminant:
            payload["negative_discriminant"] = True
    if res.double_root:
        payload["double_root"] = True
    if res.linear_poly:
        payload["linear_poly"] = True

    if cfg.output == "json":
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    print(f"expansion      {expansion}")
    print(f"E(P)           {res.e}")
    print(f"f(P)           ({res.poly[0]})*x^2 + ({res.poly[1]})*x + ({res.poly[2]})")
    print(f"discriminant   {res.discriminant}")
    if res.value is not None:
        print(f"value          {res.value}")
        print(f"decimal        {payload['decimal']}")
    elif res.value_in_k is not None:
        print(f"value (in K)   {res.value_in_k}")
        print(f"decimal        {payload['decimal']}")
    else:
        reason = res.failure.value
        if res.negative_discriminant:
            reason += " (negative discriminant)"
        if res.window is not None:
            reason += f" (window j={res.window})"
        print(f"value          doesn't exist: {reason}")
    return EXIT_OK


def _parse_seed(args: argparse.Namespace, spec: FieldSpec) -> QuadraticPolyK:
    a = parse_k(args.A, spec, require_integral=True)
    b = parse_k(args.B, spec, require_integral=True)
    c = parse_k(args.C, spec, require_integral=True)
    return QuadraticPolyK(a, b, c)


def _branch(flag: str) -> int:
    return 1 if flag == "+" else -1


def _expansion_json(r: ExpansionResult) -> dict:
    return {
        "seed": _poly_json(r.seed),
        "branch": "+" if r.branch > 0 else "-",
        "conj_branch": "+" if r.conj_branch > 0 else "-",
        "preperiod": [str(a) for a in r.expansion.preperiod],
        "period": [str(a) for a in r.expansion.period],
        "steps": r.steps,
        "verified": r.verified,
    }


def cmd_expand(args: argparse.Namespace, cfg: SessionConfig) -> int:
    seed = _parse_seed(args, cfg.spec)
    result = expand_pair(
        seed,
        _branch(args.branch),
        _branch(args.conj_branch),
        ExpansionConfig(max_steps=cfg.max_steps, precision_bits=cfg.precision_bits),
    )
    if cfg.output == "json":
        print(json.dumps(_expansion_json(result), indent=2))
        return EXIT_OK
    pre = ", ".join(str(a) for a in result.expansion.preperiod)
    per = ", ".join(str(a) for a in result.expansion.period)
    print(f"seed           {seed}")
    print(f"preperiod      [{pre}]")
    print(f"period         [{per}]")
    print(f"steps          {result.steps}")
    print(f"cycle start    {result.cycle_start}")
    print(f"verified       {result.verified}")
    return EXIT_OK


_CSV_COLUMNS = [
    "n", "A_n", "B_n", "C_n", "P_n", "Q_n",
    "s_n_lo", "s_n_hi", "f1_lo", "f1_hi", "f2_lo", "f2_hi",
    "weil_lo", "weil_hi", "naive",
]


def _analyze_quotients(args: argparse.Namespace, cfg: SessionConfig):
    spec = cfg.spec
    n = args.steps
    if args.expansion:
        expansion = parse_expansion(args.expansion, spec)
        if not expansion.is_periodic:
            raise ParseError("expansion must have a nonempty period")
        res = eval_periodic(expansion)
        if res.value is None:
            raise SeedError(
                "expansion has no quartic value; nothing to analyze "
                f"({'in K' if res.value_in_k is not None else res.failure.value})"
            )
        seed = QuadraticPolyK(*res.poly)
        # value.y = branch/(2A), so branch = 2A*y exactly.
        t = 2 * res.poly[0] * res.value.y
        branch = 1 if t == 1 else -1
        quotients = expansion.prefix(n)
        return seed, branch, quotients
    seed = _parse_seed(args, spec)
    branch = _branch(args.branch)
    if args.quotients:
        quotients = parse_element_list(args.quotients, spec, require_integral=True)
        if len(quotients) < n + 1:
            raise ParseError(
                f"need {n + 1} quotients for {n} steps, got {len(quotients)}"
            )
        return seed, branch, quotients[: n + 1]
    # Drive the pair expansion for n+1 quotients (no cycle needed).
    ctx = PairContext.create(seed)
    s = make_state(seed, branch)
    sp = make_state(seed.sigma(), _branch(args.conj_branch))
    quotients = []
    for i in range(n + 1):
        a, _ = choose_quotient(PairState(s, sp, i), ctx)
        quotients.append(a)
        s = step_state(s, a)
        sp = step_state(sp, a.conj())
    return seed, branch, quotients


def cmd_analyze(args: argparse.Namespace, cfg: SessionConfig) -> int:
    seed, branch, quotients = _analyze_quotients(args, cfg)
    rows = diagnostics(seed, branch, quotients, cfg.precision_bits)
    summary = summarize(rows, seed, branch, quotients, cfg.precision_bits)
    if cfg.output == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(_CSV_COLUMNS)
        for r in rows:
            writer.writerow(
                [
                    r.index, str(r.triple[0]), str(r.triple[1]), str(r.triple[2]),
                    str(r.p), str(r.q),
                    float(r.s_n.lo), float(r.s_n.hi),
                    float(r.f1.lo), float(r.f1.hi),
                    float(r.f2.lo), float(r.f2.hi),
                    float(r.weil.lo), float(r.weil.hi),
                    r.naive,
                ]
            )
        return EXIT_OK
    if cfg.output == "json":
        payload = {
            "seed": _poly_json(seed),
            "rows": [
                {
                    "n": r.index,
                    "A_n": str(r.triple[0]),
                    "B_n": str(r.triple[1]),
                    "C_n": str(r.triple[2]),
                    "P_n": str(r.p),
                    "Q_n": str(r.q),
                    "s_n": [float(r.s_n.lo), float(r.s_n.hi)],
                    "f1": [float(r.f1.lo), float(r.f1.hi)],
                    "f2": [float(r.f2.lo), float(r.f2.hi)],
                    "weil": [float(r.weil.lo), float(r.weil.hi)],
                    "naive": r.naive,
                }
                for r in rows
            ],
            "summary": {
                "steps": summary.steps,
                "max_abs_A": summary.max_abs_a,
                "max_abs_sigma_A": summary.max_abs_sigma_a,
                "sup_Q_S": summary.sup_qs,
                "sup_Q_S_sigma": summary.sup_qs_sigma,
                "weil_min": summary.weil_min,
                "weil_max": summary.weil_max,
                "naive_max": summary.naive_max,
            },
        }
        print(json.dumps(payload, indent=2))
        return EXIT_OK
    print(f"seed     {seed}   branch {'+' if branch > 0 else '-'}")
    print(f"{'n':>4}  {'A_n':>14}  {'s_n':>12}  {'f1':>12}  {'f2':>12}  {'H':>10}  {'naive':>7}")
    for r in rows:
        print(
            f"{r.index:>4}  {str(r.triple[0]):>14}  {float(r.s_n):>12.5g}  "
            f"{float(r.f1):>12.5g}  {float(r.f2):>12.5g}  {float(r.weil):>10.5g}  {r.naive:>7}"
        )
    sigma_side = (
        f"{summary.sup_qs_sigma:.6g}" if summary.sup_qs_sigma is not None else "n/a"
    )
    print(
        f"summary: max|A_n|={summary.max_abs_a:.6g} max|sigma(A_n)|={summary.max_abs_sigma_a:.6g} "
        f"sup|Q_n S_n|={summary.sup_qs:.6g} sigma-side={sigma_side}"
    )
    print(
        f"         H in [{summary.weil_min:.6g}, {summary.weil_max:.6g}] "
        f"naive max={summary.naive_max}"
    )
    return EXIT_OK


def cmd_radius(args: argparse.Namespace, cfg: SessionConfig) -> int:
    cr = covering_radius(args.D, cfg.precision_bits)
    if cfg.output == "json":
        print(
            json.dumps(
                {
                    "D": cr.d,
                    "r_squared": str(cr.r_squared),
                    "r": [float(cr.interval.lo), float(cr.interval.hi)],
                    "usable": cr.usable,
                }
            )
        )
        return EXIT_OK
    print(f"D={cr.d}: r^2 = {cr.r_squared}, r ~ {float(cr.interval):.6f}, "
          f"{'usable (r < 1)' if cr.usable else 'not usable (r >= 1)'}")
    return EXIT_OK


def _random_k(rng: random.Random, spec: FieldSpec, bound: int) -> KElement:
    return spec.element(rng.randint(-bound, bound), rng.randint(-bound, bound))


def _sample_seed(rng: random.Random, spec: FieldSpec, bound: int, counters: dict) -> QuadraticPolyK | None:
    from .field import is_square_in_k

    a = _random_k(rng, spec, bound)
    if a.is_zero:
        counters["zero_lead"] += 1
        return None
    b = _random_k(rng, spec, bound)
    c = _random_k(rng, spec, bound)
    seed = QuadraticPolyK(a, b, c)
    delta = seed.delta
    if sign_of(delta) <= 0:
        counters["delta_nonpositive"] += 1
        return None
    if is_square_in_k(delta) is not None:
        counters["delta_square"] += 1
        return None
    sdelta = delta.conj()
    if sign_of(sdelta) <= 0:
        if sign_of(sdelta + 4) < 0:
            counters["provably_nonperiodic"] += 1
        else:
            counters["sigma_delta_nonpositive"] += 1
        return None
    if is_square_in_k(sdelta) is not None:
        counters["sigma_delta_square"] += 1
        return None
    return seed


def run_corpus(count: int, bound: int, cfg: SessionConfig) -> dict:
    if cfg.d != 5:
        raise GoldenPreconditionError("corpus expansion requires D = 5")
    spec = cfg.spec
    rng = random.Random(cfg.seed)
    counters: dict = {
        "zero_lead": 0,
        "delta_nonpositive": 0,
        "delta_square": 0,
        "sigma_delta_nonpositive": 0,
        "sigma_delta_square": 0,
        "provably_nonperiodic": 0,
    }
    seeds: list[QuadraticPolyK] = []
    while len(seeds) < count:
        seed = _sample_seed(rng, spec, bound, counters)
        if seed is not None:
            seeds.append(seed)
    runs = []
    econfig = ExpansionConfig(max_steps=cfg.max_steps, precision_bits=cfg.precision_bits)
    for i, seed in enumerate(seeds):
        for conj in (1, -1):
            entry: dict = {
                "seed_index": i,
                "seed": _poly_json(seed),
                "conj_branch": "+" if conj > 0 else "-",
            }
            try:
                r = expand_pair(seed, 1, conj, econfig)
                entry.update(
                    cycle=True,
                    preperiod=len(r.expansion.preperiod),
                    period=len(r.expansion.period),
                    steps=r.steps,
                    verified=r.verified,
                )
            except MaxStepsError:
                entry.update(cycle=False, verified=False)
            runs.append(entry)
    cycles = [r for r in runs if r["cycle"]]
    summary = {
        "count": count,
        "bound": bound,
        "random_seed": cfg.seed,
        "runs": len(runs),
        "cycles_detected": len(cycles),
        "cycle_fraction": len(cycles) / len(runs),
        "verified_fraction": (
            sum(1 for r in cycles if r["verified"]) / len(cycles) if cycles else None
        ),
        "preperiod_lengths": sorted(r["preperiod"] for r in cycles),
        "period_lengths": sorted(r["period"] for r in cycles),
        "rejections": counters,
    }
    return {"summary": summary, "runs": runs}


def cmd_corpus(args: argparse.Namespace, cfg: SessionConfig) -> int:
    report = run_corpus(args.count, args.bound, cfg)
    if cfg.output == "json":
        print(json.dumps(report, indent=2))
        return EXIT_OK
    s = report["summary"]
    print(
        f"corpus: {s['count']} seeds (bound {s['bound']}, rng seed {s['random_seed']}), "
        f"{s['runs']} expansions"
    )
    print(
        f"cycles detected: {s['cycles_detected']}/{s['runs']} "
        f"(verified: {s['verified_fraction']})"
    )
    print(f"preperiod lengths: {s['preperiod_lengths']}")
    print(f"period lengths:    {s['period_lengths']}")
    print(f"rejection counters: {s['rejections']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field-d", type=int, default=5, help="squarefree D of Q(sqrt(D))")
    common.add_argument("--precision", type=int, default=64, help="interval precision in bits")
    common.add_argument("--output", choices=("text", "json", "csv"), default="text")
    common.add_argument("--max-steps", type=int, default=10_000)
    common.add_argument("--digits", type=int, default=30, help="decimal digits for display")
    common.add_argument("--seed", type=int, default=0, help="corpus randomness seed")

    parser = argparse.ArgumentParser(
        prog="okcf",
        description="Continued fractions with partial quotients in O_K, K = Q(sqrt(D))",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", parents=[common], help="evaluate a periodic expansion")
    p_eval.add_argument("expansion", help='e.g. "[1; 2]" or "[; 2, 4-2*w]"')

    p_expand = sub.add_parser("expand", parents=[common], help="expand a quartic root over Q(sqrt(5))")
    p_expand.add_argument("A")
    p_expand.add_argument("B")
    p_expand.add_argument("C")
    p_expand.add_argument("--branch", choices=("+", "-"), default="+")
    p_expand.add_argument("--conj-branch", choices=("+", "-"), default="+")

    p_an = sub.add_parser("analyze", parents=[common], help="trajectory diagnostics table")
    p_an.add_argument("A", nargs="?")
    p_an.add_argument("B", nargs="?")
    p_an.add_argument("C", nargs="?")
    p_an.add_argument("--expansion", help="analyze along an explicit periodic expansion")
    p_an.add_argument("--quotients", help="comma-separated explicit partial quotients")
    p_an.add_argument("--branch", choices=("+", "-"), default="+")
    p_an.add_argument("--conj-branch", choices=("+", "-"), default="+")
    p_an.add_argument("-n", "--steps", type=int, default=20)

    p_rad = sub.add_parser("radius", parents=[common], help="covering radius of v(O_K)")
    p_rad.add_argument("D", type=int)

    p_cor = sub.add_parser("corpus", parents=[common], help="random-seed expansion corpus")
    p_cor.add_argument("--count", type=int, default=10)
    p_cor.add_argument("--bound", type=int, default=3)

    return parser


_VALUE_FLAGS = {
    "--field-d", "--precision", "--output", "--max-steps", "--digits", "--seed",
    "--branch", "--conj-branch", "--expansion", "--quotients", "-n", "--steps",
    "--count", "--bound",
}


def _prepare_argv(argv: Sequence[str]) -> list[str]:
    """Reorder one subcommand's argv as [cmd, flags..., '--', positionals...]
    so that element arguments with a leading '-' parse as positionals."""
    argv = list(argv)
    if not argv or argv[0].startswith("-"):
        return argv
    cmd, rest = argv[0], argv[1:]
    flags: list[str] = []
    positionals: list[str] = []
    i = 0
    while i < len(rest):
        tok = rest[i]
        if tok == "--":
            positionals.extend(rest[i + 1 :])
            break
        if tok in ("-h", "--help"):
            flags.append(tok)
            i += 1
        elif tok.startswith("--") and "=" in tok:
            flags.append(tok)
            i += 1
        elif tok in _VALUE_FLAGS:
            flags.extend(rest[i : i + 2])
            i += 2
        else:
            positionals.append(tok)
            i += 1
    if not positionals:
        return [cmd, *flags]
    return [cmd, *flags, "--", *positionals]


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_prepare_argv(argv))
    try:
        cfg = SessionConfig(
            d=args.field_d,
            precision_bits=args.precision,
            output=args.output,
            max_steps=args.max_steps,
            digits=args.digits,
            seed=args.seed,
        )
        if args.command == "eval":
            return cmd_eval(args, cfg)
        if args.command == "expand":
            if not (args.A and args.B and args.C):
                raise ParseError("expand requires A B C coefficient arguments")
            return cmd_expand(args, cfg)
        if args.command == "analyze":
            if not args.expansion and not (args.A and args.B and args.C):
                raise ParseError("analyze requires either --expansion or A B C")
            return cmd_analyze(args, cfg)
        if args.command == "radius":
            return cmd_radius(args, cfg)
        if args.command == "corpus":
            return cmd_corpus(args, cfg)
        parser.error(f"unknown command {args.command}")
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SeedError, GoldenPreconditionError, ValueError) as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except MaxStepsError as exc:
        print(f"max steps exceeded: {exc}", file=sys.stderr)
        return EXIT_MAX_STEPS
    except (ExpansionError, PrecisionError, AssertionError) as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
