"""Command-line entry point.

    mixedratios average --theorem ratios --A 0.9 --N 4
    mixedratios mc --theorem log-ders --E 0.4 --F 0.4 --N 8 --samples 1000000 --seed 7
    mixedratios table --theorem log-ders --E 0.4 --F 0.4 --N 4 6 8 10 --output csv
    mixedratios explicit-formula --h "z + 0.3" --f "z1 * z2" --n 2 --r 0.5 --N 6 --samples 100000
    mixedratios verify --suite mn --max-size 6

Exit codes: 0 success, 1 a verification suite failed, 2 invalid input,
3 numerical guard failure.  ``UM_SEED`` overrides the default seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import Callable, Optional, Sequence

import numpy as np

from . import haar, moments, verify
from .errors import NumericalGuardError, ValidationError
from .moments import MomentQuery, TruncationPolicy

DEFAULT_SAMPLES = 100_000
TABLE_HEADER = ["N", "theorem", "main_re", "main_im", "mc_re", "mc_im", "stderr", "abs_err", "tail_bound", "seed"]

# theorem -> (allowed sets, evaluator, completed-integrand flag)
THEOREMS: dict[str, tuple[str, Callable[[MomentQuery], moments.MainTerm], bool]] = {
    "ratios": ("ABCD", lambda q: moments.MainTerm(moments.ratio_average(q.A, q.B, q.C, q.D, q.N), 0.0,
                                                   {"exact": True}), False),
    "mixed-e": ("ABCDE", lambda q: moments.mixed_ratio_E_main(q.A, q.B, q.C, q.D, q.E, q.N, q.cutoff), False),
    "mixed-ef": ("BCEF", lambda q: moments.mixed_ratio_EF_main(q.B, q.C, q.E, q.F, q.N, q.cutoff), False),
    "log-ders": ("EF", lambda q: moments.log_der_main(q.E, q.F, q.N, q.cutoff), False),
    "completed-log-ders": ("EF", lambda q: moments.completed_log_der_main(q.E, q.F, q.N, q.cutoff), True),
    "recipe": ("ABCDEF", moments.recipe_main, False),
}

def parse_complex(text: str) -> complex:
    """Parse ``0.9``, ``0.3+0.2i``, ``-0.1-0.5j`` or ``0.4i``."""
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise ValidationError(f"cannot parse complex number {text!r}") from None


def default_seed() -> int:
    env = os.environ.get("UM_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"UM_SEED must be an integer, got {env!r}") from None


def _safe_callable(expr: str, names: Sequence[str]) -> Callable:
    """Compile an arithmetic expression in ``names`` over numpy (no builtins)."""
    env = {"__builtins__": {}, "np": np, "exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos,
           "sqrt": np.sqrt, "pi": np.pi, "conj": np.conj, "abs": np.abs}
    try:
        code = compile(expr, "<expr>", "eval")
    except SyntaxError as exc:
        raise ValidationError(f"bad expression {expr!r}: {exc.msg}") from None
    for name in code.co_names:
        if name not in env and name not in names:
            raise ValidationError(f"unknown name {name!r} in expression {expr!r}")

    def func(*args):
        return eval(code, env, dict(zip(names, args)))

    return func


# ----------------------------------------------------------------- records


def _dump(record) -> str:
    def clean(obj):
        if isinstance(obj, float) and not math.isfinite(obj):
            return None
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [clean(v) for v in obj]
        return obj

    return json.dumps(clean(record), sort_keys=False)


def emit_table(rows: Sequence[dict], fmt: str = "csv") -> str:
    """Render result rows as CSV (fixed header) or a JSON array; rows are sorted by ``N``."""
    ordered = sorted(rows, key=lambda r: r["N"])
    if fmt == "json":
        return _dump([{k: r.get(k) for k in TABLE_HEADER} for r in ordered]) + "\n"
    if fmt != "csv":
        raise ValidationError(f"unknown table format {fmt!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_HEADER)
    for r in ordered:
        writer.writerow([r.get(k) for k in TABLE_HEADER])
    return buf.getvalue()


def _row(theorem: str, main: moments.MainTerm, est: haar.MonteCarloEstimate, N: int) -> dict:
    return {"N": N, "theorem": theorem, "main_re": main.value.real, "main_im": main.value.imag,
            "mc_re": est.mean.real, "mc_im": est.mean.imag, "stderr": est.stderr,
            "abs_err": abs(est.mean - main.value), "tail_bound": main.tail_bound, "seed": est.seed}


# ----------------------------------------------------------------- parsing


def _add_query_flags(p: argparse.ArgumentParser, with_n: bool = True) -> None:
    p.add_argument("--theorem", choices=sorted(THEOREMS), help="main-term formula (default: inferred from the sets)")
    for name in "ABCDEF":
        p.add_argument(f"--{name}", action="append", default=[], metavar="Z", help=f"element of set {name} (repeatable)")
    if with_n:
        p.add_argument("--N", type=int, help="matrix dimension")
    p.add_argument("--max-weight", type=int, default=moments.DEFAULT_MAX_WEIGHT)
    p.add_argument("--tail-ratio", type=float)
    p.add_argument("--config", help="JSON file with query fields (flags override it)")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)


def _add_output_flags(p: argparse.ArgumentParser, default: str = "json") -> None:
    p.add_argument("--output", choices=["json", "csv"], default=default)
    p.add_argument("--out", help="write to this path instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixedratios", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("average", help="evaluate a main term")
    _add_query_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("mc", help="Monte-Carlo average with the matching main term")
    _add_query_flags(p)
    _add_run_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("table", help="sweep N and tabulate main term against Monte-Carlo")
    _add_query_flags(p, with_n=False)
    p.add_argument("--N", type=int, nargs="+", required=True, help="one or more matrix dimensions")
    _add_run_flags(p)
    _add_output_flags(p, default="csv")

    p = sub.add_parser("explicit-formula", help="contour side of the explicit formula vs the eigenvalue sum")
    p.add_argument("--h", default="1", help="expression in z (numpy semantics)")
    p.add_argument("--f", default="1", help="expression in z1..zn")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--quad-points", type=int, default=moments.DEFAULT_QUAD_POINTS)
    p.add_argument("--lambda-cutoff", type=int, default=moments.DEFAULT_MAX_WEIGHT)
    _add_run_flags(p)
    p.add_argument("--no-mc", action="store_true", help="skip the Monte-Carlo side")
    _add_output_flags(p)

    p = sub.add_parser("verify", help="run an identity suite")
    p.add_argument("--suite", choices=sorted(verify.SUITES) + ["all"], default="all")
    p.add_argument("--max-size", type=int, default=6)
    p.add_argument("--seed", type=int)
    _add_output_flags(p)
    return parser


def _query_from_args(args, N: Optional[int] = None) -> tuple[str, MomentQuery]:
    data: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
    theorem = args.theorem or data.pop("theorem", None)
    data.pop("theorem", None)
    for name in "ABCDEF":
        vals = getattr(args, name)
        if vals:
            data[name] = [[z.real, z.imag] for z in map(parse_complex, vals)]
    n_val = N if N is not None else getattr(args, "N", None)
    if n_val is not None:
        data["N"] = n_val
    if "N" not in data:
        raise ValidationError("--N is required")
    data["cutoff"] = {"maxWeight": args.max_weight, "tailRatio": args.tail_ratio}
    query = MomentQuery.from_json(data)
    given = {name for name in "ABCDEF" if getattr(query, name)}
    if theorem is None:
        theorem = next(t for t in ["ratios", "log-ders", "mixed-e", "mixed-ef", "recipe"] if given <= set(THEOREMS[t][0]))
    allowed = set(THEOREMS[theorem][0])
    if not given <= allowed:
        raise ValidationError(f"theorem {theorem!r} does not take sets {sorted(given - allowed)}")
    return theorem, query


def _write(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _format_record(record: dict, fmt: str) -> str:
    if fmt == "csv":
        return emit_table([record], "csv") if "main_re" in record else emit_table([], "csv")
    return _dump(record) + "\n"


def _cmd_average(args) -> int:
    theorem, query = _query_from_args(args)
    main = THEOREMS[theorem][1](query)
    record = {"command": "average", "theorem": theorem, "query": query.to_json(), **main.to_json(),
              "seed": default_seed(), "samples": 0}
    if args.output == "csv":
        raise ValidationError("average emits JSON only; use table for CSV")
    _write(_format_record(record, "json"), args.out)
    return 0


def _mc_pair(theorem: str, query: MomentQuery, args, seed: int):
    main = THEOREMS[theorem][1](query)
    est = haar.mc_average(query, args.samples, seed, args.workers, completed=THEOREMS[theorem][2])
    return main, est


def _cmd_mc(args) -> int:
    theorem, query = _query_from_args(args)
    seed = args.seed if args.seed is not None else default_seed()
    main, est = _mc_pair(theorem, query, args, seed)
    if args.output == "csv":
        _write(emit_table([_row(theorem, main, est, query.N)], "csv"), args.out)
        return 0
    record = {"command": "mc", "theorem": theorem, "query": query.to_json(), "main": main.to_json(),
              "estimate": est.to_json(), "abs_err": abs(est.mean - main.value), "workers": args.workers,
              "truncation": main.truncation, "seed": seed, "samples": est.samples}
    _write(_dump(record) + "\n", args.out)
    return 0


def _cmd_table(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    rows = []
    for N in sorted(set(args.N)):
        theorem, query = _query_from_args(args, N=N)
        main, est = _mc_pair(theorem, query, args, seed)
        rows.append(_row(theorem, main, est, N))
    _write(emit_table(rows, args.output), args.out)
    return 0


def _cmd_explicit(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    h = _safe_callable(args.h, ["z"])
    fnames = [f"z{j}" for j in range(1, args.n + 1)]
    f = _safe_callable(args.f, fnames)
    q = moments.ExplicitFormulaQuery(h, f, args.n, args.r, args.N, args.quad_points, args.lambda_cutoff)
    rhs = moments.explicit_formula_rhs(q)
    record = {"command": "explicit-formula", "h": args.h, "f": args.f, "n": args.n, "r": args.r, "N": args.N,
              **rhs.to_json(), "seed": seed, "samples": 0}
    if not args.no_mc:
        est = haar.mc_eigen_sum(q, args.samples, seed, args.workers)
        record.update(estimate=est.to_json(), abs_err=abs(est.mean - rhs.value), samples=est.samples)
    if args.output == "csv":
        raise ValidationError("explicit-formula emits JSON only")
    _write(_dump(record) + "\n", args.out)
    return 0


def _cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else default_seed()
    names = sorted(verify.SUITES) if args.suite == "all" else [args.suite]
    checks = []
    for name in names:
        fn = verify.SUITES[name]
        kwargs = {"seed": seed}
        if name in ("mn", "ls"):
            kwargs["max_size"] = args.max_size
        checks += [dict(suite=name, **c.to_json()) for c in fn(**kwargs)]
    ok = all(c["ok"] for c in checks)
    if args.output == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["suite", "name", "instances", "maxRelErr", "tol", "ok"], lineterminator="\n")
        writer.writeheader()
        writer.writerows(checks)
        _write(buf.getvalue(), args.out)
    else:
        _write(_dump({"command": "verify", "suite": args.suite, "ok": ok, "checks": checks, "seed": seed,
                      "truncation": {"maxSize": args.max_size}, "samples": 0}) + "\n", args.out)
    return 0 if ok else 1


COMMANDS = {"average": _cmd_average, "mc": _cmd_mc, "table": _cmd_table, "explicit-formula": _cmd_explicit,
            "verify": _cmd_verify}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2 already
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalGuardError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
