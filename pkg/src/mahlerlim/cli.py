"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 computation error.  Reals are printed with 12 significant digits.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from .experiments import (CaseResult, ConvergenceError, ExperimentSpec, MatrixFamily, VectorFamily,
                          identity_suite, property_suite, run_convergence)
from .laurent import PolySyntaxError, format_poly, is_zero, parse, polys_from_text, substitute
from .measures import METHODS, MeasureError, MeasureKind, QmcConfig, measure, torus_qmc
from .roots import RootFindingError
from .torushom import MatrixFormatError, boyd_height, parse_matrix

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --- formatting ---------------------------------------------------------------------

def _real(x: float):
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def _clean(obj):
    if isinstance(obj, float):
        return _real(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), separators=(",", ":"))


def _csv_real(x) -> str:
    return "" if x is None else repr(_real(x))


def _emit(text: str, output: str | None):
    if not text.endswith("\n"):
        text += "\n"
    if output is None or output == "-":
        sys.stdout.write(text)
        return
    path = Path(output)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


# --- shared flag handling -------------------------------------------------------------

def _poly_texts(items: list[str]) -> list[str]:
    out = []
    for item in items:
        if item.startswith("@"):
            try:
                lines = Path(item[1:]).read_text().splitlines()
            except OSError as exc:
                raise UsageError(f"cannot read {item[1:]}: {exc.strerror}") from None
            out.extend(ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#"))
        else:
            out.append(item)
    if not out:
        raise UsageError("at least one --poly is required")
    return out


def _kind(name: str, k: int) -> MeasureKind:
    if name == "classic":
        if k != 1:
            raise UsageError(f"classic measure takes one polynomial, got {k}")
        return MeasureKind.classic()
    return MeasureKind.max(k) if name == "max" else MeasureKind.prod(k)


def _qmc_config(args, scale: int = 1) -> QmcConfig:
    try:
        return QmcConfig(samples=args.samples * scale, shifts=args.shifts, seed=args.seed, clip=args.clip)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _add_poly_flags(p):
    p.add_argument("--kind", choices=("classic", "max", "prod"), default="classic")
    p.add_argument("--poly", action="append", default=[], metavar="TEXT|@FILE")


def _add_method_flags(p):
    p.add_argument("--samples", type=int, default=1 << 18)
    p.add_argument("--shifts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clip", type=float, default=1e-300)
    p.add_argument("--tol", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mahlerlim", description="Mahler measures, Boyd heights and Boyd-Lawton limits.")
    parser.add_argument("--config", metavar="PATH", help="key=value file mapping onto flags (flags win)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("measure", help="evaluate a classic, max or prod measure")
    _add_poly_flags(p)
    p.add_argument("--method", choices=METHODS, default=None)
    p.add_argument("--b", type=int, default=None, help="family parameter for boyd-lawton")
    _add_method_flags(p)
    p.add_argument("--output", default=None)

    p = sub.add_parser("height", help="Boyd height of an integer matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--output", default=None)

    p = sub.add_parser("substitute", help="power substitution P^(A)")
    p.add_argument("--poly", required=True)
    p.add_argument("--matrix", required=True)
    p.add_argument("--output", default=None)

    p = sub.add_parser("converge", help="Boyd-Lawton convergence table")
    _add_poly_flags(p)
    p.add_argument("--family", choices=("vector", "matrix"), default="vector")
    p.add_argument("--m", type=int, default=2, help="target torus dimension for the matrix family")
    p.add_argument("--b-start", type=int, default=5)
    p.add_argument("--b-end", type=int, default=40)
    p.add_argument("--b-step", type=int, default=5)
    p.add_argument("--b-list", default=None, help="comma-separated schedule, overrides start/end/step")
    p.add_argument("--reference", default=None, help="real number or 'auto'")
    _add_method_flags(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None)

    p = sub.add_parser("verify", help="identity and property suites")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--fast", action="store_true")
    g.add_argument("--full", action="store_true")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", default=None)
    return parser


def _split_config(argv: list[str]) -> tuple[list[str], str | None]:
    out, path, i = [], None, 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a path")
            path, i = argv[i + 1], i + 2
            continue
        if tok.startswith("--config="):
            path = tok.split("=", 1)[1]
        else:
            out.append(tok)
        i += 1
    return out, path


def _config_flags(path: str, given: list[str]) -> list[str]:
    """Translate ``key=value`` lines into flags not already given on the command line."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    present = {tok.split("=", 1)[0] for tok in given if tok.startswith("--")}
    flags = []
    for no, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        if flag in present:
            continue
        low = value.lower()
        if low in ("true", "yes", "on"):
            flags.append(flag)
        elif low in ("false", "no", "off"):
            continue
        else:
            flags += [flag, value]
    return flags


def _check_threads():
    env = os.environ.get("MAHLER_THREADS")
    if env is None or env == "":
        return
    try:
        ok = int(env) >= 1
    except ValueError:
        ok = False
    if not ok:
        raise UsageError(f"MAHLER_THREADS must be a positive integer, got {env!r}")


# --- commands ---------------------------------------------------------------------

def cmd_measure(args) -> int:
    polys = polys_from_text(_poly_texts(args.poly))
    kind = _kind(args.kind, len(polys))
    cfg = _qmc_config(args)
    params = {"cfg": cfg}
    if args.method == "boyd-lawton":
        if args.b is None:
            raise UsageError("--method boyd-lawton needs --b")
        params.update(b=args.b, tol=args.tol)
    elif args.tol is not None:
        params.update(root_tol=args.tol, panel_tol=args.tol)
    est = measure(kind, polys, args.method, **params)
    _emit(dumps(est.to_dict()), args.output)
    return EXIT_OK


def cmd_height(args) -> int:
    h = boyd_height(parse_matrix(args.matrix))
    out = {"height": "infinite" if h.is_infinite else h.value,
           "witness": None if h.witness is None else list(h.witness)}
    _emit(dumps(out), args.output)
    return EXIT_OK


def cmd_substitute(args) -> int:
    A = parse_matrix(args.matrix)
    p = parse(args.poly)
    if p.nvars > A.rows:
        raise UsageError(f"polynomial has {p.nvars} variables but the matrix has {A.rows} rows")
    p = parse(args.poly, A.rows)
    q = substitute(p, A)
    _emit("0" if is_zero(q) else format_poly(q), args.output)
    return EXIT_OK


def _schedule(args) -> tuple[int, ...]:
    if args.b_list:
        try:
            sched = tuple(int(x) for x in args.b_list.split(","))
        except ValueError:
            raise UsageError(f"malformed --b-list {args.b_list!r}") from None
    else:
        if args.b_start > args.b_end:
            raise UsageError("--b-start is larger than --b-end")
        if args.b_step < 1:
            raise UsageError("--b-step must be positive")
        sched = tuple(range(args.b_start, args.b_end + 1, args.b_step))
    if not sched or min(sched) < 1 or any(x >= y for x, y in zip(sched, sched[1:])):
        raise UsageError("b schedule must be a strictly increasing list of positive integers")
    return sched


def cmd_converge(args) -> int:
    polys = polys_from_text(_poly_texts(args.poly))
    kind = _kind(args.kind, len(polys))
    sched = _schedule(args)
    cfg = _qmc_config(args)
    if args.family == "matrix":
        if args.m < 2:
            raise UsageError("--m must be at least 2 for the matrix family")
        family = MatrixFamily(args.m)
    else:
        family = VectorFamily()
    ref = None
    if args.reference == "auto":
        ref = torus_qmc(kind, polys, _qmc_config(args, 4)).value
    elif args.reference is not None:
        try:
            ref = float(args.reference)
        except ValueError:
            raise UsageError(f"--reference must be a real number or 'auto', got {args.reference!r}") from None
    try:
        spec = ExperimentSpec(kind, polys, family, sched, ref, cfg, args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    records = run_convergence(spec)
    rows = []
    for r in records:
        est = r.estimate
        rows.append({"b": r.b, "mu": str(r.mu), "m_vars": r.m_vars,
                     "value": None if est is None else est.value,
                     "error": None if est is None else est.error_estimate,
                     "reference": r.reference, "deviation": r.deviation,
                     "status": "skipped" if r.skipped else "ok"})
    if args.format == "json":
        _emit(dumps(rows), args.output)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["b", "mu", "m_vars", "value", "error", "reference", "deviation", "status"]
        w.writerow(cols)
        for row in rows:
            w.writerow([row["b"], row["mu"], row["m_vars"], _csv_real(row["value"]), _csv_real(row["error"]),
                        _csv_real(row["reference"]), _csv_real(row["deviation"]), row["status"]])
        _emit(buf.getvalue(), args.output)
    return EXIT_OK


def _fmt(x) -> str:
    return "" if x is None else f"{x:.12g}"


def _table(results: list[CaseResult]) -> str:
    lines = [f"{'case':<28} {'status':<6} {'computed':>16} {'reference':>16} {'tolerance':>9}  note"]
    for r in results:
        lines.append(f"{r.name:<28} {'PASS' if r.passed else 'FAIL':<6} {_fmt(r.computed):>16} "
                     f"{_fmt(r.reference):>16} {_fmt(r.tolerance):>9}  {r.note}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} passed")
    return "\n".join(lines)


def cmd_verify(args) -> int:
    results = identity_suite(full=args.full) + property_suite(full=args.full)
    if args.format == "json":
        _emit(dumps({"mode": "full" if args.full else "fast",
                     "passed": all(r.passed for r in results),
                     "cases": [r.to_dict() for r in results]}), args.output)
    else:
        _emit(_table(results), args.output)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


COMMANDS = {"measure": cmd_measure, "height": cmd_height, "substitute": cmd_substitute,
            "converge": cmd_converge, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv, config = _split_config(argv)
        if config:
            # config flags go after the subcommand, so they reach its parser
            cmd_at = next((i for i, t in enumerate(argv) if t in COMMANDS), None)
            if cmd_at is None:
                raise UsageError("missing command")
            argv = argv[:cmd_at + 1] + _config_flags(config, argv) + argv[cmd_at + 1:]
        args = build_parser().parse_args(argv)
        _check_threads()
        return COMMANDS[args.command](args)
    except (UsageError, PolySyntaxError, MatrixFormatError) as exc:
        print(f"mahlerlim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MeasureError, ConvergenceError, RootFindingError, ArithmeticError) as exc:
        print(f"mahlerlim: error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"mahlerlim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
