"""Command-line entry point.

    weylheat eval --system i2 --params 4 --eta det --x 2,1 --y 3,1 --t 0.5
    weylheat scan --check i4-sgn --grid n=20000 --seed 1
    weylheat verify --suite core
    weylheat pde [--system i2 --eta triv --t 0.5]
    weylheat conjecture --m 5 --grid n=4000,rho=1e-2:1e2

Exit status: 0 when every record passes (or is only measured), 1 when a
check fails, 2 for usage errors.  A config file of ``key = value`` lines
supplies defaults for long options; explicit flags win.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import time

from . import estimate_lab as el
from . import suites
from .errors import CheckFailure, WeylHeatError
from .reports import FORMATS, Record, Report, _plain, emit_report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ------------------------------------------------------------ parsing helpers

def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def parse_grid(text: str | None) -> dict:
    """``n=20000,rho=1e-3:1e3,extents=10:100,points=201`` -> dict."""
    out: dict = {}
    if not text:
        return out
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise UsageError(f"grid entries look like key=value, got {item!r}")
        k, v = (p.strip() for p in item.split("=", 1))
        try:
            if k in ("n", "points", "samples"):
                out["n" if k == "samples" else k] = int(float(v))
            elif k in ("rho", "extents"):
                out[k] = [float(p) for p in v.split(":")]
            else:
                raise UsageError(f"unknown grid key {k!r}")
        except ValueError:
            raise UsageError(f"bad grid value {item!r}") from None
    if "rho" in out and (len(out["rho"]) != 2 or not 0 < out["rho"][0] < out["rho"][1]):
        raise UsageError("rho needs lo:hi with 0 < lo < hi")
    return out


def read_config(path: str) -> dict:
    cfg = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        k, v = (p.strip() for p in line.split("=", 1))
        cfg[k.replace("-", "_")] = v
    return cfg


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file with option defaults")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=FORMATS + ("text",), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--timings", action="store_true",
                        help="record wall-clock runtimes (output is then not byte-stable)")
    common.add_argument("--figures", metavar="DIR", help="also write PNG figures (needs matplotlib)")

    p = argparse.ArgumentParser(prog="weylheat", description="Reflection-group heat kernel checks.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="evaluate one kernel, its bound and ratio")
    e.add_argument("--system", choices=("orth", "i2"), required=True)
    e.add_argument("--params", required=True, help="m for i2; d,k for orth")
    e.add_argument("--eta", required=True)
    e.add_argument("--x", required=True)
    e.add_argument("--y", required=True)
    e.add_argument("--t", type=float, required=True)

    s = sub.add_parser("scan", parents=[common], help="run one named scan or inequality")
    s.add_argument("--check", required=True)
    s.add_argument("--grid", default="")

    v = sub.add_parser("verify", parents=[common], help="run an acceptance suite")
    v.add_argument("--suite", choices=tuple(suites.SUITES), required=True)
    v.add_argument("--grid", default="")

    d = sub.add_parser("pde", parents=[common], help="finite-difference oracle comparison")
    d.add_argument("--system", choices=("orth", "i2"))
    d.add_argument("--eta")
    d.add_argument("--t", type=float, default=0.5)
    d.add_argument("--h", type=float, default=0.03)
    d.add_argument("--y", default=None, help="source point (default 1.5,0.75; 1 on the half-line)")
    d.add_argument("--params", default="4", help="m for i2")

    c = sub.add_parser("conjecture", parents=[common], help="factor-product scan for general m")
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--grid", default="")
    return p


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise UsageError(f"unknown command {command!r}")


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in COMMANDS), None)
    if known.config and command in COMMANDS:
        cfg = read_config(known.config)
        sub_parser = _subparser(parser, command)
        actions = {a.dest: a for a in sub_parser._actions}
        unknown = set(cfg) - set(actions) - {"config"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        converted = {}
        for dest, raw in cfg.items():
            action = actions.get(dest)
            if action is None:
                continue
            if isinstance(action, argparse._StoreTrueAction):
                value = raw.lower() in ("1", "true", "yes", "on")
            else:
                try:
                    value = action.type(raw) if action.type is not None else raw
                except ValueError:
                    raise UsageError(f"config {dest}: bad value {raw!r}") from None
            if action.choices is not None and value not in action.choices:
                raise UsageError(f"config {dest}={value!r} not in {list(action.choices)}")
            converted[dest] = value
            action.required = False
        sub_parser.set_defaults(**converted)
    return parser.parse_args(argv)


# ------------------------------------------------------------ commands

def _eval(args) -> Report:
    from .dihedral_kernels import bound_dihedral, canonical_label, kernel_I3, kernel_I4
    from .gauss_kernels import EvalPoint, cancellation_diagnostic, make_spec
    from .orthogonal_kernels import OrthogonalSpec, bound_orthogonal, kernel_orthogonal
    from .reflection_core import build_system

    params = [int(float(v)) for v in _floats(args.params)]
    point = EvalPoint(_floats(args.x), _floats(args.y), args.t)
    if args.system == "i2":
        if len(params) != 1:
            raise UsageError("--params takes m for i2")
        m = params[0]
        if m not in (3, 4):
            raise UsageError("closed forms exist for m = 3 and 4; use `conjecture` for other m")
        kernel = kernel_I4(args.eta, point) if m == 4 else kernel_I3(args.eta, point)
        bound = bound_dihedral(m, args.eta, point)
        system = build_system("dihedral", m=m)
        label = canonical_label(m, args.eta)
        anchor = {("sgn", 4): "sgn", ("sgn", 3): "sgn1", ("N1", 4): "N1", ("N2", 4): "XY"}.get((label, m), "Neu")
    else:
        if len(params) != 2:
            raise UsageError("--params takes d,k for orth")
        spec = OrthogonalSpec.parse(params[0], params[1], args.eta)
        kernel = kernel_orthogonal(spec, point)
        bound = bound_orthogonal(spec, point)
        system = build_system("orthogonal", d=params[0], k=params[1])
        label = "".join(map(str, spec.eta))
        anchor = "orto"
    kspec = make_spec(system, label)
    diag = cancellation_diagnostic(kspec, point)
    rep = Report("eval", _config(args))
    rep.add(Record("eval", anchor, "measured",
                   {"kernel": kernel, "bound": bound, "ratio": kernel / bound if bound > 0 else math.nan,
                    "digits_lost": diag.digits_lost, "largest_term": diag.largest_term,
                    "x": list(point.x), "y": list(point.y), "t": point.t}))
    return rep


def _scan(args) -> Report:
    grid = parse_grid(args.grid)
    rep = Report("scan", _config(args))
    name = args.check
    keep = args.format == "csv" or bool(args.figures)
    if name == "ort4-inconsistency":
        kw = {}
        if "extents" in grid:
            kw["extents"] = tuple(grid["extents"])
        if "points" in grid:
            kw["points"] = grid["points"]
        rec = rep.add(suites.ort4_record(**kw))
        if args.figures:
            from .plotting import ort4_figure
            ort4_figure(rec.values, args.figures)
        return rep
    if name in el.INEQUALITIES:
        res = el.inequality_suite([name], n=grid.get("n", 10000), seed=args.seed)[0]
        rep.add(Record.check(f"inequality-{res.name}", res.anchor, res.passed,
                             {"n_checked": res.n_checked, **res.measured}, res.witnesses))
        return rep
    if name in el.SLOPE_CASES:
        r = el.slope_suite([name])[0]
        rep.add(Record.check(r.name, r.anchor, r.passed,
                             {"slope": r.slope, "expected": r.expected, "tolerance": r.tolerance}))
        return rep
    if name == "list":
        rep.add(Record("check-list", "plumbing", "measured", {"checks": _check_names()}))
        return rep
    if name not in el.SCAN_CASES:
        raise UsageError(f"unknown check {name!r}; `weylheat scan --check list` shows the names")
    scan = el.run_scan(name, grid.get("n"), args.seed, keep_samples=keep)
    rec = rep.add(suites.scan_record(scan))
    if keep:
        rec.samples = scan
    if args.figures and scan.samples is not None:
        from .plotting import scan_figure
        scan_figure(scan, args.figures)
    return rep


def _check_names() -> list[str]:
    return list(el.SCAN_CASES) + list(el.INEQUALITIES) + list(el.SLOPE_CASES) + ["ort4-inconsistency"]


def _verify(args) -> Report:
    grid = parse_grid(args.grid)
    rep = Report("verify", _config(args))
    rep.records.extend(suites.SUITES[args.suite](grid.get("n"), args.seed))
    return rep


def _pde(args) -> Report:
    rep = Report("pde", _config(args))
    if args.system is None:
        if args.eta is not None:
            raise UsageError("--eta needs --system")
        y = _floats(args.y) if args.y else (1.5, 0.75)
        rep.records.extend(suites.pde_records(None, t=args.t, h=args.h, y=y))
        return rep
    if args.system == "i2":
        y = _floats(args.y) if args.y else (1.5, 0.75)
        m = int(args.params)
    else:
        y = _floats(args.y) if args.y else (1.0,)
        m = 4
    rep.records.extend(suites.pde_records(args.system, args.eta, args.t, args.h, y, m))
    return rep


def _conjecture(args) -> Report:
    grid = parse_grid(args.grid)
    rep = Report("conjecture", _config(args))
    keep = args.format == "csv" or bool(args.figures)
    rec = rep.add(suites.conjecture_record(args.m, grid.get("n", 4000), args.seed,
                                           grid.get("rho", (1e-2, 1e2)), keep_samples=keep))
    if args.figures and rec.samples is not None:
        from .plotting import scan_figure
        scan_figure(rec.samples, args.figures)
    return rep


COMMANDS = {"eval": _eval, "scan": _scan, "verify": _verify, "pde": _pde, "conjecture": _conjecture}


def _config(args) -> dict:
    skip = {"config", "out", "format", "timings", "figures", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def _text(report: Report) -> str:
    lines = []
    for r in report.records:
        vals = ", ".join(f"{k}={_short(v)}" for k, v in _plain(r.values).items()
                         if not isinstance(v, (dict, list)))
        lines.append(f"[{r.status.upper():8s}] {r.name} ({r.paper_anchor}) {vals}")
    return "\n".join(lines) + "\n"


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return v


def run_command(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:           # argparse usage errors and --help
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    except UsageError as exc:
        print(f"weylheat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    try:
        report = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"weylheat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CheckFailure as exc:
        report = Report(args.command, _config(args))
        report.add(Record(getattr(args, "check", args.command), "plumbing", "fail",
                          {"error": str(exc)}, [exc.witness]))
    except (WeylHeatError, ValueError) as exc:
        print(f"weylheat: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not args.timings:
        for r in report.records:
            r.runtime = None
    elif all(r.runtime is None for r in report.records) and report.records:
        report.records[0].runtime = time.perf_counter() - t0
    data = _text(report).encode() if args.format == "text" else emit_report(report, args.format)
    if args.out:
        os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        try:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); not an error of ours
            devnull = os.open(os.devnull, os.O_WRONLY)
            os.dup2(devnull, sys.stdout.fileno())
    return EXIT_OK if report.passed else EXIT_FAIL


def main() -> None:
    sys.exit(run_command())
