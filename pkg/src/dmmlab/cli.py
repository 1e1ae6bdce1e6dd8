"""Command-line front end.

Subcommands:

* ``analytic``  - evaluate the closed forms over a sweep, write CSV.
* ``simulate``  - run the road simulator over a sweep (optionally with the
  analytic columns filled in), write CSV.
* ``plot``      - render a previously written CSV as SVG figures.
* ``report``    - run the applicable trend checks against CSV tables.
* ``figures``   - run the whole trend-study suite: CSVs, SVGs and a check
  report in one output directory.

Exit codes: 0 success, 1 usage error, 2 invalid scenario/parameters,
3 one or more trend checks failed.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import figures as figmod
from . import plotting, sweeps
from .model import METRICS, Scheme
from .params import (ScenarioError, SystemParameters, ValidationError,
                     defaults, parse_scenario)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_CHECK_FAILED = 3

_SCHEME_NAMES = {
    "ddmm": Scheme.DDMM,
    "pre-fdmm": Scheme.PRE_FDMM, "pre": Scheme.PRE_FDMM,
    "re-fdmm": Scheme.RE_FDMM, "re": Scheme.RE_FDMM,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_params(path: str | None) -> SystemParameters:
    if path is None:
        return defaults()
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_scenario(fh.read())
    except FileNotFoundError:
        raise CliError(f"scenario file not found: {path}", EXIT_USAGE)
    except (ScenarioError, ValidationError) as exc:
        raise CliError(f"invalid scenario: {exc}", EXIT_VALIDATION)


def _parse_schemes(arg: str | None) -> tuple[Scheme, ...]:
    if not arg:
        return tuple(Scheme)
    out = []
    for token in arg.split(","):
        token = token.strip().lower()
        if token not in _SCHEME_NAMES:
            raise CliError(f"unknown scheme {token!r}", EXIT_USAGE)
        out.append(_SCHEME_NAMES[token])
    return tuple(dict.fromkeys(out))


def _parse_metrics(arg: str | None) -> tuple[str, ...]:
    if not arg:
        return METRICS
    out = []
    for token in arg.split(","):
        token = token.strip().lower()
        if token not in METRICS:
            raise CliError(f"unknown metric {token!r}", EXIT_USAGE)
        out.append(token)
    return tuple(dict.fromkeys(out))


def _parse_seeds(arg: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in arg.split(","))
    except ValueError:
        raise CliError(f"bad seed list {arg!r}", EXIT_USAGE)


def _build_spec(args: argparse.Namespace, mode: str) -> sweeps.SweepSpec:
    if args.sweep:
        try:
            param, values = sweeps.parse_sweep_arg(args.sweep)
        except ValueError as exc:
            raise CliError(str(exc), EXIT_USAGE)
    else:
        param, values = None, ()
    try:
        return sweeps.SweepSpec(
            param=param, values=values,
            schemes=_parse_schemes(args.scheme),
            metrics=_parse_metrics(args.metric),
            mode=mode,
            seeds=_parse_seeds(args.seeds) if hasattr(args, "seeds") else (1,),
            duration=getattr(args, "duration", 7200.0),
            fleet=getattr(args, "fleet", 1))
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE)


def _write_table(table: sweeps.ResultTable, out_dir: str, stem: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{stem}.csv")
    with open(path, "w", encoding="utf-8") as fh:
        sweeps.write_csv(table, fh)
    return path


def _sweep_stem(prefix: str, spec: sweeps.SweepSpec) -> str:
    return f"{prefix}_{spec.param or 'point'}"


def _cmd_analytic(args: argparse.Namespace) -> int:
    base = _load_params(args.scenario)
    spec = _build_spec(args, "analytic")
    try:
        table = sweeps.run_sweep(spec, base)
    except (ValidationError, ScenarioError) as exc:
        raise CliError(f"invalid sweep value: {exc}", EXIT_VALIDATION)
    path = _write_table(table, args.out, _sweep_stem("analytic", spec))
    print(path)
    if args.plot:
        for fig in plotting.plot_table(table, args.out,
                                       _sweep_stem("analytic", spec)):
            print(fig)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    base = _load_params(args.scenario)
    if args.mode not in ("simulate", "both"):
        raise CliError("mode must be 'simulate' or 'both'", EXIT_USAGE)
    spec = _build_spec(args, args.mode)
    trace_dir = args.out if args.trace else None
    if trace_dir:
        os.makedirs(trace_dir, exist_ok=True)
    try:
        table = sweeps.run_sweep(spec, base, trace_dir=trace_dir)
    except (ValidationError, ScenarioError) as exc:
        raise CliError(f"invalid sweep value: {exc}", EXIT_VALIDATION)
    path = _write_table(table, args.out, _sweep_stem("simulate", spec))
    print(path)
    if args.plot:
        for fig in plotting.plot_table(table, args.out,
                                       _sweep_stem("simulate", spec)):
            print(fig)
    return EXIT_OK


def _cmd_plot(args: argparse.Namespace) -> int:
    try:
        with open(args.table, encoding="utf-8") as fh:
            table = sweeps.read_csv(fh.read())
    except FileNotFoundError:
        raise CliError(f"table not found: {args.table}", EXIT_USAGE)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION)
    if not table.rows:
        raise CliError("empty result table", EXIT_USAGE)
    stem = args.stem or os.path.splitext(os.path.basename(args.table))[0]
    for fig in plotting.plot_table(table, args.out, stem):
        print(fig)
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    base = _load_params(args.scenario)
    any_fail = False
    any_check = False
    for path in args.tables:
        try:
            with open(path, encoding="utf-8") as fh:
                table = sweeps.read_csv(fh.read())
        except FileNotFoundError:
            raise CliError(f"table not found: {path}", EXIT_USAGE)
        except ValueError as exc:
            raise CliError(f"{path}: {exc}", EXIT_VALIDATION)
        checks = figmod.checks_for_table(table, base)
        print(f"== {path}")
        if not checks:
            print("no checks applicable")
            continue
        any_check = True
        for c in checks:
            status = "PASS" if c.passed else "FAIL"
            detail = f"  [{c.detail}]" if c.detail else ""
            print(f"{status}  {c.study}: {c.name}{detail}")
            any_fail = any_fail or not c.passed
    if not any_check and not args.tables:
        print("no checks applicable")
    return EXIT_CHECK_FAILED if any_fail else EXIT_OK


def _cmd_figures(args: argparse.Namespace) -> int:
    base = _load_params(args.scenario)
    os.makedirs(args.out, exist_ok=True)
    results = []
    for name in figmod.STUDIES:
        res = figmod.run_study(name, base)
        results.append(res)
        _write_table(res.table, args.out, name)
        plotting.plot_table(res.table, args.out, name)
    report = figmod.format_check_report(results)
    report_path = os.path.join(args.out, "report.txt")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(report + "\n")
    print(report)
    print(report_path)
    ok = all(res.passed for res in results)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dmmlab",
                     description="handover performance workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p0: argparse.ArgumentParser, plot_flag: bool = True) -> None:
        p0.add_argument("--scenario", help="scenario file (key = value)")
        p0.add_argument("--sweep", help="param=lo:hi:step or param=v1,v2,...")
        p0.add_argument("--scheme",
                        help="comma list: ddmm,pre-fdmm,re-fdmm (default all)")
        p0.add_argument("--metric",
                        help=f"comma list of {','.join(METRICS)} (default all)")
        p0.add_argument("--out", default="results", help="output directory")
        if plot_flag:
            p0.add_argument("--plot", action="store_true",
                            help="also render SVG figures")

    pa = sub.add_parser("analytic", help="evaluate the closed forms")
    common(pa)
    pa.set_defaults(fn=_cmd_analytic)

    ps = sub.add_parser("simulate", help="run the road simulator")
    common(ps)
    ps.add_argument("--seeds", default="1", help="comma list of seeds")
    ps.add_argument("--mode", default="both",
                    choices=("simulate", "both"),
                    help="simulate only, or fill analytic columns too")
    ps.add_argument("--duration", type=float, default=7200.0,
                    help="simulated seconds per run")
    ps.add_argument("--fleet", type=int, default=1,
                    help="number of independent mobiles")
    ps.add_argument("--trace", action="store_true",
                    help="write per-run event trace files")
    ps.set_defaults(fn=_cmd_simulate)

    pp = sub.add_parser("plot", help="render a result CSV as SVG")
    pp.add_argument("--table", required=True, help="CSV written by this tool")
    pp.add_argument("--out", default="results", help="output directory")
    pp.add_argument("--stem", help="output file stem")
    pp.set_defaults(fn=_cmd_plot)

    pr = sub.add_parser("report", help="run trend checks against CSV tables")
    pr.add_argument("tables", nargs="*", help="result CSV files")
    pr.add_argument("--scenario", help="scenario file (key = value)")
    pr.set_defaults(fn=_cmd_report)

    pf = sub.add_parser("figures", help="run the whole trend-study suite")
    pf.add_argument("--scenario", help="scenario file (key = value)")
    pf.add_argument("--out", default="figures", help="output directory")
    pf.set_defaults(fn=_cmd_figures)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"dmmlab: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
