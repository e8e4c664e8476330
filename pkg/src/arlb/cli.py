"""Command line interface: ``arlb <command> [options]``.

Commands
--------
calibrate   bounds for one p-value
table1      adaptive alpha levels from a reference experiment
table2      robust lower bounds on the posterior probability of the null
curves      posterior probability of the null against p for one scenario
hald        encompassing comparison on the Hald cement data
verify      lemma and theorem checks

Exit status is 0 on success, 1 when a check fails and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from ._validation import DomainError
from .bayes_ref import (
    PRIOR_PRESETS,
    ExponentialScenario,
    NestedLinearComparison,
    NormalKnownVarScenario,
    NormalUnknownVarScenario,
    bf_bic,
    bf_exponential_intrinsic,
    bf_nested_linear_giron,
    bf_normal_intrinsic_approx,
    bf_normal_known_var,
    bf_normal_robust_prior,
    lr_pvalue_to_xbar_exponential,
)
from .calibration import (
    INV_E,
    EvidenceInput,
    ReferenceExperiment,
    adaptive_alpha_reference,
    arlb,
    odds_to_prob,
    posterior_prob_bound,
    robust_lower_bound,
)
from .consistency import (
    SimulationConfig,
    check_lemma1,
    check_lemma2,
    make_generator,
    self_calibration_scan,
    verify_theorem2,
    verify_theorem3,
)
from .linmod import (
    PUBLISHED_COLUMNS,
    compare_with_published,
    encompassing_rows,
    hald_csv_text,
    hald_dataset,
    hald_encompassing_table,
)
from .specfun import f_quantile, normal_quantile, t_quantile

__all__ = ["main", "build_parser", "OUTPUT_DIR_ENV"]

OUTPUT_DIR_ENV = "ARLB_OUTPUT_DIR"

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad flag value detected after argument parsing."""

    def __init__(self, flag: str, message: str):
        super().__init__(f"argument {flag}: {message}")
        self.flag = flag


# ---------------------------------------------------------------------------
# argument types; argparse turns their ValueError/ArgumentTypeError into
# "argument --flag: ..." usage errors


def _float_in(lo: float | None = None, hi: float | None = None, lo_open: bool = True,
              hi_open: bool = True) -> Callable[[str], float]:
    def parse(text: str) -> float:
        try:
            x = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if math.isnan(x):
            raise argparse.ArgumentTypeError("must not be nan")
        if lo is not None and (x <= lo if lo_open else x < lo):
            raise argparse.ArgumentTypeError(f"must be {'>' if lo_open else '>='} {lo:g}, got {text}")
        if hi is not None and (x >= hi if hi_open else x > hi):
            raise argparse.ArgumentTypeError(f"must be {'<' if hi_open else '<='} {hi:g}, got {text}")
        return x
    return parse


def _int_at_least(minimum: int) -> Callable[[str], int]:
    def parse(text: str) -> int:
        try:
            x = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if x < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}, got {x}")
        return x
    return parse


def _list_of(item: Callable[[str], object]) -> Callable[[str], list]:
    def parse(text: str) -> list:
        parts = [t.strip() for t in text.split(",") if t.strip()]
        if not parts:
            raise argparse.ArgumentTypeError("empty list")
        return [item(t) for t in parts]
    return parse


def _precision(text: str) -> int:
    x = _int_at_least(1)(text)
    if x > 15:
        raise argparse.ArgumentTypeError(f"must be <= 15, got {x}")
    return x


_prob = _float_in(0.0, 1.0)
_positive = _float_in(0.0)
_at_least_one = _float_in(1.0, lo_open=False)


# ---------------------------------------------------------------------------
# output


class Given(float):
    """An input echoed back; printed to ``precision`` significant digits, not decimals."""


def _given(x: float):
    return int(x) if float(x).is_integer() and abs(x) < 2 ** 53 else Given(x)


def _format_value(value, precision: int) -> str:
    if isinstance(value, Given):
        return f"{value:.{precision}g}"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        text = f"{value:.{precision}f}"
        return "0." + "0" * precision if text == "-0." + "0" * precision else text
    return str(value)


def _json_value(value, precision: int) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return "null"
        return _format_value(value, precision)
    return json.dumps(value)


def _csv_field(text: str) -> str:
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def render(columns: Sequence[str], rows: Sequence[Sequence], fmt: str, precision: int) -> str:
    """Render rows as an aligned table, CSV with a header or JSON lines."""
    if fmt == "jsonl":
        lines = ["{" + ", ".join(f"{json.dumps(c)}: {_json_value(v, precision)}"
                                 for c, v in zip(columns, row)) + "}" for row in rows]
        return "".join(line + "\n" for line in lines)
    cells = [[_format_value(v, precision) for v in row] for row in rows]
    if fmt == "csv":
        out = [",".join(_csv_field(c) for c in columns)]
        out += [",".join(_csv_field(c) for c in row) for row in cells]
        return "\n".join(out) + "\n"
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    out = ["  ".join(c.rjust(w) for c, w in zip(columns, widths)),
           "  ".join("-" * w for w in widths)]
    out += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(out) + "\n"


_EXTENSIONS = {"csv": "csv", "jsonl": "jsonl", "table": "txt"}


def _destination(args, default_stem: str) -> Path | None:
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if args.output is not None:
        if args.output == "-":
            return None
        path = Path(args.output)
        return path if path.is_absolute() or not out_dir else Path(out_dir) / path
    if out_dir:
        return Path(out_dir) / f"{default_stem}.{_EXTENSIONS[args.format]}"
    return None


def _emit(args, text: str, default_stem: str) -> None:
    path = _destination(args, default_stem)
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _table(args, columns, rows, default_stem: str) -> None:
    _emit(args, render(columns, rows, args.format, args.precision), default_stem)


def _note(message: str) -> None:
    print(message, file=sys.stderr)


# ---------------------------------------------------------------------------
# commands


def cmd_calibrate(args) -> int:
    if args.alpha0 is not None and args.n0 is None:
        raise UsageError("--alpha0", "requires --n0")
    res = arlb(EvidenceInput(args.p, args.n, args.q), floor_at_rlb=not args.no_floor)
    columns = ["p", "n", "q", "b_l", "g", "o_l", "p_l", "rlb_valid"]
    row = [_given(args.p), _given(args.n), args.q, res.b_l, res.g, res.o_l, res.p_l, res.rlb_valid]
    if args.n0 is not None:
        ref = ReferenceExperiment(args.n0, 0.05 if args.alpha0 is None else args.alpha0)
        columns.append("alpha_reference")
        row.append(adaptive_alpha_reference(ref, args.n))
    if not res.rlb_valid:
        _note(f"warning: p = {args.p:g} is not below 1/e; the robust lower bound is not valid "
              "there (rlb_valid=false)")
    _table(args, columns, [row], "calibrate")
    return EXIT_OK


DEFAULT_TABLE1_N = [10, 50, 100, 500, 1000, 10000]
DEFAULT_TABLE2_P = [0.05, 0.01, 0.005, 0.001, 0.0005, 0.0001]


def cmd_table1(args) -> int:
    ref = ReferenceExperiment(args.n0, args.alpha0)
    rows = [[_given(n), adaptive_alpha_reference(ref, n)] for n in args.n_list]
    _table(args, ["n", "alpha_n"], rows, "table1")
    return EXIT_OK


def cmd_table2(args) -> int:
    rows = [[_given(p), robust_lower_bound(p), posterior_prob_bound(p)] for p in args.p_list]
    _table(args, ["p", "b_l", "posterior_bound"], rows, "table2")
    return EXIT_OK


def _log_grid(lo: float, hi: float, points: int) -> list[float]:
    if points == 1:
        return [lo]
    step = (math.log(hi) - math.log(lo)) / (points - 1)
    return [math.exp(math.log(lo) + i * step) for i in range(points)]


def _prob_from_b01(b: float) -> float:
    return odds_to_prob(b)


CURVE_COLUMNS = {
    "normal-known": ["p", "z", "prior_k1", "prior_k2", "rlb", "arlb"],
    "normal-unknown": ["p", "t", "intrinsic", "robust", "rlb", "arlb"],
    "exponential": ["p", "xbar", "intrinsic", "rlb", "arlb"],
    "linear": ["p", "f_stat", "ibf_reference", "ibf_jeffreys", "ibf_mod_jeffreys", "bic", "rlb", "arlb"],
}


def curve_rows(scenario: str, n: int, p_grid: Sequence[float], q: int = 1, k: int = 4,
               k1: int | None = None, lambda0: float = 1.0, branch: str = "lower") -> list[list]:
    """Posterior probabilities of the null along ``p_grid``; columns per :data:`CURVE_COLUMNS`."""
    rows = []
    if scenario == "linear":
        k1 = k - q if k1 is None else k1
        q = k - k1
    for p in p_grid:
        rlb = posterior_prob_bound(p)
        ar = arlb(EvidenceInput(p, n, q)).p_l
        if scenario == "normal-known":
            z = -normal_quantile(p / 2.0)
            b1 = bf_normal_known_var(NormalKnownVarScenario(z, n, 1.0))
            b2 = bf_normal_known_var(NormalKnownVarScenario(z, n, 2.0))
            rows.append([p, z, _prob_from_b01(b1), _prob_from_b01(b2), rlb, ar])
        elif scenario == "normal-unknown":
            t = t_quantile(p / 2.0, n - 1)
            s = NormalUnknownVarScenario(t, n)
            rows.append([p, t, _prob_from_b01(bf_normal_intrinsic_approx(s)),
                         _prob_from_b01(bf_normal_robust_prior(s)), rlb, ar])
        elif scenario == "exponential":
            xbar = lr_pvalue_to_xbar_exponential(p, n, lambda0, branch)
            b = bf_exponential_intrinsic(ExponentialScenario(xbar, n, lambda0))
            rows.append([p, xbar, _prob_from_b01(b), rlb, ar])
        elif scenario == "linear":
            df2 = n - k - 1
            f_stat = f_quantile(p, q, df2)
            ratio = 1.0 + q * f_stat / df2
            ibf = [_prob_from_b01(bf_nested_linear_giron(
                NestedLinearComparison.with_preset(n, k + 1, k1 + 1, ratio, preset)))
                for preset in PRIOR_PRESETS]
            bic = _prob_from_b01(bf_bic(ratio, 1.0, n, q))
            rows.append([p, f_stat, *ibf, bic, rlb, ar])
        else:
            raise UsageError("--scenario", f"unknown scenario {scenario!r}")
    return rows


def cmd_curves(args) -> int:
    if args.p_min >= args.p_max and args.points > 1:
        raise UsageError("--p-min", f"must be below --p-max ({args.p_max:g})")
    if args.scenario == "normal-unknown" and args.n < 3:
        raise UsageError("--n", "normal-unknown needs n >= 3")
    if args.scenario == "linear":
        k1 = args.k - args.q if args.k1 is None else args.k1
        if not 0 <= k1 < args.k:
            raise UsageError("--k1", f"must satisfy 0 <= k1 < k = {args.k}")
        if args.n <= args.k + 2:
            raise UsageError("--n", f"linear scenario needs n > k + 2 = {args.k + 2}")
    grid = _log_grid(args.p_min, args.p_max, args.points)
    if args.p_max >= INV_E:
        _note("warning: the grid reaches p >= 1/e, where the robust lower bound is not valid")
    rows = curve_rows(args.scenario, args.n, grid, q=args.q, k=args.k, k1=args.k1,
                      lambda0=args.lambda0, branch=args.branch)
    rows = [[Given(r[0])] + r[1:] for r in rows]
    _table(args, CURVE_COLUMNS[args.scenario], rows, f"curves-{args.scenario}-n{args.n}")
    return EXIT_OK


HALD_COLUMNS = ["model", "p_value", "q", "ibf_reference", "ibf_jeffreys", "ibf_mod_jeffreys",
                "b_lb", "o_l", "b_bic", "f_stat", "g"]


def cmd_hald(args) -> int:
    if args.dump_data:
        _emit(args, hald_csv_text(), "hald")
        return EXIT_OK
    floor = not args.no_floor
    if args.all_subsets:
        rows = encompassing_rows(hald_dataset(), floor_at_rlb=floor)
    else:
        rows = hald_encompassing_table(floor_at_rlb=floor)
    if args.check:
        checks = compare_with_published(rows)
        order = {c: i for i, c in enumerate(PUBLISHED_COLUMNS)}
        row_order = {r.model_label: i for i, r in enumerate(rows)}
        checks.sort(key=lambda c: (row_order[c.model_label], order[c.column]))
        table = [[c.model_label, c.column, c.computed, c.published, Given(c.deviation), Given(c.tolerance),
                  "relative" if c.relative else "absolute",
                  "informational" if c.informational else "checked", c.ok] for c in checks]
        _table(args, ["model", "column", "computed", "published", "deviation", "tolerance",
                      "kind", "status", "ok"], table, "hald-check")
        bad = [c for c in checks if not c.ok and not c.informational]
        info = [c for c in checks if not c.ok and c.informational]
        _note(f"hald check: {len(checks) - len(bad) - len(info)}/{len(checks)} cells within tolerance; "
              f"{len(bad)} checked cell(s) off, {len(info)} informational cell(s) off")
        return EXIT_CHECK_FAILED if bad else EXIT_OK
    table = [[r.model_label, r.p_value, r.q, r.ibf_reference, r.ibf_jeffreys, r.ibf_mod_jeffreys,
              r.b_lb, r.o_l, r.b_bic, r.f_stat, r.g] for r in rows]
    _table(args, HALD_COLUMNS, table, "hald")
    return EXIT_OK


def _report_rows(report) -> tuple[list[str], list[list]]:
    """Columns and rows of a consistency report, with numbers kept numeric."""
    name = type(report).__name__
    if name == "Theorem2Report":
        return (["n", "regime", "W", "empirical_prob", "analytic_bound", "mc_stderr", "exact_prob"],
                [[r.n, r.regime, r.W, r.empirical_prob, r.analytic_bound, r.mc_stderr, r.exact_prob]
                 for r in report.rows])
    if name == "Theorem3Report":
        return (["p", "n_star", "q", "o_l"],
                [[p, float(report.n_star), report.q, Given(o)] for p, o in zip(report.p_grid, report.o_l)])
    if name == "SelfCalibrationReport":
        return (["n_star", "q", "alpha", "value", "distance_to_1", "distance_to_e_over_2"],
                [[float(n), report.q, report.alpha, v, abs(v - 1.0), abs(v - math.e / 2.0)]
                 for n, v in zip(report.n_grid, report.values)])
    return (["check", "samples", "violations", "worst_margin", "passed"],
            [[f"lemma{report.lemma}", report.samples, report.violations, Given(report.worst_margin),
              report.passed]])


def theorem1_passed(report, target: float = 1e10) -> bool:
    """Value at the grid point nearest ``target`` lies in [0.9, 1.1] and the scan increases."""
    i = min(range(len(report.n_grid)), key=lambda j: abs(math.log(report.n_grid[j] / target)))
    return 0.9 <= report.values[i] <= 1.1 and report.increasing


def cmd_verify(args) -> int:
    if args.lemma is not None:
        check = check_lemma1 if args.lemma == 1 else check_lemma2
        report = check(args.samples, make_generator(args.seed, 0, args.lemma))
        passed, stem = report.passed, f"verify-lemma{args.lemma}"
    elif args.theorem == 1:
        n_grid = args.n_grid or [10.0 ** k for k in range(4, 13)]
        report = self_calibration_scan(args.alpha, args.q, [float(n) for n in n_grid])
        passed, stem = theorem1_passed(report), "verify-theorem1"
        _note(f"limit estimate: {report.limit_estimate}")
    elif args.theorem == 2:
        if args.q != 1:
            raise UsageError("--q", "theorem 2 is checked for q = 1 only")
        cfg = SimulationConfig(reps=args.reps, n_grid=tuple(args.n_grid or (100, 1000, 10000)),
                               delta=args.delta, w_threshold=args.w, seed=args.seed,
                               alt_w_threshold=args.alt_w, n_jobs=args.jobs,
                               stabilizer=args.stabilizer)
        report = verify_theorem2(cfg)
        passed, stem = report.passed, "verify-theorem2"
    else:
        report = verify_theorem3(args.n_star, args.q)
        passed, stem = report.passed, "verify-theorem3"
    columns, rows = _report_rows(report)
    rows = [[_given(v) if c in ("n", "n_star", "p", "W", "alpha") and isinstance(v, float) else v
             for c, v in zip(columns, row)] for row in rows]
    _table(args, columns, rows, stem)
    what = f"lemma {args.lemma}" if args.lemma is not None else f"theorem {args.theorem}"
    _note(f"{what}: {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# parser


def _common(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("output")
    g.add_argument("--format", choices=("table", "csv", "jsonl"), default="table",
                   help="output format (default: table)")
    g.add_argument("--precision", type=_precision, default=5,
                   help="decimal places for numbers, 1-15 (default: 5)")
    g.add_argument("--output", metavar="PATH", default=None,
                   help=f"write here instead of stdout; relative paths go under ${OUTPUT_DIR_ENV} "
                        "when it is set, '-' forces stdout")
    g.add_argument("--config", metavar="PATH", default=None,
                   help="key = value file with defaults for any flag; flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arlb", description="Adaptive robust lower bounds for p-value calibration.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("calibrate", help="bounds for one p-value")
    p.add_argument("--p", type=_prob, required=True, help="observed p-value in (0, 1)")
    p.add_argument("--n", type=_at_least_one, required=True, help="effective sample size n* >= 1")
    p.add_argument("--q", type=_int_at_least(1), default=1, help="dimension difference (default: 1)")
    p.add_argument("--n0", type=_at_least_one, default=None, help="reference experiment sample size")
    p.add_argument("--alpha0", type=_prob, default=None, help="reference level (default: 0.05)")
    p.add_argument("--no-floor", action="store_true", help="report O_L = B_L g even when g < 1")
    _common(p)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("table1", help="adaptive alpha levels")
    p.add_argument("--n0", type=_at_least_one, default=10.0)
    p.add_argument("--alpha0", type=_prob, default=0.05)
    p.add_argument("--n-list", type=_list_of(_at_least_one), default=DEFAULT_TABLE1_N,
                   help="comma-separated sample sizes")
    _common(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("table2", help="robust lower bounds on P(H0 | data)")
    p.add_argument("--p-list", type=_list_of(_prob), default=DEFAULT_TABLE2_P,
                   help="comma-separated p-values")
    _common(p)
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("curves", help="P(H0) against p for one scenario")
    p.add_argument("--scenario", choices=tuple(CURVE_COLUMNS), required=True)
    p.add_argument("--n", type=_int_at_least(1), default=50)
    p.add_argument("--p-min", type=_prob, default=1e-4)
    p.add_argument("--p-max", type=_prob, default=0.1)
    p.add_argument("--points", type=_int_at_least(1), default=25)
    p.add_argument("--q", type=_int_at_least(1), default=1,
                   help="dimension difference; for linear, the number of dropped regressors")
    p.add_argument("--k", type=_int_at_least(1), default=4, help="linear: regressors in the full model")
    p.add_argument("--k1", type=_int_at_least(0), default=None,
                   help="linear: regressors kept (default: k - q)")
    p.add_argument("--lambda0", type=_positive, default=1.0, help="exponential: null rate")
    p.add_argument("--branch", choices=("lower", "upper"), default="lower",
                   help="exponential: which root of the likelihood-ratio equation")
    _common(p)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("hald", help="Hald data encompassing comparison")
    p.add_argument("--check", action="store_true", help="compare with the published values")
    p.add_argument("--dump-data", action="store_true", help="write the embedded data as CSV")
    p.add_argument("--all-subsets", action="store_true",
                   help="every proper sub-model instead of the ten published rows")
    p.add_argument("--no-floor", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_hald)

    p = sub.add_parser("verify", help="lemma and theorem checks")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--lemma", type=int, choices=(1, 2))
    which.add_argument("--theorem", type=int, choices=(1, 2, 3))
    p.add_argument("--samples", type=_int_at_least(1), default=100_000)
    p.add_argument("--reps", type=_int_at_least(1), default=10_000)
    p.add_argument("--seed", type=_int_at_least(0), default=20171116)
    p.add_argument("--n-grid", type=_list_of(_at_least_one), default=None,
                   help="comma-separated sample sizes")
    p.add_argument("--delta", type=_float_in(0.0, lo_open=False), default=0.5)
    p.add_argument("--w", type=_positive, default=1.0, help="null-side odds threshold")
    p.add_argument("--alt-w", type=_positive, default=1.0 / 99.0,
                   help="alternative-side odds threshold (default: 1/99, i.e. P_L >= 0.01)")
    p.add_argument("--stabilizer", choices=("exact", "asymptotic"), default="exact")
    p.add_argument("--jobs", type=_int_at_least(1), default=1)
    p.add_argument("--n-star", type=_positive, default=100.0)
    p.add_argument("--q", type=_int_at_least(1), default=1)
    p.add_argument("--alpha", type=_prob, default=0.05)
    _common(p)
    p.set_defaults(func=cmd_verify)
    return parser


# ---------------------------------------------------------------------------
# config files


def read_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment and keys may use ``-`` or ``_``."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError("--config", f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[command]
    raise KeyError(command)


def _config_path(argv: Sequence[str]) -> str | None:
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    return path


def _apply_config(sub: argparse.ArgumentParser, command: str, path: str) -> None:
    """Install the values in the config file as defaults of ``sub``."""
    actions = {a.dest: a for a in sub._actions if a.option_strings}
    defaults = {}
    for key, text in read_config(path).items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError("--config", f"unknown key {key!r} for '{command}'")
        flag = action.option_strings[0]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            if text.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(flag, f"config value {text!r} is not a boolean")
            defaults[key] = text.lower() in ("true", "1", "yes")
            continue
        try:
            value = action.type(text) if action.type else text
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(flag, f"config value: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(flag, f"config value {text!r} not in {list(action.choices)}")
        defaults[key] = value
    sub.set_defaults(**defaults)
    for action in sub._actions:
        if action.dest in defaults:
            action.required = False
    for group in sub._mutually_exclusive_groups:
        if group.required and any(a.dest in defaults for a in group._group_actions):
            group.required = False


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    command = next((a for a in argv if not a.startswith("-")), None)
    config = _config_path(argv)
    try:
        if config is not None and command is not None:
            try:
                sub = _subparser(parser, command)
            except KeyError:
                sub = None
            if sub is not None:
                try:
                    _apply_config(sub, command, config)
                except OSError as exc:
                    raise UsageError("--config", str(exc)) from None
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"arlb {command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"arlb {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        parser.print_usage(sys.stderr)
        print(f"arlb {args.command}: error: invalid value for {exc.name}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
