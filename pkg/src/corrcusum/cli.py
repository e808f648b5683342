"""Command-line interface: ``test``, ``rolling``, ``critical`` and ``study``.

Exit codes: 0 when a command ran (whatever the test decision), 2 on input
errors, 3 on numerical degeneracy.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

from .bootstrap import BootstrapConfig, default_block_length
from .core import pair_labels, rolling_correlations
from .errors import DegenerateError, InputError
from .io import InputSpec, ingest
from .limit import DEFAULT_GRID, DEFAULT_PATHS, critical_value, get_table
from .pipeline import run_test
from .sim import BreakSpec, DgpSpec, check_break, rejection_se, rejection_study

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("corrcusum")

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 2, 3

REPORT_KEYS = ("q_raw", "q_std", "d", "critical_value", "p_value", "reject",
               "changepoint_k", "process", "e_hat", "config")


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage
        self.exc = exc


class _stage:
    """Tag any package error raised inside the block with a stage name."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, et, exc, tb):
        if exc is not None and isinstance(exc, (InputError, DegenerateError)):
            raise StageError(self.name, exc) from exc
        return False


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _input_spec(args):
    cols = [c for c in args.columns.split(",") if c.strip()] if args.columns else None
    return InputSpec(args.input, args.mode, args.delimiter, not args.no_header, cols)


# ---------------------------------------------------------------------------
# test
# ---------------------------------------------------------------------------

def build_report(args):
    """Run the full pipeline for ``args`` and return the JSON-ready report."""
    with _stage("ingest"):
        panel = ingest(_input_spec(args))
    with _stage("bootstrap"):
        l = args.block_length if args.block_length is not None else default_block_length(panel.T)
        boot = BootstrapConfig(l, args.bootstrap, args.seed)
        boot.validate_for(panel.T)
    with _stage("limit"):
        table = get_table(panel.d, args.grid, args.paths, args.seed,
                          refine=not args.grid_only, cache_dir=args.cache_dir)
    with _stage("test"):
        rep = run_test(panel, table, boot, args.alpha)
    config = {
        "input": str(args.input),
        "mode": args.mode,
        "T": panel.T,
        "p": panel.p,
        "labels": list(panel.labels),
        "pairs": pair_labels(panel.labels),
        **boot.as_dict(),
        "alpha": float(args.alpha),
        **{k: v for k, v in table.as_dict().items() if k != "d" and k != "seed"},
        "table_seed": int(table.seed),
        "bootstrap_redraws": int(rep.e_hat.redraws),
    }
    if panel.row_labels is not None:
        config["changepoint_label"] = panel.row_labels[rep.changepoint_k - 1]
    return {
        "q_raw": _num(rep.q_raw),
        "q_std": _num(rep.q_std),
        "d": int(rep.d),
        "critical_value": _num(rep.critical_value),
        "p_value": _num(rep.p_value),
        "reject": bool(rep.reject),
        "changepoint_k": int(rep.changepoint_k),
        "process": {
            "k": [int(k) for k in rep.process.k],
            "raw": [_num(v) for v in rep.raw_process.values],
            "standardized": [_num(v) for v in rep.process.values],
        },
        "e_hat": [[float(v) for v in row] for row in rep.e_hat.m],
        "config": config,
    }


def cmd_test(args):
    report = build_report(args)
    text = json.dumps(report, indent=1) + "\n"
    _emit(text, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# rolling
# ---------------------------------------------------------------------------

def rolling_csv(panel, window):
    r = rolling_correlations(panel, window)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    first = "date" if panel.row_labels is not None else "start"
    w.writerow([first] + pair_labels(panel.labels))
    for t, row in enumerate(r):
        tag = panel.row_labels[t] if panel.row_labels is not None else t + 1
        w.writerow([tag] + [f"{v:.12g}" for v in row])
    return buf.getvalue()


def cmd_rolling(args):
    with _stage("ingest"):
        panel = ingest(_input_spec(args))
    with _stage("rolling"):
        text = rolling_csv(panel, args.window)
    _emit(text, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# critical
# ---------------------------------------------------------------------------

def cmd_critical(args):
    with _stage("limit"):
        table = get_table(args.d, args.grid, args.paths, args.seed,
                          refine=not args.grid_only, cache_dir=args.cache_dir)
        value = critical_value(table, args.alpha)
    _emit(f"{value:.6f}\n", None)
    return EXIT_OK


# ---------------------------------------------------------------------------
# study
# ---------------------------------------------------------------------------

_TOP_KEYS = {"T", "mc_reps", "bootstrap", "seed", "alpha", "grid", "paths", "block_length",
             "dgp", "rows"}
_DGP_KEYS = {"p", "distribution", "ma", "base_correlation", "variances"}
_ROW_KEYS = {"ma", "distribution", "delta_rho", "pairs", "location"}


def load_study(path):
    """Parse and validate a study configuration (TOML)."""
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except FileNotFoundError:
        raise InputError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"{path}: {exc}") from None
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
    dgp = cfg.get("dgp", {})
    if set(dgp) - _DGP_KEYS:
        raise InputError(f"unknown [dgp] keys: {', '.join(sorted(set(dgp) - _DGP_KEYS))}")
    rows = cfg.get("rows", [{}])
    for row in rows:
        if set(row) - _ROW_KEYS:
            raise InputError(f"unknown [[rows]] keys: {', '.join(sorted(set(row) - _ROW_KEYS))}")
        if row.get("pairs", "first") not in ("first", "all"):
            raise InputError("pairs must be 'first' or 'all'")
    Ts = cfg.get("T", [500])
    Ts = [Ts] if isinstance(Ts, int) else list(Ts)
    mc_reps = cfg.get("mc_reps", 1000)
    if not isinstance(mc_reps, int) or mc_reps < 1:
        raise InputError(f"mc_reps must be a positive integer, got {mc_reps!r}")
    if not Ts or any(not isinstance(t, int) or t < 3 for t in Ts):
        raise InputError("T must be a list of integers >= 3")
    alpha = float(cfg.get("alpha", 0.05))
    if not 0 < alpha <= 1:
        raise InputError(f"alpha must lie in (0, 1], got {alpha}")
    B = cfg.get("bootstrap", 199)
    if not isinstance(B, int) or B < 2:
        raise InputError(f"bootstrap must be an integer >= 2, got {B!r}")
    return {
        "T": Ts,
        "mc_reps": mc_reps,
        "bootstrap": B,
        "seed": int(cfg.get("seed", 0)),
        "alpha": alpha,
        "grid": int(cfg.get("grid", DEFAULT_GRID)),
        "paths": int(cfg.get("paths", DEFAULT_PATHS)),
        "block_length": cfg.get("block_length", "auto"),
        "dgp": dgp,
        "rows": rows,
    }


def run_study(cfg, cache_dir=None):
    """Yield one output row per (config row, T)."""
    dgp_cfg = cfg["dgp"]
    p = int(dgp_cfg.get("p", 4))
    d = p * (p - 1) // 2
    table = get_table(d, cfg["grid"], cfg["paths"], cfg["seed"], cache_dir=cache_dir)
    for row in cfg["rows"]:
        ma = float(row.get("ma", dgp_cfg.get("ma", 0.0)))
        dist = row.get("distribution", dgp_cfg.get("distribution", "normal"))
        delta = float(row.get("delta_rho", 0.0))
        which = row.get("pairs", "first")
        loc = float(row.get("location", 0.5))
        for T in cfg["T"]:
            out = {"ma": ma, "distribution": dist, "delta_rho": delta, "pairs": which, "T": T}
            bl = cfg["block_length"]
            l = default_block_length(T) if bl == "auto" else int(bl)
            try:
                dgp = DgpSpec(p, T, dist, ma, dgp_cfg.get("base_correlation"),
                              dgp_cfg.get("variances"), cfg["seed"])
                brk = None
                if delta != 0.0:
                    brk = (BreakSpec.all_pairs(p, delta, loc) if which == "all"
                           else BreakSpec.single_pair(p, delta, (0, 1), loc))
                    check_break(dgp, brk)
            except InputError as exc:
                if "positive definite" not in str(exc):
                    raise
                log.info("row %s T=%d skipped: %s", out, T, exc)
                yield {**out, "rate": "*", "mc_se": "*"}
                continue
            boot = BootstrapConfig(l, cfg["bootstrap"], cfg["seed"])
            rate = rejection_study(dgp, brk, cfg["mc_reps"], boot, table, cfg["alpha"])
            yield {**out, "rate": f"{rate:.4f}",
                   "mc_se": f"{rejection_se(rate, cfg['mc_reps']):.4f}"}


def cmd_study(args):
    with _stage("config"):
        cfg = load_study(args.config)
    buf = io.StringIO()
    fields = ["ma", "distribution", "delta_rho", "pairs", "T", "rate", "mc_se"]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    with _stage("study"):
        for row in run_study(cfg, args.cache_dir):
            w.writerow(row)
            log.info("%s", row)
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _emit(text, output):
    if output is None or output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(output).write_text(text)


def _add_input(p):
    p.add_argument("input", help="delimited text file")
    p.add_argument("--mode", choices=("returns", "prices"), default="returns")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--no-header", action="store_true", help="file has no header row")
    p.add_argument("--columns", help="comma-separated labels or 0-based indices")


def _add_table(p):
    p.add_argument("--grid", type=int, default=DEFAULT_GRID, help="grid steps on [0, 1]")
    p.add_argument("--paths", type=int, default=DEFAULT_PATHS, help="simulated suprema")
    p.add_argument("--grid-only", action="store_true",
                   help="grid-monitored supremum without the within-interval refinement")
    p.add_argument("--cache-dir", default=None,
                   help="directory for cached limit tables (default: $CORRCUSUM_CACHE_DIR)")


def make_parser():
    parser = argparse.ArgumentParser(
        prog="corrcusum", description="Test for a change in the correlation matrix.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="run the test and print a JSON report")
    _add_input(p)
    p.add_argument("--block-length", type=int, default=None, help="default floor(T ** 0.25)")
    p.add_argument("--bootstrap", type=int, default=199, help="bootstrap replications B")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.05)
    _add_table(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("rolling", help="rolling pairwise correlations as CSV")
    _add_input(p)
    p.add_argument("--window", type=int, default=120)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_rolling)

    p = sub.add_parser("critical", help="critical value of the null limit law")
    p.add_argument("d", type=int, help="number of pairs, p (p - 1) / 2")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    _add_table(p)
    p.set_defaults(func=cmd_critical)

    p = sub.add_parser("study", help="empirical size / power table as CSV")
    p.add_argument("config", help="TOML study configuration")
    p.add_argument("--cache-dir", default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_study)
    return parser


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except StageError as err:
        code = EXIT_DEGENERATE if isinstance(err.exc, DegenerateError) else EXIT_INPUT
        print(f"corrcusum: error in {err.stage}: {err.exc}", file=sys.stderr)
        return code
    except (InputError, DegenerateError) as exc:
        code = EXIT_DEGENERATE if isinstance(exc, DegenerateError) else EXIT_INPUT
        print(f"corrcusum: error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
