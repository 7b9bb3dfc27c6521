"""Command-line front end for the kernel-field uncertainty toolkit.

Subcommands: generate, decompose, train, uq, evaluate, plot.  Outputs are
deterministic given flags and recipe seeds; wall-clock chatter goes to
stderr so files and stdout stay byte-stable across runs.

Exit codes: 0 success, 2 usage error, 1 runtime failure.  With --json,
errors are emitted as one JSON object on stderr.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import datasets, pipelines, svgplot, tableio
from .mlp import ModelFormatError, TrainingError
from .modes import ModeConfig, qipf_modes, read_mode_json, timeseries_qipf, \
    write_mode_csv, write_mode_json
from .recipes import RecipeError, load_recipe
from .uq import read_report_jsonl


class UsageError(Exception):
    """Semantically invalid invocation; reported with exit code 2."""


def _resolve_out(path) -> str:
    """Relative output paths land in QIPF_OUTPUT_DIR when it is set."""
    base = os.environ.get("QIPF_OUTPUT_DIR")
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _require(args, names, kind):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        flags = ", ".join("--" + n for n in missing)
        raise UsageError(f"generate {kind} requires {flags}")


def cmd_generate(args) -> int:
    out = _resolve_out(args.out)
    kind = args.kind
    if kind == "sine":
        _require(args, ["freqs", "fs", "n"], kind)
        freqs = [float(v) for v in str(args.freqs).split(",")]
        signal = datasets.gen_sine(freqs, args.fs, args.n)
        tableio.write_signal_csv(signal, out)
        rows = signal.size
    elif kind == "lorenz":
        _require(args, ["n"], kind)
        signal = datasets.gen_lorenz(args.n, args.dt, args.component)
        tableio.write_signal_csv(signal, out)
        rows = signal.size
    elif kind == "xsinx":
        _require(args, ["n", "lo", "hi"], kind)
        series = datasets.gen_xsinx(args.n, args.lo, args.hi, args.seed)
        tableio.write_series_csv(series, out)
        rows = len(series)
    elif kind == "twosine":
        series = datasets.gen_twosine(args.n_left, args.n_right,
                                      args.noise_sd, args.seed)
        tableio.write_series_csv(series, out)
        rows = len(series)
    elif kind == "blobs":
        series = datasets.gen_blobs(args.n_per_class, spread=args.spread,
                                    seed=args.seed)
        tableio.write_series_csv(series, out)
        rows = len(series)
    else:
        raise UsageError(f"unknown generator '{kind}'")
    print(f"wrote {rows} rows to {out}")
    return 0


def cmd_decompose(args) -> int:
    if (args.grid is None) == (not args.timeseries):
        raise UsageError("exactly one of --grid or --timeseries is required")
    signal = tableio.read_signal_csv(args.data)
    config = ModeConfig(args.modes, args.sigma, args.psi_floor)
    t0 = time.perf_counter()
    if args.grid is not None:
        grid = pipelines.parse_grid(args.grid)
        mm = qipf_modes(signal, config, grid)
    else:
        mm = timeseries_qipf(signal, config, args.warmup)
    out = _resolve_out(args.out)
    stem, ext = os.path.splitext(out)
    csv_path = out if ext == ".csv" else out + ".csv"
    json_path = (stem if ext == ".csv" else out) + ".json"
    write_mode_csv(mm, csv_path)
    write_mode_json(mm, json_path)
    if args.plot:
        svgplot.write_svg(pipelines._mode_chart(mm, title="mode decomposition"),
                          _resolve_out(args.plot))
    print(f"decomposed {mm.num_points} points into {mm.num_modes} modes; "
          f"wrote {csv_path} and {json_path}")
    print(f"elapsed {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return 0


def _load_recipe_arg(args):
    recipe = load_recipe(args.recipe)
    out_dir = args.out_dir or _resolve_out(recipe.output_dir())
    os.makedirs(out_dir, exist_ok=True)
    return recipe, out_dir


def cmd_train(args) -> int:
    recipe, out_dir = _load_recipe_arg(args)
    t0 = time.perf_counter()
    result = pipelines.stage_train(recipe, out_dir)
    print(f"trained model written to {result['paths']['model']}")
    print(f"final loss {result['history'][-1]:.6g}")
    print(f"elapsed {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return 0


def cmd_uq(args) -> int:
    recipe, out_dir = _load_recipe_arg(args)
    t0 = time.perf_counter()
    result = pipelines.stage_uq(recipe, out_dir)
    for method, path in result["paths"].items():
        print(f"{method} report written to {path}")
    print(f"elapsed {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    recipe, out_dir = _load_recipe_arg(args)
    t0 = time.perf_counter()
    result = pipelines.run_recipe(recipe, out_dir)
    if recipe.pipeline == "calibration-table":
        print(f"qipf {result['qipf_cell']}")
        print(f"mc_dropout {result['mc_cell']}")
        print(f"table written to {result['paths']['table']}")
    elif recipe.pipeline == "classification-uq":
        print(f"qipf auc {result['qipf']['auc']:.3f}")
        print(f"mc auc {result['mc']['auc']:.3f}")
        print(f"accuracy {result['accuracy']:.3f}")
    elif recipe.pipeline == "regression-uq":
        print(f"qipf pearson {result['qipf']['pearson']:.3f}")
        print(f"mc pearson {result['mc']['pearson']:.3f}")
    elif recipe.pipeline == "dominance":
        print(f"dominance entropy {result['entropy']:.4f}")
    else:
        for path in result["paths"]:
            print(f"wrote {path}")
    print(f"elapsed {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    return 0


def _plot_mode_csv(header, data):
    d = sum(1 for h in header if h.startswith("x") and h[1:].isdigit())
    mode_cols = [i for i, h in enumerate(header) if h.startswith("mode")]
    x = data[:, 0]
    series = [pipelines._minmax(data[:, i]) for i in mode_cols]
    labels = [header[i] for i in mode_cols]
    dashed = [False] * len(mode_cols)
    if "ipf" in header:
        series.append(pipelines._minmax(data[:, header.index("ipf")]))
        labels.append("ipf")
        dashed.append(True)
    return svgplot.line_chart(x, series, labels, dashed,
                              title="mode decomposition")


def _plot_report(path):
    _, records = read_report_jsonl(path)
    agg = np.array([r["aggregate"] for r in records], dtype=np.float64)
    xs = [r.get("x") for r in records]
    if all(x is not None and len(x) == 1 for x in xs):
        x = np.array([v[0] for v in xs])
        order = np.argsort(x)
        return svgplot.line_chart(x[order], [agg[order]], ["uncertainty"],
                                  title="predictive uncertainty")
    idx = np.arange(agg.size, dtype=np.float64)
    return svgplot.line_chart(idx, [agg], ["uncertainty"],
                              title="predictive uncertainty")


def cmd_plot(args) -> int:
    path = args.input
    out = _resolve_out(args.out)
    if path.endswith(".jsonl"):
        svg = _plot_report(path)
    elif path.endswith(".json"):
        svg = pipelines._mode_chart(read_mode_json(path),
                                    title="mode decomposition")
    else:
        header, data = tableio.read_csv(path)
        if data.shape[0] < 2:
            raise ValueError(f"{path}: need at least two rows to plot")
        if any(h.startswith("mode") for h in header):
            svg = _plot_mode_csv(header, data)
        elif len(header) == 2:
            svg = svgplot.line_chart(data[:, 0], [data[:, 1]], [header[1]],
                                     title=f"{header[1]} against {header[0]}")
        else:
            raise ValueError(f"{path}: cannot infer a chart from "
                             f"{len(header)} columns")
    svgplot.write_svg(svg, out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qipf",
        description="kernel-field uncertainty decomposition toolkit")
    parser.add_argument("--json", action="store_true",
                        help="emit errors as JSON objects on stderr")
    sub = parser.add_subparsers(dest="command")

    g = sub.add_parser("generate", help="write a synthetic dataset CSV")
    g.add_argument("kind", choices=["sine", "lorenz", "xsinx", "twosine",
                                    "blobs"])
    g.add_argument("--freqs", help="comma-separated frequencies in Hz")
    g.add_argument("--fs", type=float, help="sampling rate in Hz")
    g.add_argument("--n", type=int, help="number of samples")
    g.add_argument("--lo", type=float, help="lower input bound")
    g.add_argument("--hi", type=float, help="upper input bound")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n-left", type=int, default=40)
    g.add_argument("--n-right", type=int, default=10)
    g.add_argument("--noise-sd", type=float, default=0.03)
    g.add_argument("--dt", type=float, default=0.01)
    g.add_argument("--component", default="x", choices=["x", "y", "z"])
    g.add_argument("--n-per-class", type=int, default=100)
    g.add_argument("--spread", type=float, default=1.0)
    g.add_argument("-o", "--out", required=True, help="output CSV path")
    g.set_defaults(func=cmd_generate)

    d = sub.add_parser("decompose",
                       help="extract uncertainty modes from a series CSV")
    d.add_argument("data", help="input CSV with a single value column")
    d.add_argument("--sigma", type=float, required=True)
    d.add_argument("--modes", type=int, required=True)
    d.add_argument("--grid", help="evaluation grid lo:hi:step")
    d.add_argument("--timeseries", action="store_true",
                   help="sample-by-sample decomposition over time")
    d.add_argument("--warmup", type=int, default=100,
                   help="samples before the first time-series evaluation")
    d.add_argument("--psi-floor", type=float, default=1e-12)
    d.add_argument("--plot", help="optional SVG chart path")
    d.add_argument("-o", "--out", required=True,
                   help="output prefix for .csv/.json")
    d.set_defaults(func=cmd_decompose)

    for name, func, helptext in (
            ("train", cmd_train, "train the model named by a recipe"),
            ("uq", cmd_uq, "score test data with a trained model"),
            ("evaluate", cmd_evaluate, "run a full experiment recipe")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("recipe", help="INI recipe file")
        p.add_argument("--out-dir", help="override the output directory")
        p.set_defaults(func=func)

    pl = sub.add_parser("plot", help="render a CSV/JSONL artifact as SVG")
    pl.add_argument("input", help="mode CSV/JSON, report JSONL, or 2-col CSV")
    pl.add_argument("-o", "--out", required=True, help="output SVG path")
    pl.set_defaults(func=cmd_plot)
    return parser


def _emit_error(json_mode, exc):
    if json_mode:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(payload), file=sys.stderr)
    else:
        print(f"error: {exc}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    if getattr(args, "func", None) is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        _emit_error(args.json, exc)
        return 2
    except (ValueError, RecipeError, ModelFormatError, TrainingError,
            OSError) as exc:
        _emit_error(args.json, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
