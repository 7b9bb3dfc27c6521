"""Recipe-driven experiment pipelines.

Each runner consumes a parsed Recipe, writes its artifacts under the output
directory, and returns an in-memory summary so tests can assert on results
without re-reading files.  Runners are deterministic: all randomness flows
from seeds named in the recipe.
"""

import os

import numpy as np

from . import datasets, metrics, svgplot, tableio
from .mlp import MlpModel, TrainConfig, init_mlp, load_model, save_model, train
from .modes import (ModeConfig, dominance_histogram, qipf_modes,
                    timeseries_qipf, write_mode_csv, write_mode_json)
from .recipes import Recipe, RecipeError
from .uq import (SurrogateConfig, cross_qipf_report, mc_dropout_report,
                 write_report_csv, write_report_jsonl)


def parse_grid(text) -> np.ndarray:
    """'lo:hi:step' to an inclusive, evenly spaced grid."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be lo:hi:step, got '{text}'")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"grid must be numeric lo:hi:step, got '{text}'") from None
    if step <= 0:
        raise ValueError("grid step must be positive")
    if hi <= lo:
        raise ValueError("grid upper bound must exceed the lower bound")
    count = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, count)


def _pearson(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.std() == 0.0 or b.std() == 0.0:
        return 0.0
    return float(np.corrcoef(a, b)[0, 1])


# -- data loading ------------------------------------------------------


def load_signal(recipe: Recipe) -> np.ndarray:
    kind = recipe.get_choice("data", "kind", ("sine", "lorenz", "csv"))
    if kind == "sine":
        return datasets.gen_sine(
            recipe.get_floats("data", "freqs", "50"),
            recipe.get_float("data", "fs", 6000.0, positive=True),
            recipe.get_int("data", "n", 3000, minimum=2),
        )
    if kind == "lorenz":
        return datasets.gen_lorenz(
            recipe.get_int("data", "n", 3000, minimum=2),
            recipe.get_float("data", "dt", 0.01, positive=True),
            recipe.get("data", "component", "x"),
        )
    return tableio.read_signal_csv(recipe.get("data", "source"))


def _series_from_keys(recipe: Recipe, kind, prefix="") -> datasets.LabeledSeries:
    if kind == "xsinx":
        return datasets.gen_xsinx(
            recipe.get_int("data", prefix + "n", minimum=1),
            recipe.get_float("data", prefix + "lo"),
            recipe.get_float("data", prefix + "hi"),
            recipe.get_int("data", prefix + "seed", 0),
        )
    if kind == "twosine":
        return datasets.gen_twosine(
            recipe.get_int("data", prefix + "n_left", 40, minimum=0),
            recipe.get_int("data", prefix + "n_right", 10, minimum=0),
            recipe.get_float("data", prefix + "noise_sd", 0.03),
            recipe.get_int("data", prefix + "seed", 0),
        )
    if kind == "blobs":
        return datasets.gen_blobs(
            recipe.get_int("data", prefix + "n_per_class", 100, minimum=1),
            spread=recipe.get_float("data", prefix + "spread", 1.0,
                                    positive=True),
            seed=recipe.get_int("data", prefix + "seed", 0),
        )
    if kind == "csv":
        return tableio.read_series_csv(recipe.get("data", prefix + "source"))
    raise RecipeError(f"data.{prefix}kind: unknown generator '{kind}'")


def load_train_series(recipe: Recipe) -> datasets.LabeledSeries:
    kind = recipe.get("data", "kind", "csv" if recipe.has("data", "source")
                      else None)
    return _series_from_keys(recipe, kind)


def load_test_series(recipe: Recipe) -> datasets.LabeledSeries:
    kind = recipe.get("data", "test_kind", recipe.get("data", "kind"))
    if recipe.has("data", "test_source"):
        return tableio.read_series_csv(recipe.get("data", "test_source"))
    return _series_from_keys(recipe, kind, prefix="test_")


# -- model construction and training -----------------------------------


def _train_config(recipe: Recipe) -> TrainConfig:
    return TrainConfig(
        epochs=recipe.get_int("train", "epochs", minimum=1),
        batch_size=recipe.get_int("train", "batch_size", 0, minimum=0),
        learning_rate=recipe.get_float("train", "lr", 1e-3, positive=True),
        dropout_rate=recipe.get_float("train", "dropout", 0.0),
        seed=recipe.get_int("train", "seed", 0),
    )


def build_model(recipe: Recipe, in_width, out_width, output_mode) -> MlpModel:
    hidden = recipe.get_ints("model", "hidden")
    if any(h < 1 for h in hidden):
        raise RecipeError("model.hidden: widths must be positive")
    return init_mlp([in_width, *hidden, out_width], output_mode,
                    seed=recipe.get_int("model", "seed", 0))


def train_from_recipe(recipe: Recipe, out_dir, series, output_mode,
                      out_width=None):
    """Train per the [model]/[train] sections; writes model.json, loss.csv."""
    if output_mode == "classification":
        labels = series.targets.ravel().astype(int)
        out_width = int(labels.max()) + 1
        targets = labels
    else:
        out_width = series.targets.shape[1] if out_width is None else out_width
        targets = series.targets
    model = build_model(recipe, series.inputs.shape[1], out_width, output_mode)
    trained, history = train(model, series.inputs, targets,
                             _train_config(recipe))
    model_path = os.path.join(out_dir, "model.json")
    save_model(trained, model_path)
    tableio.write_csv(os.path.join(out_dir, "loss.csv"), ["epoch", "loss"],
                      [(i, v) for i, v in enumerate(history)])
    return trained, history, model_path


def surrogate_config(recipe: Recipe) -> SurrogateConfig:
    layers_raw = recipe.get("uq", "layers", "all")
    layers = None if layers_raw == "all" else \
        tuple(int(v) for v in layers_raw.split(","))
    return SurrogateConfig(
        num_modes=recipe.get_int("uq", "modes", 5, minimum=1),
        multipliers=recipe.get_floats("uq", "multipliers", "20"),
        layers=layers,
        center_source=recipe.get_choice(
            "uq", "source", ("activations", "pooled_weights"), "activations"),
        pooling_window=recipe.get_int("uq", "window", 1, minimum=1),
        eval_summary=recipe.get_choice(
            "uq", "summary", ("auto", "mean_pre", "predicted_logit"), "auto"),
        e_mode=recipe.get_choice("uq", "e_mode", ("batch", "running"), "batch"),
    )


def _mc_args(recipe: Recipe) -> dict:
    return {
        "passes": recipe.get_int("mc", "passes", 100, minimum=2),
        "rate": recipe.get_float("mc", "rate", 0.2),
        "tau": recipe.get_float("mc", "tau", 0.01, positive=True),
        "seed": recipe.get_int("mc", "seed", 0),
    }


# -- pipeline runners ---------------------------------------------------


def run_grid_study(recipe: Recipe, out_dir) -> dict:
    """Decompose a signal's sample distribution over a fixed grid, one
    mode matrix per kernel width."""
    signal = load_signal(recipe)
    grid = parse_grid(recipe.get("decompose", "grid", "-6:6:0.1"))
    sigmas = recipe.get_floats("decompose", "sigmas", "0.6,1.2")
    k = recipe.get_int("decompose", "modes", 6, minimum=1)
    matrices = {}
    paths = []
    dom_rows = []
    for sigma in sigmas:
        mm = qipf_modes(signal, ModeConfig(k, sigma), grid)
        matrices[sigma] = mm
        tag = f"sigma{sigma:g}".replace(".", "p")
        base = os.path.join(out_dir, f"modes_{tag}")
        write_mode_csv(mm, base + ".csv")
        write_mode_json(mm, base + ".json")
        svg = _mode_chart(mm, title=f"mode decomposition, sigma={sigma:g}")
        svgplot.write_svg(svg, base + ".svg")
        paths += [base + ".csv", base + ".json", base + ".svg"]
        for mode_i, count in enumerate(dominance_histogram(mm)):
            dom_rows.append((sigma, mode_i + 1, int(count)))
    dom_path = os.path.join(out_dir, "dominance.csv")
    tableio.write_csv(dom_path, ["sigma", "mode", "count"], dom_rows)
    paths.append(dom_path)
    return {"matrices": matrices, "paths": paths}


def _minmax(row):
    lo, hi = row.min(), row.max()
    if hi > lo:
        return (row - lo) / (hi - lo)
    return np.zeros_like(row)


def _mode_chart(mm, title="") -> str:
    """Fixed-style chart: min-max normalized modes plus the dashed IPF.

    Normalization here is cosmetic only and never leaks into stored data.
    """
    x = mm.eval_points[:, 0]
    series = [_minmax(mm.values[k]) for k in range(mm.num_modes)]
    series.append(_minmax(mm.ipf))
    labels = [f"mode {k + 1}" for k in range(mm.num_modes)] + ["ipf"]
    dashed = [False] * mm.num_modes + [True]
    return svgplot.line_chart(x, series, labels, dashed, title=title)


def run_dominance(recipe: Recipe, out_dir) -> dict:
    """Sample-by-sample decomposition of a series; dominance histogram."""
    signal = load_signal(recipe)
    k = recipe.get_int("decompose", "modes", 10, minimum=1)
    sigma = recipe.get_float("decompose", "sigma", 1.2, positive=True)
    warmup = recipe.get_int("decompose", "warmup", 100, minimum=2)
    name = recipe.get("decompose", "name", recipe.get("data", "kind", "signal"))
    mm = timeseries_qipf(signal, ModeConfig(k, sigma), warmup)
    counts = dominance_histogram(mm)
    entropy = metrics.dominance_entropy(counts)
    base = os.path.join(out_dir, "modes")
    write_mode_csv(mm, base + ".csv")
    write_mode_json(mm, base + ".json")
    dom_path = os.path.join(out_dir, "dominance.csv")
    tableio.write_csv(dom_path, ["mode", "count"],
                      [(i + 1, int(c)) for i, c in enumerate(counts)])
    summary_path = os.path.join(out_dir, "summary.csv")
    tableio.write_csv(summary_path, ["signal", "entropy", "top_mode"],
                      [(name, entropy, int(np.argmax(counts)) + 1)])
    return {"matrix": mm, "counts": counts, "entropy": entropy,
            "paths": [base + ".csv", base + ".json", dom_path, summary_path]}


def _normalized_split(train_series, test_series, normalize):
    """Optionally z-normalize inputs and targets with train statistics."""
    if not normalize:
        return (train_series.inputs, train_series.targets,
                test_series.inputs, test_series.targets)
    xin, x_mean, x_std = datasets.znormalize(train_series.inputs)
    yin, y_mean, y_std = datasets.znormalize(train_series.targets)
    xte = datasets.apply_znorm(test_series.inputs, x_mean, x_std)
    yte = datasets.apply_znorm(test_series.targets, y_mean, y_std)
    return xin, yin, xte, yte


def run_regression_uq(recipe: Recipe, out_dir) -> dict:
    """Train a regressor, then score test-point uncertainty both ways."""
    train_series = load_train_series(recipe)
    test_series = load_test_series(recipe)
    normalize = recipe.get_bool("data", "normalize", False)
    xtr, ytr, xte, yte = _normalized_split(train_series, test_series,
                                           normalize)
    fit_series = datasets.LabeledSeries(xtr, np.asarray(ytr), {})
    model, history, model_path = train_from_recipe(recipe, out_dir,
                                                   fit_series, "regression")
    q_report = cross_qipf_report(model, xte, surrogate_config(recipe))
    mc_report = mc_dropout_report(model, xte, **_mc_args(recipe))
    abs_err = np.abs(q_report.predictions() - np.asarray(yte)).mean(axis=1)
    paths = {"model": model_path}
    for tag, report in (("qipf", q_report), ("mc", mc_report)):
        jb = os.path.join(out_dir, f"{tag}_report.jsonl")
        cb = os.path.join(out_dir, f"{tag}_report.csv")
        write_report_jsonl(report, jb)
        write_report_csv(report, cb)
        paths[tag] = jb
    rows = []
    summary = {}
    for tag, report in (("qipf", q_report), ("mc", mc_report)):
        agg = report.aggregates()
        rows.append((tag, _pearson(agg, abs_err),
                     metrics.calibration_rmse(agg, abs_err)))
        summary[tag] = {"pearson": rows[-1][1], "rmse": rows[-1][2],
                        "aggregates": agg, "report": report}
    summary_path = os.path.join(out_dir, "summary.csv")
    tableio.write_csv(summary_path, ["method", "pearson", "calibration_rmse"],
                      rows)
    order = np.argsort(xte[:, 0])
    svg = svgplot.line_chart(
        xte[order, 0],
        [_minmax(abs_err[order]), _minmax(q_report.aggregates()[order]),
         _minmax(mc_report.aggregates()[order])],
        ["abs error", "cross-field modes", "dropout baseline"],
        dashed=[True, False, False],
        title="test error against predictive uncertainty")
    svg_path = os.path.join(out_dir, "uncertainty.svg")
    svgplot.write_svg(svg, svg_path)
    summary["abs_err"] = abs_err
    summary["inputs"] = xte
    summary["paths"] = paths
    summary["history"] = history
    return summary


def run_classification_uq(recipe: Recipe, out_dir) -> dict:
    """Train a classifier; score misclassification detection both ways."""
    train_series = load_train_series(recipe)
    test_series = load_test_series(recipe)
    normalize = recipe.get_bool("data", "normalize", True)
    if normalize:
        xtr, x_mean, x_std = datasets.znormalize(train_series.inputs)
        xte = datasets.apply_znorm(test_series.inputs, x_mean, x_std)
    else:
        xtr, xte = train_series.inputs, test_series.inputs
    fit_series = datasets.LabeledSeries(xtr, train_series.targets, {})
    model, history, model_path = train_from_recipe(recipe, out_dir,
                                                   fit_series,
                                                   "classification")
    true_labels = test_series.targets.ravel().astype(int)
    q_report = cross_qipf_report(model, xte, surrogate_config(recipe))
    mc_report = mc_dropout_report(model, xte, **_mc_args(recipe))
    pred_labels = np.argmax(q_report.predictions(), axis=1)
    wrong = (pred_labels != true_labels).astype(int)
    summary = {"accuracy": float(1.0 - wrong.mean()), "wrong": wrong,
               "history": history, "paths": {"model": model_path}}
    rows = []
    curves = []
    for tag, report in (("qipf", q_report), ("mc", mc_report)):
        jb = os.path.join(out_dir, f"{tag}_report.jsonl")
        write_report_jsonl(report, jb)
        summary["paths"][tag] = jb
        curve = metrics.roc_auc(report.aggregates(), wrong)
        tableio.write_csv(os.path.join(out_dir, f"{tag}_roc.csv"),
                          ["fpr", "tpr"], np.column_stack([curve.fpr,
                                                           curve.tpr]))
        label = "cross-field modes" if tag == "qipf" else "dropout baseline"
        curves.append((curve.fpr, curve.tpr, label, curve.auc))
        rows.append((tag, curve.auc, summary["accuracy"]))
        summary[tag] = {"auc": curve.auc, "curve": curve, "report": report}
    tableio.write_csv(os.path.join(out_dir, "summary.csv"),
                      ["method", "auc", "accuracy"], rows)
    svg_path = os.path.join(out_dir, "roc.svg")
    svgplot.write_svg(svgplot.roc_chart(curves,
                                        title="misclassification detection"),
                      svg_path)
    summary["paths"]["roc"] = svg_path
    return summary


def run_calibration_table(recipe: Recipe, out_dir) -> dict:
    """Repeated-split calibration study in the mean +- std table layout."""
    series = load_train_series(recipe)
    n = len(series)
    n_splits = recipe.get_int("splits", "count", 20, minimum=1)
    fraction = recipe.get_float("splits", "fraction", 0.1)
    base_seed = recipe.get_int("splits", "seed", 1)
    splits = datasets.split_k(n, n_splits, fraction, base_seed)
    cfg = surrogate_config(recipe)
    mc = _mc_args(recipe)
    split_rows = []
    q_vals, mc_vals = [], []
    for si, (tr_idx, te_idx) in enumerate(splits):
        tr = datasets.LabeledSeries(series.inputs[tr_idx],
                                    series.targets[tr_idx], {})
        te = datasets.LabeledSeries(series.inputs[te_idx],
                                    series.targets[te_idx], {})
        xtr, ytr, xte, yte = _normalized_split(tr, te, True)
        model = build_model(recipe, xtr.shape[1], ytr.shape[1], "regression")
        tc = _train_config(recipe)
        tc.seed = tc.seed + si  # fresh optimization noise per split
        trained, _ = train(model, xtr, ytr, tc)
        q_report = cross_qipf_report(trained, xte, cfg)
        mc_report = mc_dropout_report(trained, xte, passes=mc["passes"],
                                      rate=mc["rate"], tau=mc["tau"],
                                      seed=mc["seed"] + si)
        abs_err = np.abs(q_report.predictions() - np.asarray(yte)).mean(axis=1)
        q_rmse = metrics.calibration_rmse(q_report.aggregates(), abs_err)
        mc_rmse = metrics.calibration_rmse(mc_report.aggregates(), abs_err)
        q_vals.append(q_rmse)
        mc_vals.append(mc_rmse)
        split_rows.append((si, q_rmse, mc_rmse))
    tableio.write_csv(os.path.join(out_dir, "splits.csv"),
                      ["split", "qipf_rmse", "mc_rmse"], split_rows)
    name = recipe.get("table", "dataset", recipe.get("data", "kind", "data"))
    q_cell = f"{np.mean(q_vals):.3f} +- {np.std(q_vals):.3f}"
    mc_cell = f"{np.mean(mc_vals):.3f} +- {np.std(mc_vals):.3f}"
    table_path = os.path.join(out_dir, "table.csv")
    tableio.write_csv(table_path, ["dataset", "n", "q", "mc_dropout", "qipf"],
                      [(name, n, cfg.num_modes, mc_cell, q_cell)])
    return {"qipf_rmse": np.array(q_vals), "mc_rmse": np.array(mc_vals),
            "qipf_cell": q_cell, "mc_cell": mc_cell,
            "paths": {"table": table_path}}


RUNNERS = {
    "grid-study": run_grid_study,
    "dominance": run_dominance,
    "regression-uq": run_regression_uq,
    "classification-uq": run_classification_uq,
    "calibration-table": run_calibration_table,
}


def run_recipe(recipe: Recipe, out_dir=None) -> dict:
    out_dir = recipe.output_dir(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    return RUNNERS[recipe.pipeline](recipe, out_dir)


# -- staged commands (train/uq split out of the full pipelines) ---------


def _model_pipeline(recipe: Recipe) -> str:
    if recipe.pipeline == "classification-uq":
        return "classification"
    if recipe.pipeline in ("regression-uq", "calibration-table"):
        return "regression"
    raise RecipeError("experiment.pipeline: the train/uq stages apply to "
                      "regression-uq, classification-uq, or calibration-table")


def _prepared_data(recipe: Recipe, output_mode):
    """Train/test arrays with the pipeline's normalization convention."""
    train_series = load_train_series(recipe)
    test_series = load_test_series(recipe)
    if output_mode == "classification":
        normalize = recipe.get_bool("data", "normalize", True)
        if normalize:
            xtr, x_mean, x_std = datasets.znormalize(train_series.inputs)
            xte = datasets.apply_znorm(test_series.inputs, x_mean, x_std)
        else:
            xtr, xte = train_series.inputs, test_series.inputs
        return xtr, train_series.targets, xte, test_series.targets
    normalize = recipe.get_bool("data", "normalize", False)
    return _normalized_split(train_series, test_series, normalize)


def stage_train(recipe: Recipe, out_dir) -> dict:
    """Train the recipe's model on its training data; no UQ."""
    output_mode = _model_pipeline(recipe)
    xtr, ytr, _, _ = _prepared_data(recipe, output_mode)
    fit_series = datasets.LabeledSeries(xtr, np.asarray(ytr), {})
    model, history, model_path = train_from_recipe(recipe, out_dir,
                                                   fit_series, output_mode)
    return {"model": model, "history": history,
            "paths": {"model": model_path,
                      "loss": os.path.join(out_dir, "loss.csv")}}


def stage_uq(recipe: Recipe, out_dir) -> dict:
    """Score the recipe's test data with a previously trained model."""
    output_mode = _model_pipeline(recipe)
    model_path = recipe.get("uq", "model",
                            os.path.join(out_dir, "model.json"))
    if not os.path.exists(model_path):
        raise RecipeError(f"uq.model: no model file at {model_path}; "
                          "run the train stage first")
    model = load_model(model_path)
    _, _, xte, _ = _prepared_data(recipe, output_mode)
    methods = recipe.get("uq", "methods", "qipf,mc").split(",")
    paths = {}
    reports = {}
    for method in methods:
        method = method.strip()
        if method == "qipf":
            report = cross_qipf_report(model, xte, surrogate_config(recipe))
        elif method == "mc":
            report = mc_dropout_report(model, xte, **_mc_args(recipe))
        else:
            raise RecipeError(f"uq.methods: unknown method '{method}'")
        jb = os.path.join(out_dir, f"{method}_report.jsonl")
        cb = os.path.join(out_dir, f"{method}_report.csv")
        write_report_jsonl(report, jb)
        write_report_csv(report, cb)
        paths[method] = jb
        reports[method] = report
    return {"reports": reports, "paths": paths}
