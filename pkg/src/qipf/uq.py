"""Predictive uncertainty for trained networks.

Two routes.  The surrogate route runs one deterministic pass per input,
builds a cross field between a hidden layer's scalar activations (or pooled
weights) and the output summary, and extracts Hermite modes from it; the
spread of those modes is the uncertainty.  The baseline route runs many
stochastic dropout passes and reports the moment-based predictive spread.
"""

import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .kernelfield import silverman_bandwidth
from .mlp import MlpModel, dropout_forward, forward_capture, validate_model
from .modes import ModeConfig, mode_ratios


@dataclass
class SurrogateConfig:
    """Cross-field surrogate parameters.

    layers selects hidden layers by index (None means all hidden layers).
    Each selected layer is decomposed once per bandwidth multiplier; the
    multiplier scales the rule-of-thumb bandwidth of the centers.  Mode
    values are averaged across multipliers and concatenated across layers
    before the spread is taken.
    """

    num_modes: int = 5
    multipliers: tuple = (20.0,)
    layers: tuple = None
    center_source: str = "activations"  # activations | pooled_weights
    pooling_window: int = 1
    eval_summary: str = "auto"  # auto | mean_pre | predicted_logit
    psi_floor: float = 1e-12
    e_mode: str = "batch"  # batch | running

    def validate(self, model: MlpModel):
        if self.num_modes < 1:
            raise ValueError("num_modes must be at least 1")
        if len(self.multipliers) == 0 or any(m <= 0 for m in self.multipliers):
            raise ValueError("multipliers must be positive")
        if self.center_source not in ("activations", "pooled_weights"):
            raise ValueError(f"unknown center source '{self.center_source}'")
        if self.eval_summary not in ("auto", "mean_pre", "predicted_logit"):
            raise ValueError(f"unknown eval summary '{self.eval_summary}'")
        if self.e_mode not in ("batch", "running"):
            raise ValueError(f"unknown offset mode '{self.e_mode}'")
        n_hidden = len(model.layers) - 1
        if self.center_source == "activations":
            if n_hidden < 1:
                raise ValueError("model has no hidden layers to read centers from")
            layers = tuple(range(n_hidden)) if self.layers is None \
                else tuple(int(i) for i in self.layers)
            for i in layers:
                if not 0 <= i < n_hidden:
                    raise ValueError(f"layer index {i} out of range")
        else:
            layers = (0,)  # pooled weights form a single center population
        if len(layers) == 0:
            raise ValueError("empty layer selection")
        if len(layers) * self.num_modes < 2:
            raise ValueError("needs at least two pooled mode values; "
                             "raise num_modes or select more layers")
        return layers


@dataclass
class UncertaintyRecord:
    """Per-test-point result: pooled mode vector and its spread.

    modes is zero-based within the record (its minimum is exactly 0);
    offset holds the subtracted baseline, so the raw pooled ratios are
    modes + offset.  The spread is unchanged by the shift.
    """

    index: int
    x: list
    prediction: list
    eval_point: float
    modes: np.ndarray
    aggregate: float
    near_node: int
    offset: float = 0.0


@dataclass
class UncertaintyReport:
    records: list
    metadata: dict
    # wall-clock accounting; kept out of every serialized form so outputs
    # stay byte-identical across runs
    timings: dict = field(default_factory=dict, compare=False)

    def aggregates(self) -> np.ndarray:
        return np.array([r.aggregate for r in self.records])

    def predictions(self) -> np.ndarray:
        return np.array([r.prediction for r in self.records])


def weight_centers(model: MlpModel, pooling_window: int, layers=None) -> np.ndarray:
    """Scalar center set from average-pooled network weights.

    Selected layers' weight matrices are flattened row-major, concatenated,
    and averaged over non-overlapping windows; a shorter tail window is
    averaged as-is.
    """
    validate_model(model)
    if isinstance(pooling_window, bool) or int(pooling_window) != pooling_window:
        raise ValueError("pooling window must be an integer")
    pooling_window = int(pooling_window)
    if pooling_window < 1:
        raise ValueError("pooling window must be at least 1")
    if layers is None:
        layers = range(len(model.layers))
    flat = np.concatenate([model.layers[i].weight.ravel() for i in layers])
    if pooling_window > flat.size:
        raise ValueError("pooling window exceeds the parameter count")
    n_full = flat.size // pooling_window
    pooled = flat[:n_full * pooling_window].reshape(n_full, pooling_window).mean(axis=1)
    tail = flat[n_full * pooling_window:]
    if tail.size:
        pooled = np.append(pooled, tail.mean())
    return pooled


def _summary_point(model, trace, cfg) -> float:
    """Scalar evaluation point of the cross field.

    auto resolves to the mean last-layer pre-activation for regression and
    to the predicted-class pre-softmax value for classification.
    """
    mode = cfg.eval_summary
    if mode == "auto":
        mode = ("predicted_logit" if model.output_mode == "classification"
                else "mean_pre")
    if mode == "mean_pre":
        return float(np.mean(trace.last_pre))
    return float(trace.last_pre[int(np.argmax(trace.last_pre))])


class CrossQipfEvaluator:
    """Streaming surrogate evaluator.

    Each call to evaluate() costs exactly one deterministic forward pass.
    Record mode vectors are zero-based within each record; a global offset
    would let one near-node point contaminate the spread of every other
    record, so the per-slot eigenvalue offsets (running minima of the raw
    ratios) are tracked separately and reported as run metadata.
    """

    def __init__(self, model: MlpModel, cfg: SurrogateConfig):
        validate_model(model)
        self.model = model
        self.cfg = cfg
        self.layer_ids = cfg.validate(model)
        if cfg.center_source == "pooled_weights":
            self._weight_pool = weight_centers(model, cfg.pooling_window,
                                               cfg.layers)
        else:
            self._weight_pool = None
        self._run_min = None
        self._count = 0

    def _center_sets(self, trace):
        if self._weight_pool is not None:
            return [self._weight_pool]
        return [trace.hidden[i] for i in self.layer_ids]

    def ratios(self, x):
        """Raw mode ratios for one input.

        Returns (r, near, l2, prediction) with r shaped
        (layers, multipliers, num_modes).
        """
        cfg = self.cfg
        output, trace = forward_capture(self.model, x)
        l2 = _summary_point(self.model, trace, cfg)
        shape = (len(self.layer_ids), len(cfg.multipliers), cfg.num_modes)
        r = np.empty(shape)
        near = np.zeros(shape, dtype=bool)
        for a, centers in enumerate(self._center_sets(trace)):
            centers = np.asarray(centers, dtype=np.float64)
            if centers.size < 2 or np.std(centers, ddof=1) == 0.0:
                name = ("pooled weights" if self._weight_pool is not None
                        else f"layer {self.layer_ids[a]}")
                raise ValueError(f"degenerate centers for {name}: zero variance")
            base = silverman_bandwidth(centers)
            for b, mult in enumerate(cfg.multipliers):
                mc = ModeConfig(cfg.num_modes, float(mult) * base, cfg.psi_floor)
                rk, nn, _, _ = mode_ratios(centers, mc, [[l2]])
                r[a, b, :] = rk[:, 0]
                near[a, b, :] = nn[:, 0]
        return r, near, l2, output

    def evaluate(self, x) -> UncertaintyRecord:
        r, near, l2, output = self.ratios(x)
        self._run_min = r if self._run_min is None \
            else np.minimum(self._run_min, r)
        record = self._make_record(self._count, x, r, near, l2, output)
        self._count += 1
        return record

    def eigenvalues(self) -> np.ndarray:
        """Per-slot offsets -min(ratios) over the points seen so far."""
        if self._run_min is None:
            raise ValueError("no points evaluated yet")
        return -self._pool(self._run_min)

    @staticmethod
    def _pool(values):
        """Average over multipliers, then concatenate layers."""
        return values.mean(axis=1).reshape(-1)

    def _make_record(self, index, x, r, near, l2, output):
        pooled = self._pool(r)
        base = float(pooled.min())
        return UncertaintyRecord(
            index=index,
            x=[float(v) for v in np.atleast_1d(x)],
            prediction=[float(v) for v in np.atleast_1d(output)],
            eval_point=l2,
            modes=pooled - base,
            aggregate=float(np.std(pooled)),
            near_node=int(near.sum()),
            offset=base,
        )


def cross_qipf_uncertainty(model: MlpModel, x, cfg: SurrogateConfig,
                           evaluator: CrossQipfEvaluator = None):
    """One surrogate evaluation; see CrossQipfEvaluator for the streaming
    offset semantics.  Passing an evaluator carries state across calls."""
    if evaluator is None:
        evaluator = CrossQipfEvaluator(model, cfg)
    return evaluator.evaluate(x)


def cross_qipf_report(model: MlpModel, test_inputs, cfg: SurrogateConfig) -> UncertaintyReport:
    """Surrogate uncertainty over a test set, one forward pass per point.

    Records are identical under both offset modes; e_mode only selects how
    the reported per-slot eigenvalues are taken ("batch": minimum over the
    whole set, "running": causal minimum, same final value).
    """
    test_inputs = np.asarray(test_inputs, dtype=np.float64)
    if test_inputs.ndim == 1:
        test_inputs = test_inputs[:, None]
    if test_inputs.shape[0] < 1:
        raise ValueError("empty test set")
    evaluator = CrossQipfEvaluator(model, cfg)
    t0 = time.perf_counter()
    records = [evaluator.evaluate(x) for x in test_inputs]
    elapsed = time.perf_counter() - t0
    metadata = {
        "method": "cross-qipf",
        "num_points": int(test_inputs.shape[0]),
        "num_modes": int(cfg.num_modes),
        "multipliers": [float(m) for m in cfg.multipliers],
        "layers": [int(i) for i in evaluator.layer_ids],
        "center_source": cfg.center_source,
        "eval_summary": cfg.eval_summary,
        "e_mode": cfg.e_mode,
        "eigenvalues": [float(e) for e in evaluator.eigenvalues()],
    }
    timings = {"total_s": elapsed,
               "per_point_s": elapsed / test_inputs.shape[0]}
    return UncertaintyReport(records, metadata, timings)


def mc_dropout_uncertainty(model: MlpModel, x, passes, rate, tau=1e-2,
                           rng=None):
    """Moment-based predictive mean and std from stochastic passes.

    Per output dimension: variance = 1/tau + mean(y^2) - mean(y)^2 over
    the sampled passes; the inverse-precision term is the aleatoric floor.
    """
    if isinstance(passes, bool) or int(passes) != passes or passes < 2:
        raise ValueError("needs at least two stochastic passes")
    if not (0.0 <= rate < 1.0):
        raise ValueError("dropout rate must lie in [0, 1)")
    if rate == 0.0:
        warnings.warn("dropout rate 0 gives zero epistemic spread",
                      stacklevel=2)
    if tau <= 0:
        raise ValueError("tau must be positive")
    if rng is None:
        rng = np.random.default_rng(0)
    outs = np.stack([dropout_forward(model, x, rate, rng)
                     for _ in range(int(passes))])
    mean = outs.mean(axis=0)
    epistemic = np.maximum(np.mean(outs * outs, axis=0) - mean * mean, 0.0)
    std = np.sqrt(1.0 / tau + epistemic)
    return mean, std


def mc_dropout_report(model: MlpModel, test_inputs, passes, rate, tau=1e-2,
                      seed=0) -> UncertaintyReport:
    """Dropout-baseline uncertainty over a test set, passes runs per point.

    The record's modes field holds the per-dimension predictive std; the
    aggregate is its mean across output dimensions.
    """
    test_inputs = np.asarray(test_inputs, dtype=np.float64)
    if test_inputs.ndim == 1:
        test_inputs = test_inputs[:, None]
    if test_inputs.shape[0] < 1:
        raise ValueError("empty test set")
    validate_model(model)
    rng = np.random.default_rng(seed)
    records = []
    t0 = time.perf_counter()
    for i, x in enumerate(test_inputs):
        mean, std = mc_dropout_uncertainty(model, x, passes, rate, tau, rng)
        records.append(UncertaintyRecord(
            index=i,
            x=[float(v) for v in np.atleast_1d(x)],
            prediction=[float(v) for v in mean],
            eval_point=float("nan"),
            modes=std,
            aggregate=float(np.mean(std)),
            near_node=0,
        ))
    elapsed = time.perf_counter() - t0
    metadata = {"method": "mc-dropout", "num_points": int(test_inputs.shape[0]),
                "passes": int(passes), "rate": float(rate), "tau": float(tau),
                "seed": int(seed)}
    timings = {"total_s": elapsed,
               "per_point_s": elapsed / test_inputs.shape[0]}
    return UncertaintyReport(records, metadata, timings)


def record_to_dict(record: UncertaintyRecord) -> dict:
    d = {
        "index": record.index,
        "x": record.x,
        "prediction": record.prediction,
        "eval_point": record.eval_point,
        "modes": [float(v) for v in record.modes],
        "aggregate": record.aggregate,
        "near_node": record.near_node,
        "offset": record.offset,
    }
    if not np.isfinite(record.eval_point):
        d["eval_point"] = None
    return d


def write_report_jsonl(report: UncertaintyReport, path):
    """One JSON object per test point; metadata line first, timings omitted."""
    with open(path, "w") as fh:
        fh.write(json.dumps({"metadata": report.metadata}) + "\n")
        for record in report.records:
            fh.write(json.dumps(record_to_dict(record)) + "\n")


def read_report_jsonl(path):
    """Returns (metadata, list of record dicts)."""
    metadata = {}
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"not a report file: {exc}") from exc
            if "metadata" in obj and not records and not metadata:
                metadata = obj["metadata"]
            else:
                records.append(obj)
    if not records:
        raise ValueError("report holds no records")
    return metadata, records


def write_report_csv(report: UncertaintyReport, path):
    """Summary table: index, aggregate, near-node count, mode columns."""
    import csv

    n_modes = len(report.records[0].modes) if report.records else 0
    header = ["index", "aggregate", "near_node"]
    header += [f"mode{j + 1}" for j in range(n_modes)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in report.records:
            row = [str(r.index), repr(float(r.aggregate)), str(r.near_node)]
            row += [repr(float(v)) for v in r.modes]
            writer.writerow(row)
