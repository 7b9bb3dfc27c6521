"""Schrodinger-form decomposition of kernel fields into uncertainty modes.

The base potential solves E = (sigma^2/2) lap(psi)/psi with psi = sqrt(IPF)
and is offset so its minimum over the evaluated set is zero.  Higher-order
modes replace psi by the normalized Hermite projection H*_k(psi); the
composed Laplacian follows from the chain rule, no finite differences.
Mode indexing starts at k = 1 because H*_0 is constant and its potential is
identically zero.
"""

import csv
import json
from dataclasses import dataclass

import numpy as np

from . import hermite
from .kernelfield import as_sample_set, _check_sigma, wavefunction_field


@dataclass
class ModeConfig:
    """Decomposition parameters: mode count, kernel width, denominator floor."""

    num_modes: int
    sigma: float
    psi_floor: float = 1e-12

    def validate(self):
        if isinstance(self.num_modes, bool) or int(self.num_modes) != self.num_modes:
            raise ValueError("num_modes must be an integer")
        if self.num_modes < 1:
            raise ValueError("num_modes must be at least 1")
        if self.num_modes > hermite.MAX_ORDER:
            raise ValueError(f"num_modes exceeds the order bound {hermite.MAX_ORDER}")
        _check_sigma(self.sigma)
        if not (float(self.psi_floor) > 0.0 and np.isfinite(self.psi_floor)):
            raise ValueError("psi_floor must be a positive finite real")


@dataclass
class ModeMatrix:
    """K x P mode values over P evaluation points.

    values[k-1] holds V^k = E_k + r_k with per-mode minimum zero; ratios
    keeps the raw r_k so offsets can be recomputed under other conventions.
    near_node marks points whose projected denominator was clamped at the
    floor; far_field marks points where the IPF itself underflowed.
    """

    values: np.ndarray
    eigenvalues: np.ndarray
    eval_points: np.ndarray
    ratios: np.ndarray
    near_node: np.ndarray
    far_field: np.ndarray
    ipf: np.ndarray

    @property
    def num_modes(self):
        return self.values.shape[0]

    @property
    def num_points(self):
        return self.values.shape[1]


def mode_ratios(centers, config: ModeConfig, eval_points):
    """Raw mode ratios r_k(x) = (sigma^2/2) lap(H*_k(psi)) / H*_k(psi).

    Returns (ratios (K, P), near_node (K, P), far_field (P,), ipf (P,)).
    Denominators inside (-psi_floor, psi_floor) are clamped to the floor
    with their sign kept (zero counts as positive) and flagged near-node.
    """
    config.validate()
    centers = as_sample_set(centers)
    eval_points = as_sample_set(eval_points)
    if eval_points.shape[1] != centers.shape[1]:
        raise ValueError("centers and evaluation points disagree on dimension")
    psi, grad, lap, far = wavefunction_field(centers, config.sigma, eval_points)
    gsq = np.einsum("pd,pd->p", grad, grad)
    half_s2 = 0.5 * config.sigma * config.sigma
    k_count = config.num_modes
    p_count = eval_points.shape[0]
    ratios = np.empty((k_count, p_count))
    near = np.zeros((k_count, p_count), dtype=bool)
    for k in range(1, k_count + 1):
        hk, hk1, hk2 = hermite.normalized_hermite_derivs(k, psi)
        lap_k = hk2 * gsq + hk1 * lap
        small = np.abs(hk) < config.psi_floor
        if small.any():
            sign = np.where(hk >= 0.0, 1.0, -1.0)
            hk = np.where(small, sign * config.psi_floor, hk)
        ratios[k - 1] = half_s2 * lap_k / hk
        near[k - 1] = small
    return ratios, near, far, psi * psi


def qipf_modes(centers, config: ModeConfig, eval_points) -> ModeMatrix:
    """Decompose the field over an evaluation set.

    E_k = -min_p r_k(p) over the supplied points, so every mode attains
    zero somewhere on the set.  Needs P >= 2 for the minimum to mean
    anything.
    """
    eval_points = as_sample_set(eval_points)
    if eval_points.shape[0] < 2:
        raise ValueError("need at least two evaluation points")
    ratios, near, far, pvals = mode_ratios(centers, config, eval_points)
    eigenvalues = -ratios.min(axis=1)
    values = ratios + eigenvalues[:, None]
    return ModeMatrix(values, eigenvalues, eval_points, ratios, near, far, pvals)


def timeseries_qipf(signal, config: ModeConfig, warmup: int) -> ModeMatrix:
    """Sample-by-sample decomposition of an ordered scalar series.

    At each t >= warmup the field is built from all previous samples and
    evaluated at x_t.  The offset uses the running minimum of r_k over the
    samples seen so far, keeping the decomposition causal; the eigenvalues
    field records the final offsets.
    """
    config.validate()
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("signal must be an ordered scalar series")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite samples")
    if isinstance(warmup, bool) or int(warmup) != warmup or warmup < 2:
        raise ValueError("warmup must be an integer >= 2")
    warmup = int(warmup)
    if x.size <= warmup:
        raise ValueError("signal must be longer than the warmup")
    steps = x.size - warmup
    k_count = config.num_modes
    ratios = np.empty((k_count, steps))
    near = np.zeros((k_count, steps), dtype=bool)
    far = np.zeros(steps, dtype=bool)
    pvals = np.empty(steps)
    for j, t in enumerate(range(warmup, x.size)):
        r, nn, ff, pv = mode_ratios(x[:t], config, x[t:t + 1])
        ratios[:, j] = r[:, 0]
        near[:, j] = nn[:, 0]
        far[j] = ff[0]
        pvals[j] = pv[0]
    run_min = np.minimum.accumulate(ratios, axis=1)
    values = ratios - run_min
    eigenvalues = -run_min[:, -1]
    return ModeMatrix(values, eigenvalues, x[warmup:, None], ratios, near,
                      far, pvals)


def dominance_histogram(modes: ModeMatrix) -> np.ndarray:
    """Count, per mode, the evaluation points where it attains the maximum.

    Ties go to the lowest mode index.
    """
    winners = np.argmax(modes.values, axis=0)
    return np.bincount(winners, minlength=modes.num_modes)


def mode_std(modes: ModeMatrix, point_index: int) -> float:
    """Population standard deviation of the mode values at one point."""
    if modes.num_modes < 2:
        raise ValueError("mode spread needs at least two modes")
    return float(np.std(modes.values[:, point_index]))


def write_mode_csv(modes: ModeMatrix, path):
    """Columns: point coordinates, mode values, then the IPF value."""
    d = modes.eval_points.shape[1]
    header = [f"x{i + 1}" for i in range(d)]
    header += [f"mode{k + 1}" for k in range(modes.num_modes)]
    header.append("ipf")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for p in range(modes.num_points):
            row = [repr(float(v)) for v in modes.eval_points[p]]
            row += [repr(float(modes.values[k, p]))
                    for k in range(modes.num_modes)]
            row.append(repr(float(modes.ipf[p])))
            writer.writerow(row)


def mode_matrix_to_dict(modes: ModeMatrix) -> dict:
    return {
        "num_modes": int(modes.num_modes),
        "eigenvalues": [float(v) for v in modes.eigenvalues],
        "eval_points": [[float(c) for c in p] for p in modes.eval_points],
        "values": [[float(v) for v in row] for row in modes.values],
        "ratios": [[float(v) for v in row] for row in modes.ratios],
        "near_node": [[bool(v) for v in row] for row in modes.near_node],
        "far_field": [bool(v) for v in modes.far_field],
        "ipf": [float(v) for v in modes.ipf],
    }


def mode_matrix_from_dict(payload: dict) -> ModeMatrix:
    try:
        return ModeMatrix(
            values=np.asarray(payload["values"], dtype=np.float64),
            eigenvalues=np.asarray(payload["eigenvalues"], dtype=np.float64),
            eval_points=np.asarray(payload["eval_points"], dtype=np.float64),
            ratios=np.asarray(payload["ratios"], dtype=np.float64),
            near_node=np.asarray(payload["near_node"], dtype=bool),
            far_field=np.asarray(payload["far_field"], dtype=bool),
            ipf=np.asarray(payload["ipf"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed mode matrix payload: {exc}") from exc


def write_mode_json(modes: ModeMatrix, path):
    with open(path, "w") as fh:
        json.dump(mode_matrix_to_dict(modes), fh, indent=1)
        fh.write("\n")


def read_mode_json(path) -> ModeMatrix:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"not a mode matrix file: {exc}") from exc
    return mode_matrix_from_dict(payload)
