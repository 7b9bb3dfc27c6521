"""Synthetic data generators, normalization, and split utilities.

Every generator is deterministic under a fixed seed and records its own
parameters in the metadata, so experiment outputs can be regenerated
byte-identically from a recipe file.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class LabeledSeries:
    """Paired inputs/targets plus generator provenance."""

    inputs: np.ndarray   # (n, d)
    targets: np.ndarray  # (n, m)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.inputs.shape[0]


def znormalize(a, ddof=0):
    """Center and scale to unit standard deviation.

    Returns (normalized, mean, std).  Degenerate spread is an error; the
    caller decides whether a constant series is meaningful.
    """
    a = np.asarray(a, dtype=np.float64)
    mean = a.mean(axis=0)
    std = a.std(axis=0, ddof=ddof)
    if np.any(std == 0.0):
        raise ValueError("degenerate series: zero variance")
    return (a - mean) / std, mean, std


def apply_znorm(a, mean, std):
    return (np.asarray(a, dtype=np.float64) - mean) / std


def undo_znorm(a, mean, std):
    return np.asarray(a, dtype=np.float64) * std + mean


def gen_xsinx(n, lo, hi, seed=0) -> LabeledSeries:
    """Noise-free pairs y = x sin(x) with x uniform on (lo, hi)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not lo < hi:
        raise ValueError("invalid range: lo must be below hi")
    rng = np.random.default_rng(seed)
    x = rng.uniform(lo, hi, size=n)
    y = x * np.sin(x)
    meta = {"generator": "xsinx", "n": n, "lo": lo, "hi": hi, "seed": seed}
    return LabeledSeries(x[:, None], y[:, None], meta)


def gen_twosine(n_left=40, n_right=10, noise_sd=0.03, seed=0) -> LabeledSeries:
    """Two-band regression set with a blank middle region.

    x is uniform on (-1, 0.2) and (0.7, 1); the band (0.2, 0.7) stays
    empty.  y = x + sin(4(x+w)) + sin(13(x+w)) + w with w ~ N(0, noise_sd^2)
    drawn per point.
    """
    if n_left < 0 or n_right < 0:
        raise ValueError("counts must be non-negative")
    if n_left + n_right < 1:
        raise ValueError("at least one sample is required")
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    rng = np.random.default_rng(seed)
    x = np.concatenate([
        rng.uniform(-1.0, 0.2, size=n_left),
        rng.uniform(0.7, 1.0, size=n_right),
    ])
    w = rng.normal(0.0, noise_sd, size=x.shape) if noise_sd > 0 else np.zeros_like(x)
    y = x + np.sin(4.0 * (x + w)) + np.sin(13.0 * (x + w)) + w
    meta = {"generator": "twosine", "n_left": n_left, "n_right": n_right,
            "noise_sd": noise_sd, "seed": seed}
    return LabeledSeries(x[:, None], y[:, None], meta)


def gen_blobs(n_per_class=100, centers=None, spread=1.0, seed=0) -> LabeledSeries:
    """Isotropic 2-d Gaussian blobs, one per class, moderate overlap.

    Targets are integer class indices stored as a float column.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be at least 1")
    if spread <= 0:
        raise ValueError("spread must be positive")
    if centers is None:
        centers = ((0.0, 2.0), (-1.8, -1.0), (1.8, -1.0))
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[1] != 2 or centers.shape[0] < 2:
        raise ValueError("centers must be at least two 2-d points")
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for ci, c in enumerate(centers):
        xs.append(c + rng.normal(0.0, spread, size=(n_per_class, 2)))
        ys.append(np.full(n_per_class, ci, dtype=np.float64))
    meta = {"generator": "blobs", "n_per_class": n_per_class,
            "num_classes": int(centers.shape[0]), "spread": spread,
            "seed": seed}
    return LabeledSeries(np.concatenate(xs), np.concatenate(ys)[:, None], meta)


def gen_sine(freqs, fs, n, normalize=True) -> np.ndarray:
    """Sum of unit-amplitude sines sampled at rate fs, z-normalized.

    fs must exceed twice the highest frequency.
    """
    freqs = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
    if freqs.size == 0 or np.any(freqs <= 0):
        raise ValueError("frequencies must be positive")
    if fs <= 2.0 * freqs.max():
        raise ValueError("sampling rate violates the Nyquist bound")
    if n < 1:
        raise ValueError("series length must be at least 1")
    t = np.arange(n) / float(fs)
    s = np.zeros(n)
    for f in freqs:
        s += np.sin(2.0 * np.pi * f * t)
    if normalize:
        s, _, _ = znormalize(s)
    return s


def _lorenz_rhs(state, sigma_l=10.0, rho=28.0, beta=8.0 / 3.0):
    x, y, z = state
    return np.array([
        sigma_l * (y - x),
        x * (rho - z) - y,
        x * y - beta * z,
    ])


def gen_lorenz(n, dt=0.01, component="x", normalize=True) -> np.ndarray:
    """One coordinate of the chaotic attractor, fixed-step RK4.

    Starts from (0, 1, 1.05).  The raw trajectory is z-normalized when
    normalize is set and n >= 2; a single sample is returned raw.
    """
    if n < 1:
        raise ValueError("series length must be at least 1")
    if dt <= 0:
        raise ValueError("step size must be positive")
    idx = {"x": 0, "y": 1, "z": 2}.get(component)
    if idx is None:
        raise ValueError(f"unknown component '{component}'")
    state = np.array([0.0, 1.0, 1.05])
    out = np.empty(n)
    out[0] = state[idx]
    for i in range(1, n):
        k1 = _lorenz_rhs(state)
        k2 = _lorenz_rhs(state + 0.5 * dt * k1)
        k3 = _lorenz_rhs(state + 0.5 * dt * k2)
        k4 = _lorenz_rhs(state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(state)):
            raise ValueError(f"integration diverged at step {i}")
        out[i] = state[idx]
    if normalize and n >= 2:
        out, _, _ = znormalize(out)
    return out


def split_k(n, n_splits, test_fraction, seed=0):
    """Seeded train/test index partitions.

    Each split is an independent shuffle of range(n); the test side takes
    round(n * test_fraction) indices.  Both sides are returned sorted.
    """
    if n_splits < 1:
        raise ValueError("n_splits must be at least 1")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    n = int(n)
    n_test = int(round(n * test_fraction))
    if n_test < 1 or n_test >= n:
        raise ValueError("split leaves an empty train or test side")
    rng = np.random.default_rng(seed)
    splits = []
    for _ in range(n_splits):
        perm = rng.permutation(n)
        test = np.sort(perm[:n_test])
        train = np.sort(perm[n_test:])
        splits.append((train, test))
    return splits
