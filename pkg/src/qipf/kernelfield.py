"""Gaussian kernel fields over sample sets.

The information potential field (IPF) is the mean of unnormalized Gaussian
windows centered at the data samples.  Its square root plays the role of the
wave function in the Schrodinger-form decomposition.  Analytic first and
second derivatives of both fields are provided so the mode machinery never
has to fall back on finite differences.
"""

from dataclasses import dataclass

import numpy as np

# exp() underflows to 0 near 1e-308; clamping the field keeps square roots
# and mode ratios finite for queries far outside the sample support.
FAR_FIELD_FLOOR = 1e-300


@dataclass
class FieldEvaluation:
    """Value, gradient, and Laplacian of a field at one query point."""

    value: float
    gradient: np.ndarray
    laplacian: float
    far_field: bool = False


def as_sample_set(points) -> np.ndarray:
    """Coerce centers to an (N, d) float64 array.

    A scalar becomes one 1-d point; a flat length-N array is read as N
    one-dimensional points (scalar populations are the common case).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ValueError("sample set must be an (N, d) array of points")
    if pts.shape[0] == 0:
        raise ValueError("sample set is empty")
    if not np.all(np.isfinite(pts)):
        raise ValueError("sample set contains non-finite coordinates")
    return pts


def _check_sigma(sigma) -> float:
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0.0:
        raise ValueError("sigma must be a positive finite real")
    return sigma


def _as_queries(x, d) -> np.ndarray:
    """Coerce query points to (P, d); a flat array is one d-dim point."""
    q = np.asarray(x, dtype=np.float64)
    if q.ndim == 0:
        q = q.reshape(1, 1)
    elif q.ndim == 1:
        q = q[None, :]
    if q.ndim != 2 or q.shape[1] != d:
        raise ValueError(f"query dimension mismatch: expected d={d}")
    if not np.all(np.isfinite(q)):
        raise ValueError("non-finite query point")
    return q


def gaussian_kernel(u, v, sigma) -> float:
    """Unnormalized Gaussian window exp(-||u - v||^2 / (2 sigma^2)).

    No density constant is attached; the value lies in (0, 1] and equals 1
    only at zero distance.
    """
    sigma = _check_sigma(sigma)
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    v = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if u.shape != v.shape:
        raise ValueError("kernel arguments have mismatched dimensions")
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
        raise ValueError("non-finite kernel argument")
    d2 = float(np.sum((u - v) ** 2))
    return float(np.exp(-d2 / (2.0 * sigma * sigma)))


def _kernel_matrix(centers, sigma, queries):
    """Pairwise diffs (P, N, d), squared distances (P, N), kernel values."""
    diff = queries[:, None, :] - centers[None, :, :]
    d2 = np.einsum("pnd,pnd->pn", diff, diff)
    gk = np.exp(-d2 / (2.0 * sigma * sigma))
    return diff, d2, gk


def ipf_field(centers, sigma, queries) -> np.ndarray:
    """IPF values at an array of query points, shape (P,)."""
    centers = as_sample_set(centers)
    sigma = _check_sigma(sigma)
    queries = _as_queries(queries, centers.shape[1])
    _, _, gk = _kernel_matrix(centers, sigma, queries)
    return gk.mean(axis=1)


def ipf(centers, sigma, x) -> float:
    """Mean of Gaussian windows centered at the samples, at one point x."""
    centers = as_sample_set(centers)
    sigma = _check_sigma(sigma)
    q = _as_queries(x, centers.shape[1])
    if q.shape[0] != 1:
        raise ValueError("ipf evaluates one point; use ipf_field for batches")
    _, _, gk = _kernel_matrix(centers, sigma, q)
    return float(gk.mean())


def ipf_derivative_field(centers, sigma, queries):
    """IPF value, gradient, and Laplacian at each query point.

    Returns (values (P,), gradients (P, d), laplacians (P,)).  The forms
    follow from differentiating the Gaussian window directly:
    grad_j = mean_i of -(x_j - x_ij)/sigma^2 * G, and the Laplacian is
    mean_i of (||x - x_i||^2/sigma^4 - d/sigma^2) * G.
    """
    centers = as_sample_set(centers)
    sigma = _check_sigma(sigma)
    queries = _as_queries(queries, centers.shape[1])
    d = centers.shape[1]
    s2 = sigma * sigma
    diff, d2, gk = _kernel_matrix(centers, sigma, queries)
    values = gk.mean(axis=1)
    grads = -np.einsum("pn,pnd->pd", gk, diff) / (centers.shape[0] * s2)
    laps = ((d2 / (s2 * s2) - d / s2) * gk).mean(axis=1)
    return values, grads, laps


def ipf_derivatives(centers, sigma, x) -> FieldEvaluation:
    """Analytic value/gradient/Laplacian of the IPF at one point."""
    centers = as_sample_set(centers)
    values, grads, laps = ipf_derivative_field(centers, sigma, x)
    return FieldEvaluation(float(values[0]), grads[0], float(laps[0]))


def wavefunction_field(centers, sigma, queries):
    """Square-root field with derivatives at each query point.

    With p, g, L the IPF value, gradient, and Laplacian:
    value = sqrt(p); gradient = g / (2 sqrt(p));
    laplacian = L / (2 sqrt(p)) - ||g||^2 / (4 p^1.5).
    p is clamped at FAR_FIELD_FLOOR and the point flagged far-field instead
    of raising, so extrapolation far outside the support still evaluates.

    Returns (values (P,), gradients (P, d), laplacians (P,), far (P,) bool).
    """
    p, g, lap = ipf_derivative_field(centers, sigma, queries)
    far = p < FAR_FIELD_FLOOR
    p = np.maximum(p, FAR_FIELD_FLOOR)
    root = np.sqrt(p)
    values = root
    grads = g / (2.0 * root[:, None])
    # ||g||^2 / (4 p^1.5) written as ||g/(2 sqrt(p))||^2 / sqrt(p): the raw
    # form underflows to 0/0 once p drops below ~1e-206 even before the
    # floor, while every factor here stays representable (root >= 1e-150).
    gsq = np.einsum("pd,pd->p", grads, grads)
    laps = lap / (2.0 * root) - gsq / root
    return values, grads, laps, far


def wavefunction_derivatives(centers, sigma, x) -> FieldEvaluation:
    """Analytic value/gradient/Laplacian of sqrt(IPF) at one point."""
    values, grads, laps, far = wavefunction_field(centers, sigma, x)
    return FieldEvaluation(float(values[0]), grads[0], float(laps[0]),
                           far_field=bool(far[0]))


def cip(centers, sigma, l2) -> float:
    """Cross information potential at a model-output summary point.

    Structurally the IPF with centers drawn from one layer's scalar
    activations (or pooled weights) and the query taken from the output
    summary l2; the usual case is d = 1.
    """
    return ipf(centers, sigma, l2)


def information_potential(samples, sigma) -> float:
    """Mean pairwise Gaussian interaction (1/N^2) sum_ij G(x_j - x_i).

    The pair kernel uses width sqrt(2)*sigma, the exact width of the
    convolution of two sigma-Gaussians, so each term is
    exp(-||x_j - x_i||^2 / (4 sigma^2)).
    """
    samples = as_sample_set(samples)
    sigma = _check_sigma(sigma)
    diff = samples[:, None, :] - samples[None, :, :]
    d2 = np.einsum("ijd,ijd->ij", diff, diff)
    return float(np.exp(-d2 / (4.0 * sigma * sigma)).mean())


def silverman_bandwidth(samples) -> float:
    """Rule-of-thumb width 1.06 * std * N^(-1/5) for scalar sample sets.

    Uses the unbiased (N-1) standard deviation.  Requires N >= 2 and a
    non-degenerate spread.
    """
    samples = as_sample_set(samples)
    if samples.shape[1] != 1:
        raise ValueError("bandwidth rule applies to scalar sample sets")
    n = samples.shape[0]
    if n < 2:
        raise ValueError("bandwidth rule needs at least two samples")
    std = float(np.std(samples[:, 0], ddof=1))
    if std == 0.0:
        raise ValueError("degenerate center set: zero sample variance")
    return 1.06 * std * n ** (-0.2)
