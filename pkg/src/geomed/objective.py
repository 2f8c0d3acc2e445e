"""Mean norm deviation F, its weak gradient, and the Charbonnier relaxation F_delta.

All functions take ``z`` as a length-d vector and ``data`` as a
:class:`~geomed.core.Dataset` (or anything convertible to one). Scalar sums
use :func:`math.fsum`; vector sums use numpy's pairwise summation.
"""

from __future__ import annotations

import math

import numpy as np

from .core import as_dataset


def row_norms(diff):
    """Euclidean row norms, rescaling rows small enough for squares to underflow."""
    r = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    tiny = r < 1e-150
    if tiny.any():
        m = np.abs(diff[tiny]).max(axis=1)
        nz = m > 0
        sub = np.zeros_like(m)
        scaled = diff[tiny][nz] / m[nz, None]
        sub[nz] = m[nz] * np.sqrt(np.einsum("ij,ij->i", scaled, scaled))
        r[tiny] = sub
    return r


def _diffs(z, data):
    data = as_dataset(data)
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (data.d,):
        raise ValueError(f"point has shape {z.shape}, expected ({data.d},)")
    diff = z - data.points
    return diff, row_norms(diff)


def _check_delta(delta):
    delta = float(delta)
    if not delta >= 0.0:
        raise ValueError(f"smoothing parameter must be >= 0, got {delta}")
    return delta


def eval_f(z, data) -> float:
    """Average Euclidean distance from ``z`` to the sample points."""
    _, r = _diffs(z, data)
    return math.fsum(r) / r.size


def grad_f(z, data) -> np.ndarray:
    """Weak gradient of F: coincident points contribute exactly zero."""
    diff, r = _diffs(z, data)
    away = r > 0.0
    u = np.zeros_like(diff)
    u[away] = diff[away] / r[away, None]
    return u.sum(axis=0) / r.size


def min_norm_subgradient(z, data) -> np.ndarray:
    """Minimum-norm element of the subdifferential of F at ``z``.

    Equals :func:`grad_f` away from the data. At a point of multiplicity
    ``mu`` the subdifferential is ``grad_f(z) + (mu/k) * unit ball``, so the
    weak gradient is shortened by ``mu/k`` (and clipped at zero). Any
    subgradient is a valid input to the growth certificate; this one is the
    sharpest.
    """
    diff, r = _diffs(z, data)
    g = grad_f(z, data)
    mu = int(np.count_nonzero(r == 0.0))
    if mu == 0:
        return g
    norm = np.linalg.norm(g)
    slack = mu / r.size
    if norm <= slack:
        return np.zeros_like(g)
    return g * (1.0 - slack / norm)


def eval_f_delta(z, data, delta) -> float:
    """Charbonnier relaxation ``(1/k) sum sqrt(|z - Y_i|^2 + delta^2)``."""
    delta = _check_delta(delta)
    _, r = _diffs(z, data)
    return math.fsum(np.hypot(r, delta)) / r.size


def grad_f_delta(z, data, delta) -> np.ndarray:
    delta = _check_delta(delta)
    if delta == 0.0:
        return grad_f(z, data)
    diff, r = _diffs(z, data)
    w = 1.0 / np.hypot(r, delta)
    return (w[:, None] * diff).sum(axis=0) / r.size


def hessian_f_delta(z, data, delta) -> np.ndarray:
    """Dense Hessian of F_delta; costs O(k d^2).

    With ``delta == 0`` this is the Hessian of F itself, with coincident
    points dropped (they have no finite curvature).
    """
    delta = _check_delta(delta)
    diff, r = _diffs(z, data)
    k, d = diff.shape
    s = np.hypot(r, delta)
    keep = s > 0.0
    w = np.zeros_like(s)
    w[keep] = 1.0 / s[keep]
    # (1/k) sum w_i I - (1/k) sum w_i^3 diff_i diff_i^T
    h = -(diff.T * w**3) @ diff
    h[np.diag_indices(d)] += w.sum()
    h /= k
    return 0.5 * (h + h.T)
