"""Median-of-means estimators and robust diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import Dataset, as_dataset, sample_mean, top_eigenvalue
from .datagen import GeneratorSpec, generate, make_rng
from .growth import CollinearData
from .solvers import METHODS, MaxItersExceeded, SolverConfig, solve, weiszfeld

ASSIGNMENTS = ("sequential", "shuffled")


@dataclass(frozen=True)
class MomConfig:
    k_blocks: int
    assignment: str = "sequential"
    seed: int = 0
    inner_eps: float = 1e-8
    inner_method: str = "newton"

    def __post_init__(self):
        if self.k_blocks < 1:
            raise ValueError("k_blocks must be at least 1")
        if self.assignment not in ASSIGNMENTS:
            raise ValueError(f"assignment must be one of {ASSIGNMENTS}")
        if self.inner_method not in METHODS:
            raise ValueError(f"inner_method must be one of {METHODS}")
        if not self.inner_eps > 0:
            raise ValueError("inner_eps must be positive")


@dataclass(frozen=True)
class SignCovariance:
    matrix: np.ndarray
    delta: float
    center: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))


def partition_blocks(n_points, cfg: MomConfig) -> list[np.ndarray]:
    """Split ``range(n_points)`` into ``k`` disjoint blocks of size ``n // k``.

    The ``n mod k`` leftover indices are dropped. With ``shuffled``
    assignment the indices are permuted first, so the dropped ones are random.
    """
    k = cfg.k_blocks
    if k > n_points:
        raise ValueError(f"cannot form {k} blocks from {n_points} points")
    size = n_points // k
    idx = np.arange(n_points)
    if cfg.assignment == "shuffled":
        idx = make_rng(cfg.seed).permutation(n_points)
    return [idx[j * size : (j + 1) * size] for j in range(k)]


def block_means(data, blocks) -> Dataset:
    data = as_dataset(data)
    return Dataset(np.stack([data.points[b].mean(axis=0) for b in blocks]))


def robust_median(data, eps=1e-8, method="newton"):
    """Geometric median that tolerates degenerate samples.

    Identical rows return that row; collinear samples (where the Newton
    solver has no certificate) fall back to Weiszfeld; a Newton run that
    stalls returns its best iterate.
    """
    data = as_dataset(data)
    pts = data.points
    if data.k == 1 or np.all(pts == pts[0]):
        return pts[0].copy()
    cfg = SolverConfig(eps=eps)
    try:
        return solve(data, method, cfg).point
    except CollinearData:
        return weiszfeld(data, SolverConfig(eps=eps, weiszfeld_tol=1e-14)).point
    except MaxItersExceeded as exc:
        return exc.result.point


def geometric_mom(data, cfg: MomConfig) -> np.ndarray:
    """Geometric median of the block means.

    A single block (which holds every index) returns the sample mean exactly.
    """
    data = as_dataset(data)
    if cfg.k_blocks == 1:
        return sample_mean(data)
    means = block_means(data, partition_blocks(data.k, cfg))
    return robust_median(means, cfg.inner_eps, cfg.inner_method)


def replicated_mom(data, reps, cfg: MomConfig) -> np.ndarray:
    """Replicate each row ``reps`` times, shuffle with ``cfg.seed``, then run :func:`geometric_mom`.

    A block may contain several copies of the same observation.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    data = as_dataset(data)
    if reps == 1 and cfg.assignment == "sequential":
        return geometric_mom(data, cfg)
    rep = np.repeat(data.points, reps, axis=0)
    rep = rep[make_rng(cfg.seed).permutation(rep.shape[0])]
    return geometric_mom(Dataset(rep), cfg)


def coordinatewise_median(data) -> np.ndarray:
    data = as_dataset(data)
    return np.median(data.points, axis=0)


def spatial_sign_covariance(data, center) -> SignCovariance:
    """Average outer product of unit vectors from ``center`` to the data.

    Rows equal to ``center`` are excluded, so the trace is exactly one.
    """
    data = as_dataset(data)
    center = np.asarray(center, dtype=np.float64)
    diff = data.points - center
    r = np.linalg.norm(diff, axis=1)
    keep = r > 0.0
    if not keep.any():
        raise ValueError("every data point equals the center")
    u = diff[keep] / r[keep, None]
    mat = (u.T @ u) / u.shape[0]
    mat = 0.5 * (mat + mat.T)
    return SignCovariance(mat, min(top_eigenvalue(mat), 1.0), center.copy())


def estimate_bias(spec: GeneratorSpec, n_block, trials, seed=None, inner_eps=1e-8) -> float:
    """Monte-Carlo estimate of the distance between the median of block means and the mean.

    Draws ``trials`` independent block means of ``n_block`` observations
    from ``spec`` (reseeded with ``seed`` if given), takes their geometric
    median with the Newton solver, and returns its distance to
    ``spec.true_mean()``.
    """
    if trials < 100:
        raise ValueError("trials must be at least 100")
    if seed is not None:
        spec = replace(spec, seed=seed)
    sample = generate(spec, trials * n_block)
    means = sample.points.reshape(trials, n_block, spec.d).mean(axis=1)
    med = robust_median(Dataset(means), eps=inner_eps)
    return float(np.linalg.norm(med - spec.true_mean()))
