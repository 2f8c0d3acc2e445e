"""Dataset container, summary statistics and the small dense eigen kernel."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Rows with larger norm make the third moment overflow in the growth constants.
MAX_ROW_NORM = 1e100


class DataError(ValueError):
    """Invalid input data (non-finite entries, bad shape, CSV parse failure)."""


class ConvergenceError(RuntimeError):
    """An iterative kernel did not converge within its iteration cap."""


@dataclass(frozen=True)
class Dataset:
    """An ordered sample of ``k`` points in ``R^d`` stored row-wise.

    The array is copied on construction and marked read-only.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, copy=True)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DataError(f"expected a non-empty k x d matrix, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            bad = np.argwhere(~np.isfinite(pts))[0]
            raise DataError(f"non-finite entry at row {bad[0]}, column {bad[1]}")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms > MAX_ROW_NORM):
            row = int(np.argmax(norms > MAX_ROW_NORM))
            raise DataError(f"row {row} has norm above {MAX_ROW_NORM:g}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def k(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.k

    def translate(self, shift) -> "Dataset":
        return Dataset(self.points + np.asarray(shift, dtype=np.float64))


def as_dataset(data) -> Dataset:
    if isinstance(data, Dataset):
        return data
    return Dataset(np.asarray(data, dtype=np.float64))


@dataclass(frozen=True)
class CovarianceSummary:
    trace: float
    top_eigenvalue: float
    tail_eigen_sum: float
    effective_rank: float | None


def sample_mean(data) -> np.ndarray:
    data = as_dataset(data)
    return data.points.mean(axis=0)


def center(data) -> tuple[Dataset, np.ndarray]:
    """Translate the sample so that its rows sum to zero.

    Returns the centered dataset and the removed mean.
    """
    data = as_dataset(data)
    mu = sample_mean(data)
    return Dataset(data.points - mu), mu


def top_eigenvalue(sym, tol=1e-13, max_iter=100_000, seed=0) -> float:
    """Largest eigenvalue of a symmetric positive semidefinite matrix.

    Power iteration from the normalized all-ones vector; if the Rayleigh
    quotient stalls at zero a seeded random start is used instead.
    Converges when successive Rayleigh quotients agree to ``tol`` relative.
    """
    q = np.asarray(sym, dtype=np.float64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {q.shape}")
    n = q.shape[0]
    scale = np.abs(q).max() if q.size else 0.0
    if scale == 0.0:
        return 0.0
    if not np.allclose(q, q.T, rtol=1e-10, atol=1e-12 * scale):
        raise ValueError("matrix is not symmetric")
    if n == 1:
        return float(q[0, 0])

    starts = [np.ones(n)]
    starts.append(np.random.default_rng(seed).standard_normal(n))
    for v in starts:
        v = v / np.linalg.norm(v)
        w = q @ v
        rho = float(v @ w)
        if rho <= 0.0 and np.linalg.norm(w) <= 1e-14 * scale:
            # start lies in the null space; try the random vector
            continue
        for _ in range(max_iter):
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            v = w / nw
            w = q @ v
            new_rho = float(v @ w)
            if abs(new_rho - rho) <= tol * abs(new_rho):
                return new_rho
            rho = new_rho
        else:
            raise ConvergenceError(
                f"power iteration did not converge in {max_iter} steps (ill-conditioned spectrum)"
            )
    return 0.0


def covariance_summary(data) -> CovarianceSummary:
    """Trace and top eigenvalue of the centered empirical covariance.

    The top eigenvalue is taken from the k x k Gram matrix when k < d, which
    shares its nonzero spectrum with the d x d covariance.
    """
    data = as_dataset(data)
    y, _ = center(data)
    y = y.points
    k, d = y.shape
    tr = math.fsum(np.einsum("ij,ij->i", y, y)) / k
    if tr == 0.0:
        return CovarianceSummary(0.0, 0.0, 0.0, None)
    small = (y @ y.T) / k if k < d else (y.T @ y) / k
    small = 0.5 * (small + small.T)
    lam = top_eigenvalue(small)
    lam = min(lam, tr)
    tail = tr - lam
    return CovarianceSummary(tr, lam, tail, tr / lam if lam > 0 else None)


def read_dataset_csv(path, skip_header=False, delimiter=",") -> Dataset:
    """Load one observation per line; parse errors name the row and column."""
    rows = []
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for lineno, record in enumerate(reader, start=1):
            if skip_header and lineno == 1:
                continue
            if not record or all(not c.strip() for c in record):
                continue
            row = []
            for col, cell in enumerate(record, start=1):
                try:
                    row.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: row {lineno}, column {col}: cannot parse {cell!r} as a float"
                    ) from None
            if rows and len(row) != len(rows[0]):
                raise DataError(
                    f"{path}: row {lineno} has {len(row)} columns, expected {len(rows[0])}"
                )
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(rows))


def write_dataset_csv(data, path):
    data = as_dataset(data)
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in data.points:
            writer.writerow([repr(float(x)) for x in row])
