"""Seeded synthetic samples for experiments and property tests.

Every generator draws from numpy's PCG64 seeded with ``seed + stream``;
parallel callers use distinct stream indices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset

FAMILIES = ("sphere", "fourier", "gaussian", "student_t", "contaminated", "exponential")


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) + int(stream)))


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a synthetic sample.

    ``cov`` is ``None`` (identity), a scalar variance, a length-d vector of
    variances, or a full d x d PSD matrix. ``df`` is used by ``student_t``;
    ``frac`` and ``mag`` by ``contaminated``.
    """

    family: str
    d: int
    seed: int = 0
    df: float = 5.0
    frac: float = 0.0
    mag: float = 0.0
    cov: object = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if self.family == "student_t" and not self.df > 2:
            raise ValueError("student_t needs df > 2 for a finite covariance")
        if not 0.0 <= self.frac < 0.5:
            raise ValueError("contamination fraction must lie in [0, 1/2)")

    def true_mean(self) -> np.ndarray:
        if self.family == "exponential":
            return np.ones(self.d)
        return np.zeros(self.d)


def gen_sphere(d, n, seed, stream=0) -> Dataset:
    """``n`` points uniform on the sphere of radius sqrt(d)."""
    if d < 2 or n < 1:
        raise ValueError("need d >= 2 and n >= 1")
    g = make_rng(seed, stream).standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return Dataset(np.sqrt(d) * g)


def fourier_row(j, d):
    """Row ``j`` of the unnormalized DFT matrix of order d/2 + 1, constant column dropped.

    Entries are interleaved as sqrt(2) * (cos, sin) pairs of
    ``exp(2 pi i j l / (d/2 + 1))`` for ``l = 1 .. d/2``, so every row has
    norm sqrt(d) and the rows average to zero over ``j``.
    """
    m = d // 2 + 1
    ang = 2.0 * np.pi * np.outer(np.atleast_1d(j), np.arange(1, m)) / m
    out = np.empty((ang.shape[0], d))
    out[:, 0::2] = np.sqrt(2.0) * np.cos(ang)
    out[:, 1::2] = np.sqrt(2.0) * np.sin(ang)
    return out


def gen_fourier(d, n, seed, stream=0) -> Dataset:
    """Random rows of a Fourier matrix with the all-ones column excluded."""
    if d % 2 or d < 4:
        raise ValueError(f"fourier data needs an even dimension >= 4, got {d}")
    if n < 1:
        raise ValueError("n must be positive")
    m = d // 2 + 1
    j = make_rng(seed, stream).integers(0, m, size=n)
    return Dataset(fourier_row(j, d))


def _cov_factor(cov, d):
    if cov is None:
        return None
    c = np.asarray(cov, dtype=np.float64)
    if c.ndim == 0:
        if c < 0:
            raise ValueError("variance must be nonnegative")
        return np.sqrt(float(c)) * np.eye(d)
    if c.ndim == 1:
        if c.shape != (d,) or np.any(c < 0):
            raise ValueError("diagonal covariance must be a nonnegative length-d vector")
        return np.diag(np.sqrt(c))
    if c.shape != (d, d) or not np.allclose(c, c.T):
        raise ValueError("covariance must be a symmetric d x d matrix")
    w, v = np.linalg.eigh(c)
    if w.min() < -1e-10 * max(1.0, abs(w).max()):
        raise ValueError("covariance matrix is not positive semidefinite")
    return v * np.sqrt(np.clip(w, 0.0, None))


def gen_elliptical(spec: GeneratorSpec, n, stream=0) -> Dataset:
    """Gaussian, multivariate-t, contaminated Gaussian or exponential samples."""
    d = spec.d
    rng = make_rng(spec.seed, stream)
    if spec.family == "exponential":
        return Dataset(rng.exponential(1.0, size=(n, d)))
    if spec.family not in ("gaussian", "student_t", "contaminated"):
        raise ValueError(f"gen_elliptical does not handle family {spec.family!r}")
    a = _cov_factor(spec.cov, d)
    x = rng.standard_normal((n, d))
    if a is not None:
        x = x @ a.T
    if spec.family == "student_t":
        chi2 = rng.chisquare(spec.df, size=n)
        x *= np.sqrt(spec.df / chi2)[:, None]
    elif spec.family == "contaminated":
        n_out = int(np.floor(spec.frac * n))
        if n_out:
            idx = rng.choice(n, size=n_out, replace=False)
            x[idx] = 0.0
            x[idx, 0] = spec.mag
    return Dataset(x)


def generate(spec: GeneratorSpec, n, stream=0) -> Dataset:
    if spec.family == "sphere":
        return gen_sphere(spec.d, n, spec.seed, stream)
    if spec.family == "fourier":
        return gen_fourier(spec.d, n, spec.seed, stream)
    return gen_elliptical(spec, n, stream)
