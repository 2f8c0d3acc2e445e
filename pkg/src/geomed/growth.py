"""Quadratic growth constants and gradient-based distance certificates.

For a sample with centered covariance ``S`` let ``a`` be the sum of all but
the largest eigenvalue of ``S`` and ``m_p`` the mean p-th power of the
centered row norms. With ``b = (20 m1^3 + 6 m1 m2 + m3) / a`` the objective
grows at least like ``a r^2 / (2 b^2 (r + b))`` at distance ``r`` from the
median, and the norm of any subgradient is at least ``a r / (2 b^2 (r + b))``.
Inverting the second bound turns a small gradient into a distance bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import as_dataset, center, covariance_summary

DEGENERACY_RTOL = 1e-12


class CollinearData(ValueError):
    """The sample lies on a line (or a point); no growth certificate exists."""


@dataclass(frozen=True)
class GrowthCertificate:
    a: float
    b: float
    m1: float
    m2: float
    m3: float
    center: np.ndarray

    @property
    def threshold(self) -> float:
        """Gradient norm at or above which no distance bound is available."""
        return self.a / (2.0 * self.b**2)

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "m1": self.m1,
            "m2": self.m2,
            "m3": self.m3,
            "center": [float(c) for c in self.center],
        }

    @classmethod
    def from_dict(cls, d) -> "GrowthCertificate":
        return cls(d["a"], d["b"], d["m1"], d["m2"], d["m3"], np.asarray(d["center"], dtype=float))


def growth_constants(data, rtol=DEGENERACY_RTOL) -> GrowthCertificate:
    """Compute ``a, b, m1, m2, m3`` on the sample centered at its mean.

    Raises :class:`CollinearData` when ``a <= rtol * trace``.
    """
    data = as_dataset(data)
    if data.k < 2:
        raise CollinearData("need at least two points for a growth certificate")
    centered, mu = center(data)
    summary = covariance_summary(centered)
    a = summary.tail_eigen_sum
    if summary.trace == 0.0 or a <= rtol * summary.trace:
        raise CollinearData(
            f"tail eigenvalue sum {a:.3e} is degenerate (trace {summary.trace:.3e}); "
            "the sample is supported on a line"
        )
    norms = np.linalg.norm(centered.points, axis=1)
    k = data.k
    m1 = math.fsum(norms) / k
    m2 = math.fsum(norms**2) / k
    m3 = math.fsum(norms**3) / k
    b = (20.0 * m1**3 + 6.0 * m1 * m2 + m3) / a
    return GrowthCertificate(a, b, m1, m2, m3, mu)


def growth_lower_bound(r, cert: GrowthCertificate) -> float:
    r = float(r)
    if r < 0:
        raise ValueError("distance must be nonnegative")
    return 0.5 * cert.a * r * r / (cert.b**2 * (r + cert.b))


def error_certificate(grad_norm, cert: GrowthCertificate) -> float | None:
    """Certified bound on the distance to the exact median, or None.

    ``None`` means the gradient is too large (``a <= 2 b^2 g``) for the
    growth bound to say anything.
    """
    g = float(grad_norm)
    if g < 0:
        raise ValueError("gradient norm must be nonnegative")
    denom = cert.a - 2.0 * cert.b**2 * g
    # a denominator at rounding level carries no information
    if denom <= 8.0 * np.finfo(float).eps * cert.a:
        return None
    return 2.0 * cert.b**3 * g / denom


def stop_threshold(eps, cert: GrowthCertificate) -> float:
    """Gradient norm below which the iterate is provably within ``eps``."""
    eps = float(eps)
    if not eps > 0:
        raise ValueError("eps must be positive")
    return 0.5 * cert.a * eps / (cert.b**2 * (eps + cert.b))
