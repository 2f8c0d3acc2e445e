"""Geometric median solvers.

Three methods share one result type:

* ``weiszfeld`` -- the classical fixed-point iteration with the
  Vardi-Zhang correction at data points;
* ``agd`` -- accelerated gradient descent on the Charbonnier relaxation
  with smoothing ``eps/2``; the iteration count is fixed in advance and the
  output is within ``eps`` of the optimal objective value;
* ``newton`` -- Newton steps on successively sharper relaxations, stopped
  once the growth certificate bounds the distance to the median by ``eps``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import as_dataset, sample_mean
from .growth import CollinearData, GrowthCertificate, error_certificate, growth_constants, stop_threshold
from .objective import eval_f, eval_f_delta, grad_f_delta, hessian_f_delta, min_norm_subgradient, row_norms

log = logging.getLogger(__name__)

METHODS = ("weiszfeld", "agd", "newton")

AGD_MAX_ITERS = 10**9
NEWTON_MAX_ITERS = 500
WEISZFELD_MAX_ITERS = 10**5


class SolverError(RuntimeError):
    pass


class MaxItersExceeded(SolverError):
    """Iteration cap hit; ``result`` holds the last iterate."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


class LinearSolveFailure(SolverError):
    """The Newton system could not be factorized even with jitter."""


@dataclass(frozen=True)
class SolverConfig:
    eps: float = 1e-6
    max_iters: int | None = None
    m_factor: float = 2.0
    weiszfeld_tol: float = 1e-12

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if not self.m_factor > 1:
            raise ValueError("m_factor must exceed 1")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.weiszfeld_tol > 0:
            raise ValueError("weiszfeld_tol must be positive")


@dataclass(frozen=True)
class MedianResult:
    point: np.ndarray
    objective: float
    grad_norm: float
    certified_distance: float | None
    iterations: int
    method: str
    converged: bool = True
    certificate: GrowthCertificate | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "point": [float(x) for x in self.point],
            "objective": self.objective,
            "grad_norm": self.grad_norm,
            "certified_distance": self.certified_distance,
            "iterations": self.iterations,
            "method": self.method,
            "converged": self.converged,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
        }


def _try_certificate(data):
    try:
        return growth_constants(data)
    except CollinearData:
        return None


def _finish(point, data, iterations, method, cert, converged=True):
    g = float(np.linalg.norm(min_norm_subgradient(point, data)))
    dist = error_certificate(g, cert) if cert is not None else None
    return MedianResult(
        point=np.array(point, dtype=np.float64),
        objective=eval_f(point, data),
        grad_norm=g,
        certified_distance=dist,
        iterations=iterations,
        method=method,
        converged=converged,
        certificate=cert,
    )


def _all_identical(points):
    return bool(np.all(points == points[0]))


# -- Weiszfeld ---------------------------------------------------------------


def weiszfeld_step(z, points):
    """One Vardi-Zhang corrected Weiszfeld update.

    Returns ``(new_z, at_optimum)``; ``at_optimum`` is True when ``z``
    coincides with data points whose multiplicity outweighs the pull of
    the rest, i.e. ``z`` is itself the median.
    """
    diff = points - z
    r = row_norms(diff)
    away = r > 0.0
    mu = points.shape[0] - int(np.count_nonzero(away))
    w = 1.0 / r[away]
    t = (w[:, None] * points[away]).sum(axis=0) / w.sum()
    if mu == 0:
        return t, False
    pull = np.linalg.norm((w[:, None] * diff[away]).sum(axis=0))
    if pull <= mu:
        return z.copy(), True
    lam = mu / pull
    return (1.0 - lam) * t + lam * z, False


def weiszfeld(data, cfg: SolverConfig = SolverConfig(), cert: GrowthCertificate | None = None) -> MedianResult:
    """Weiszfeld iteration from the sample mean.

    Stops when the certificate test at ``cfg.eps`` passes, the step is
    shorter than ``cfg.weiszfeld_tol``, or ``cfg.max_iters`` is reached (the
    result is then returned with ``converged=False``).
    """
    data = as_dataset(data)
    pts = data.points
    if _all_identical(pts):
        return _finish(pts[0], data, 0, "weiszfeld", cert)
    if cert is None:
        cert = _try_certificate(data)
    threshold = stop_threshold(cfg.eps, cert) if cert is not None else None
    max_iters = cfg.max_iters or WEISZFELD_MAX_ITERS
    z = sample_mean(data)
    for it in range(1, max_iters + 1):
        if threshold is not None and np.linalg.norm(min_norm_subgradient(z, data)) < threshold:
            return _finish(z, data, it - 1, "weiszfeld", cert)
        z_new, at_opt = weiszfeld_step(z, pts)
        if at_opt:
            return _finish(z, data, it - 1, "weiszfeld", cert)
        step = np.linalg.norm(z_new - z)
        z = z_new
        if step < cfg.weiszfeld_tol * max(1.0, np.linalg.norm(z)):
            return _finish(z, data, it, "weiszfeld", cert)
    log.warning("weiszfeld hit max_iters=%d", max_iters)
    return _finish(z, data, max_iters, "weiszfeld", cert, converged=False)


# -- accelerated gradient descent on the Charbonnier relaxation --------------


def _agd_bound(f0, eps):
    return f0 + 9.0 / (4.0 * eps) * f0 * f0


def agd_continue(t, f0, eps) -> bool:
    """Loop predicate: keep iterating while the suboptimality bound is >= eps/2."""
    return eps / 2.0 <= 16.0 / (9.0 * (t + 1) ** 2) * _agd_bound(f0, eps)


def agd_iteration_count(f0, eps) -> int:
    """Number of iterations the accelerated loop performs.

    Closed form: the smallest t with ``(t+1)^2 > 32/(9 eps) * B`` where
    ``B = f0 + 9 f0^2 / (4 eps)``; nudged by the exact predicate so that
    rounding at the boundary agrees with the loop.
    """
    c = 32.0 / (9.0 * eps) * _agd_bound(f0, eps)
    t = max(int(math.floor(math.sqrt(c))), 0)
    while agd_continue(t, f0, eps):
        t += 1
    while t > 0 and not agd_continue(t - 1, f0, eps):
        t -= 1
    return t


def agd_alpha_next(alpha):
    return alpha / 2.0 * (math.sqrt(alpha * alpha + 4.0) - alpha)


def charbonnier_agd(data, cfg: SolverConfig = SolverConfig(), cert: GrowthCertificate | None = None) -> MedianResult:
    """Accelerated gradient descent on F_{eps/2}, started at the sample mean.

    The step size is ``eps/2`` (the inverse Lipschitz constant of the
    relaxed gradient) and the momentum schedule starts at ``alpha = 3/4``.
    The iteration count is fixed by the initial relaxed objective value.
    """
    data = as_dataset(data)
    eps = cfg.eps
    delta = eps / 2.0
    x = sample_mean(data)
    f0 = eval_f_delta(x, data, delta)
    n_iter = agd_iteration_count(f0, eps)
    cap = cfg.max_iters or AGD_MAX_ITERS
    if n_iter > cap:
        raise MaxItersExceeded(
            f"accelerated loop needs {n_iter} iterations, above the cap {cap}",
            _finish(x, data, 0, "agd", cert, converged=False),
        )
    v = x.copy()
    alpha = 0.75
    for _ in range(n_iter):
        x_new = v - delta * grad_f_delta(v, data, delta)
        alpha_new = agd_alpha_next(alpha)
        beta = alpha * (1.0 - alpha) / (alpha * alpha + alpha_new)
        v = x_new + beta * (x_new - x)
        x, alpha = x_new, alpha_new
    return _finish(x, data, n_iter, "agd", cert)


# -- Newton on successive relaxations ----------------------------------------


def newton_step(x, data, tau):
    """Solve ``H step = g`` for the relaxed Hessian/gradient at ``x``.

    Returns ``(step, g, residual_norm)``. Uses a Cholesky factorization,
    retrying with diagonal jitter ``1e-14 * trace`` and finally one round of
    iterative refinement.
    """
    g = grad_f_delta(x, data, tau)
    h = hessian_f_delta(x, data, tau)
    try:
        factor = scipy.linalg.cho_factor(h, check_finite=True)
    except (np.linalg.LinAlgError, ValueError):
        jitter = 1e-14 * np.trace(h)
        try:
            factor = scipy.linalg.cho_factor(h + jitter * np.eye(h.shape[0]))
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise LinearSolveFailure(f"Hessian factorization failed at tau={tau:.3e}") from exc
    step = scipy.linalg.cho_solve(factor, g)
    res = h @ step - g
    gnorm = np.linalg.norm(g)
    if np.linalg.norm(res) > 1e-10 * gnorm:
        step = step - scipy.linalg.cho_solve(factor, res)
        res = h @ step - g
    if not np.all(np.isfinite(step)):
        raise LinearSolveFailure(f"non-finite Newton step at tau={tau:.3e}")
    return step, g, float(np.linalg.norm(res))


def _damped_update(x, step, data, tau, max_halvings=30):
    f_old = eval_f_delta(x, data, tau)
    s = 1.0
    for _ in range(max_halvings + 1):
        cand = x - s * step
        if eval_f_delta(cand, data, tau) <= f_old:
            return cand
        s *= 0.5
    return x


def _snap_to_anchor(x, data, g_norm):
    """Move to the nearest data point if it is a better certified iterate.

    When the median is a data point the relaxed Newton iterates only
    approach it; the point itself has a small min-norm subgradient.
    """
    pts = data.points
    j = int(np.argmin(np.einsum("ij,ij->i", pts - x, pts - x)))
    g_anchor = float(np.linalg.norm(min_norm_subgradient(pts[j], data)))
    if g_anchor < g_norm:
        return pts[j].copy(), g_anchor
    return x, g_norm


def newton_charbonnier(
    data,
    cfg: SolverConfig = SolverConfig(),
    cert: GrowthCertificate | None = None,
    stall_window: int = 25,
) -> MedianResult:
    """Two-phase Newton method on F_tau with tau shrinking by ``m_factor``.

    Phase one runs until the gradient of F drops below ``a / (2 b^2)``,
    phase two until the certified distance is below ``cfg.eps``. Every step
    is damped (halved up to 30 times) if it would increase F_tau. Raises
    :class:`MaxItersExceeded` if the cap is hit or no progress is made for
    ``stall_window`` consecutive steps.
    """
    data = as_dataset(data)
    if cert is None:
        cert = growth_constants(data)
    max_iters = cfg.max_iters or NEWTON_MAX_ITERS
    threshold = cert.threshold
    x = sample_mean(data)
    g_norm = float(np.linalg.norm(min_norm_subgradient(x, data)))
    tau = 1.0
    best = (g_norm, x)
    since_best = 0
    t = 0

    def certified(gn):
        if gn >= threshold:
            return False
        dist = error_certificate(gn, cert)
        return dist is not None and dist < cfg.eps

    while not certified(g_norm):
        if t >= max_iters or since_best >= stall_window:
            reason = "iteration cap" if t >= max_iters else "stalled"
            raise MaxItersExceeded(
                f"newton stopped ({reason}) after {t} steps with gradient norm {best[0]:.3e}",
                _finish(best[1], data, t, "newton", cert, converged=False),
            )
        tau = tau / cfg.m_factor
        step, _, _ = newton_step(x, data, tau)
        x = _damped_update(x, step, data, tau)
        t += 1
        g_norm = float(np.linalg.norm(min_norm_subgradient(x, data)))
        x, g_norm = _snap_to_anchor(x, data, g_norm)
        if g_norm < best[0]:
            best = (g_norm, x)
            since_best = 0
        else:
            since_best += 1
    return _finish(x, data, t, "newton", cert)


def polish_median(data, grad_tol=1e-14, max_iters=200) -> MedianResult:
    """High-accuracy reference median.

    Runs the Newton solver to a tight certificate, then takes damped Newton
    steps on F itself until the gradient norm is at most ``grad_tol`` or
    stops improving. Collinear data falls back to a long Weiszfeld run.
    """
    data = as_dataset(data)
    cert = _try_certificate(data)
    if cert is None:
        return weiszfeld(data, SolverConfig(eps=1e-15, weiszfeld_tol=1e-16, max_iters=10**6))
    try:
        start = newton_charbonnier(data, SolverConfig(eps=1e-12), cert=cert).point
    except MaxItersExceeded as exc:
        start = exc.result.point
    x = start
    g = float(np.linalg.norm(min_norm_subgradient(x, data)))
    stale = 0
    for it in range(max_iters):
        if g <= grad_tol or stale >= 5:
            break
        gvec = grad_f_delta(x, data, 0.0)
        h = hessian_f_delta(x, data, 0.0)
        try:
            step = scipy.linalg.solve(h, gvec, assume_a="pos")
        except (np.linalg.LinAlgError, ValueError):
            break
        cand = x - step
        g_cand = float(np.linalg.norm(min_norm_subgradient(cand, data)))
        if g_cand < g:
            x, g = cand, g_cand
            stale = 0
        else:
            stale += 1
            cand, g_cand = _snap_to_anchor(x, data, g)
            x, g = cand, g_cand
    return _finish(x, data, it, "newton", cert)


def solve(data, method="newton", cfg: SolverConfig = SolverConfig()) -> MedianResult:
    """Dispatch to a solver; attach the growth certificate whenever it exists."""
    data = as_dataset(data)
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    cert = _try_certificate(data)
    if method == "newton":
        if cert is None:
            raise CollinearData("newton solver requires non-collinear data")
        return newton_charbonnier(data, cfg, cert=cert)
    if method == "agd":
        return charbonnier_agd(data, cfg, cert=cert)
    return weiszfeld(data, cfg, cert=cert)

