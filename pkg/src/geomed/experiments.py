"""Experiment pipelines producing :class:`~geomed.report.ExperimentReport` objects.

Independent cells (one dimension, one cutoff, one tolerance) may run on a
thread pool sized by the ``GEOMED_THREADS`` environment variable. Each cell
derives its randomness from ``(seed, cell index)`` and results are
assembled in cell order, so reports do not depend on the thread count.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .core import Dataset, as_dataset, center, sample_mean
from .datagen import GeneratorSpec, generate
from .growth import CollinearData, growth_constants
from .objective import eval_f
from .report import ExperimentReport
from .returns import ReturnsMatrix
from .robust import MomConfig, coordinatewise_median, geometric_mom, replicated_mom, robust_median
from .solvers import METHODS, MaxItersExceeded, SolverConfig, SolverError, newton_charbonnier, polish_median, solve


def thread_count() -> int:
    raw = os.environ.get("GEOMED_THREADS")
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_cells(fn, items):
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(i, item) for i, item in enumerate(items)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, range(len(items)), items))


def loglog_slope(xs, ys) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


# -- curvature near the median versus dimension ------------------------------


def second_difference(data, point, direction, h) -> float:
    """Central second difference of F at ``point`` along the unit ``direction``."""
    u = np.asarray(direction, dtype=np.float64)
    u = u / np.linalg.norm(u)
    x = np.asarray(point, dtype=np.float64)
    return (eval_f(x + h * u, data) - 2.0 * eval_f(x, data) + eval_f(x - h * u, data)) / (h * h)


def curvature_profile(data, target=None, direction=None, h=None, newton_eps=1e-8) -> dict:
    """Second differences of F at the sample mean and at the geometric median.

    The sample is centered first, so the result does not depend on where
    it sits. The direction runs from the sample mean toward ``target``
    unless ``direction`` is given. The default step is ``1e-4 * sqrt(d)``.
    """
    data = as_dataset(data)
    centered, mu = center(data)
    if direction is None:
        if target is None:
            raise ValueError("need either a target point or a direction")
        direction = np.asarray(target, dtype=np.float64) - mu
        if not np.linalg.norm(direction) > 0:
            raise ValueError("sample mean coincides with the target; pass an explicit direction")
    if h is None:
        h = 1e-4 * np.sqrt(data.d)
    try:
        med = newton_charbonnier(centered, SolverConfig(eps=newton_eps))
    except MaxItersExceeded as exc:
        med = exc.result
    except CollinearData:
        med = None
    origin = np.zeros(data.d)
    row = {
        "h": float(h),
        "q": second_difference(centered, origin, direction, h),
        "q_median": None if med is None else second_difference(centered, med.point, direction, h),
        "mean_median_distance": None if med is None else float(np.linalg.norm(med.point)),
        "median_grad_norm": None if med is None else med.grad_norm,
        "median_certified_distance": None if med is None else med.certified_distance,
    }
    return row


def exp_growth_vs_dim(dims, seed=0, family="fourier", newton_eps=1e-8) -> ExperimentReport:
    """Numerical curvature of F near the median for n = 4d samples per dimension.

    ``q`` is measured at the sample mean along the line to the true mean 0,
    ``q_median`` at the computed median along the same line. The theoretical
    factor ``a / (2 b^3)`` of the growth bound is recorded alongside.
    """
    dims = [int(d) for d in dims]
    if not dims:
        raise ValueError("need at least one dimension")
    for d in dims:
        if family == "fourier" and (d % 2 or d < 4):
            raise ValueError(f"fourier family needs even d >= 4, got {d}")
        if d < 2:
            raise ValueError(f"dimension must be at least 2, got {d}")

    def cell(i, d):
        spec = GeneratorSpec(family, d, seed=seed)
        data = generate(spec, 4 * d, stream=i)
        row = {"d": d, "n": 4 * d}
        row.update(curvature_profile(data, target=spec.true_mean(), newton_eps=newton_eps))
        try:
            cert = growth_constants(data)
            row.update(a=cert.a, b=cert.b, growth_factor=cert.a / (2.0 * cert.b**3))
        except CollinearData:
            row.update(a=None, b=None, growth_factor=None)
        return row

    rows = map_cells(cell, dims)
    summary = {}
    if len(dims) >= 2:
        summary["slope_q"] = loglog_slope(dims, [r["q"] for r in rows])
        qm = [r["q_median"] for r in rows]
        if all(q is not None and q > 0 for q in qm):
            summary["slope_q_median"] = loglog_slope(dims, qm)
        gf = [r["growth_factor"] for r in rows]
        if all(g is not None for g in gf):
            summary["slope_growth_factor"] = loglog_slope(dims, gf)
    return ExperimentReport(
        "growth-dim",
        {"dims": dims, "family": family, "samples_per_dim": 4, "h_factor": 1e-4, "newton_eps": newton_eps},
        seed,
        rows,
        summary,
    )


# -- estimator comparison on returns -----------------------------------------


def exp_estimator_compare(
    returns,
    horizon=100,
    cutoffs=(),
    mom_ks=(5, 10),
    reps=10,
    rep_k=50,
    seed=0,
    assignment="sequential",
    inner_eps=1e-8,
) -> ExperimentReport:
    """Predict the mean of the next ``horizon`` rows from the rows seen so far.

    For each cutoff ``t`` every estimator sees rows ``[0, t)`` and is scored
    by the Euclidean distance to the mean of rows ``[t, t + horizon)``.
    Set ``reps=0`` to drop the replicated estimator.
    """
    values = returns.values if isinstance(returns, ReturnsMatrix) else np.asarray(returns, dtype=np.float64)
    T = values.shape[0]
    cutoffs = [int(t) for t in cutoffs]
    mom_ks = [int(k) for k in mom_ks]
    if not cutoffs:
        raise ValueError("need at least one cutoff")
    for t in cutoffs:
        if t < max(mom_ks, default=1) or t < 1:
            raise ValueError(f"cutoff {t} is smaller than the largest block count {max(mom_ks)}")
        if t + horizon > T:
            raise ValueError(f"cutoff {t} plus horizon {horizon} exceeds the {T} available rows")
        if reps and reps * t < rep_k:
            raise ValueError(f"cutoff {t} with {reps} replicas cannot fill {rep_k} blocks")

    def cell(i, t):
        past = Dataset(values[:t])
        target = values[t : t + horizon].mean(axis=0)
        estimates = {
            "mean": sample_mean(past),
            "median": coordinatewise_median(past),
            "g-median": robust_median(past, eps=inner_eps),
        }
        for k in mom_ks:
            cfg = MomConfig(k, assignment=assignment, seed=seed + i, inner_eps=inner_eps)
            estimates[f"gMOM{k}"] = geometric_mom(past, cfg)
        if reps:
            cfg = MomConfig(rep_k, assignment="sequential", seed=seed + i, inner_eps=inner_eps)
            estimates["gMOM-rep"] = replicated_mom(past, reps, cfg)
        return [
            {"cutoff": t, "estimator": name, "error": float(np.linalg.norm(est - target))}
            for name, est in estimates.items()
        ]

    rows = [r for block in map_cells(cell, cutoffs) for r in block]
    names = list(dict.fromkeys(r["estimator"] for r in rows))
    summary = {
        f"median_error_{n}": float(np.median([r["error"] for r in rows if r["estimator"] == n])) for n in names
    }
    params = {
        "T": T,
        "d": values.shape[1],
        "horizon": horizon,
        "cutoffs": cutoffs,
        "mom_ks": mom_ks,
        "reps": reps,
        "rep_k": rep_k,
        "assignment": assignment,
        "inner_eps": inner_eps,
    }
    return ExperimentReport("compare", params, seed, rows, summary)


# -- certificate benchmark ---------------------------------------------------


def exp_certificate_bench(spec: GeneratorSpec, n, eps_list, methods=METHODS, timing=False) -> ExperimentReport:
    """Run every solver at each tolerance and check certificates against a reference.

    The reference median is polished to a gradient norm near 1e-14. Solver
    failures are recorded in the ``error`` column and the run continues.
    Wall-clock times are only recorded with ``timing=True`` since they make
    reports non-reproducible.
    """
    data = generate(spec, n)
    ref = polish_median(data)
    f_ref = ref.objective
    cells = [(float(eps), m) for eps in eps_list for m in methods]

    def cell(i, item):
        eps, method = item
        row = {
            "eps": eps,
            "method": method,
            "iterations": None,
            "grad_norm": None,
            "certified_distance": None,
            "true_distance": None,
            "objective_gap": None,
            "sound": None,
            "error": None,
        }
        start = time.perf_counter()
        try:
            res = solve(data, method, SolverConfig(eps=eps))
        except MaxItersExceeded as exc:
            res = exc.result
            row["error"] = str(exc)
        except (SolverError, CollinearData) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            res = None
        if timing:
            row["wall_time"] = time.perf_counter() - start
        if res is not None:
            true = float(np.linalg.norm(res.point - ref.point))
            row.update(
                iterations=res.iterations,
                grad_norm=res.grad_norm,
                certified_distance=res.certified_distance,
                true_distance=true,
                objective_gap=res.objective - f_ref,
                sound=res.certified_distance is None or res.certified_distance >= true,
            )
        return row

    rows = map_cells(cell, cells)
    ok = [r for r in rows if r["error"] is None]
    summary = {
        "all_sound": all(r["sound"] for r in ok),
        "newton_certified": all(
            r["certified_distance"] is not None and r["certified_distance"] <= r["eps"]
            for r in ok
            if r["method"] == "newton"
        ),
        "agd_within_eps": all(r["objective_gap"] < r["eps"] for r in ok if r["method"] == "agd"),
        "reference_grad_norm": ref.grad_norm,
        "failures": len(rows) - len(ok),
    }
    params = {
        "family": spec.family,
        "d": spec.d,
        "n": n,
        "df": spec.df,
        "frac": spec.frac,
        "mag": spec.mag,
        "eps_list": [float(e) for e in eps_list],
        "methods": list(methods),
    }
    return ExperimentReport("cert-bench", params, spec.seed, rows, summary)
