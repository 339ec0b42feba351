"""Config-driven, reproducible, parallel experiment runner.

An experiment is a JSON config naming one of five kinds (harmonic_decay,
tail_index, survival, scaling_check, bound_check).  Work is cut into fixed
batches; batch b of scale point i always draws from stream_id
i * 2^32 + b regardless of the worker count, and results are merged in
batch order, so (config, seed) fully determines every numerical output.
Workers share nothing but the immutable config; any worker failure aborts
the whole run rather than emitting a partial record.
"""

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .ball_exit import mean_exit_time_constant
from .estimators import (
    critical_exponent,
    fit_cylinder_decay,
    fit_log_log_exponent,
    fit_tail_index,
    moment_estimate,
    hill_sweep,
)
from .geometry import Ball, Cylinder, InfiniteCylinder, ParabolaRegion, RegionSlice
from .rng import RngStream
from .stable_sampling import StableParams
from .svgplot import loglog_plot
from .walkers import clopper_pearson, survival_from_times
from .backend import kernels

KINDS = ("harmonic_decay", "tail_index", "survival", "scaling_check", "bound_check")

WOB_BATCH = 25_000
EULER_BATCH = 10_000
STREAM_SCALE_STRIDE = 2**32

CSV_HEADER = "scale,estimate,ci_lo,ci_hi,n"
Z99_SE = 2.5758293035489004  # two-sided 99% normal quantile


class ConfigError(ValueError):
    """Invalid experiment configuration (reported with field names)."""


class RunAborted(RuntimeError):
    """A worker failed; no partial results are emitted."""


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    region: ParabolaRegion
    alpha: float
    start: dict
    scales: tuple
    n_per_scale: int
    seed: int
    h: float = None
    t_max: float = None
    time_grid: tuple = None
    gamma: float = 1.0
    max_steps: int = 10**5
    moments: tuple = None
    step_halving: dict = None
    workers: int = None  # execution hint only; never echoed into records

    @property
    def params(self) -> StableParams:
        return StableParams(alpha=self.alpha, d=self.region.d)

    def start_point(self, scale: float) -> np.ndarray:
        d = self.region.d
        if self.start["mode"] == "fixed":
            return np.asarray(self.start["point"], dtype=np.float64)
        x = np.zeros(d)
        x[0] = self.start["fraction"] * scale
        return x

    def to_json(self) -> dict:
        obj = {
            "kind": self.kind,
            "region": self.region.to_json(),
            "alpha": self.alpha,
            "start": dict(self.start),
            "scales": list(self.scales),
            "n_per_scale": self.n_per_scale,
            "seed": self.seed,
            "gamma": self.gamma,
            "max_steps": self.max_steps,
        }
        if self.h is not None:
            obj["h"] = self.h
        if self.t_max is not None:
            obj["t_max"] = self.t_max
        if self.time_grid is not None:
            obj["time_grid"] = list(self.time_grid)
        if self.moments is not None:
            obj["moments"] = list(self.moments)
        if self.step_halving is not None:
            obj["step_halving"] = dict(self.step_halving)
        return obj


def _err(errors, field_name, message):
    errors.append(f"{field_name}: {message}")


def parse_config(obj: dict) -> ExperimentConfig:
    """Validate a config mapping; raises ConfigError naming each bad field."""
    errors = []
    kind = obj.get("kind")
    if kind not in KINDS:
        _err(errors, "kind", f"must be one of {', '.join(KINDS)}")
        raise ConfigError("; ".join(errors))

    region = None
    reg = obj.get("region")
    if not isinstance(reg, dict):
        _err(errors, "region", "must be an object {beta, a, d}")
    else:
        beta = reg.get("beta")
        a = reg.get("a", 1.0)
        d = reg.get("d")
        if not isinstance(beta, (int, float)) or not 0.0 < beta < 1.0:
            _err(errors, "region.beta", "profile exponent beta must lie in (0, 1)")
        if not isinstance(a, (int, float)) or not a > 0.0:
            _err(errors, "region.a", "profile scale a must be positive")
        if not isinstance(d, int) or d < 2:
            _err(errors, "region.d", "dimension d must be an integer >= 2")
        if not errors:
            region = ParabolaRegion(beta=float(beta), a=float(a), d=int(d))

    alpha = obj.get("alpha")
    if not isinstance(alpha, (int, float)) or not 0.0 < alpha < 2.0:
        _err(errors, "alpha", "stability index alpha must lie strictly in (0, 2); "
                              "alpha = 2 (Brownian) is excluded")

    start = obj.get("start")
    if not isinstance(start, dict) or start.get("mode") not in ("fixed", "axis_fraction"):
        _err(errors, "start", 'must be {"mode": "fixed", "point": [...]} or '
                              '{"mode": "axis_fraction", "fraction": f}')
    elif start["mode"] == "fixed":
        pt = start.get("point")
        if not isinstance(pt, list) or (region and len(pt) != region.d):
            _err(errors, "start.point", "must be a list of d coordinates")
    else:
        fr = start.get("fraction")
        if not isinstance(fr, (int, float)) or not 0.0 < fr <= 0.5:
            _err(errors, "start.fraction", "must lie in (0, 0.5] (bound hypothesis x1 <= s/2)")

    scales = obj.get("scales")
    if (not isinstance(scales, list) or not scales
            or any(not isinstance(s, (int, float)) or s <= 0 for s in scales)
            or any(b <= a for a, b in zip(scales, scales[1:]))):
        _err(errors, "scales", "must be a nonempty ascending list of positive numbers")

    n_per_scale = obj.get("n_per_scale")
    if not isinstance(n_per_scale, int) or n_per_scale < 1:
        _err(errors, "n_per_scale", "must be a positive integer")

    seed = obj.get("seed")
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        _err(errors, "seed", "must be an unsigned 64-bit integer")

    gamma = obj.get("gamma", 1.0)
    if not isinstance(gamma, (int, float)) or not 0.0 < gamma <= 1.0:
        _err(errors, "gamma", "ball shrink factor must lie in (0, 1]")

    max_steps = obj.get("max_steps", 10**5)
    if not isinstance(max_steps, int) or max_steps < 1:
        _err(errors, "max_steps", "must be a positive integer")

    h = obj.get("h")
    t_max = obj.get("t_max")
    needs_euler = kind in ("tail_index", "survival", "scaling_check")
    if needs_euler:
        if not isinstance(h, (int, float)) or h <= 0.0:
            _err(errors, "h", "Euler step must be positive")
        if not isinstance(t_max, (int, float)) or (isinstance(h, (int, float)) and t_max <= h):
            _err(errors, "t_max", "censoring horizon must exceed the step h")

    time_grid = obj.get("time_grid")
    if time_grid is not None:
        if (not isinstance(time_grid, list) or len(time_grid) < 3
                or any(not isinstance(t, (int, float)) or t <= 0 for t in time_grid)
                or any(b <= a for a, b in zip(time_grid, time_grid[1:]))):
            _err(errors, "time_grid", "must be an ascending list of positive times")
        elif isinstance(t_max, (int, float)) and time_grid[-1] > t_max:
            _err(errors, "time_grid", "must not extend past t_max")

    moments = obj.get("moments")
    if moments is not None and (
            not isinstance(moments, list)
            or any(not isinstance(p, (int, float)) or p < 0 for p in moments)):
        _err(errors, "moments", "must be a list of nonnegative moment orders")

    sh = obj.get("step_halving")
    if sh is not None:
        if not isinstance(sh, dict) or not isinstance(sh.get("n"), int) or sh["n"] < 1:
            _err(errors, "step_halving", 'must be {"n": walks} (runs the coupled '
                                         "h/2 diagnostic)")

    workers = obj.get("workers")
    if workers is not None and (not isinstance(workers, int) or workers < 1):
        _err(errors, "workers", "must be a positive integer")

    if errors:
        raise ConfigError("; ".join(errors))

    cfg = ExperimentConfig(
        kind=kind, region=region, alpha=float(alpha), start=start,
        scales=tuple(float(s) for s in scales), n_per_scale=n_per_scale,
        seed=seed, h=None if h is None else float(h),
        t_max=None if t_max is None else float(t_max),
        time_grid=None if time_grid is None else tuple(float(t) for t in time_grid),
        gamma=float(gamma), max_steps=max_steps,
        moments=None if moments is None else tuple(float(p) for p in moments),
        step_halving=sh, workers=workers,
    )
    _validate_starts(cfg)
    return cfg


def _validate_starts(cfg: ExperimentConfig):
    """Start points must be interior to the walked domain at every scale."""
    if cfg.kind == "scaling_check":
        return  # scaling comparisons always start at the center
    for s in cfg.scales:
        x0 = cfg.start_point(s)
        dom = _domain_for(cfg, s)
        ok = dom.is_interior(x0) if hasattr(dom, "is_interior") else dom.contains(x0)
        if not ok:
            raise ConfigError(f"start: point {x0.tolist()} is not interior to the "
                              f"domain at scale {s}")


def _domain_for(cfg: ExperimentConfig, scale: float):
    if cfg.kind in ("harmonic_decay",):
        return RegionSlice(cfg.region, 0.0, scale)
    if cfg.kind == "bound_check":
        return RegionSlice(cfg.region, 0.0, scale)
    if cfg.kind == "tail_index":
        return cfg.region
    if cfg.kind == "survival":
        return InfiniteCylinder(radius=scale, d=cfg.region.d)
    if cfg.kind == "scaling_check":
        return Ball(radius=scale, d=cfg.region.d)
    raise ValueError(cfg.kind)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    return parse_config(obj)


# ---------------------------------------------------------------------------
# batch tasks (top-level functions: picklable under any start method)


def _batches(n_total, batch_size):
    out = []
    done = 0
    b = 0
    while done < n_total:
        m = min(batch_size, n_total - done)
        out.append((b, m))
        done += m
        b += 1
    return out


def _wob_task(args):
    """One walk-on-balls batch; returns classification counts."""
    (seed, stream_id, kind, dom_params, x0, alpha, d, gamma, max_steps, n,
     beta, a, s_cut) = args
    kappa = mean_exit_time_constant(d, alpha)
    bg = RngStream(seed, stream_id).bit_generator()
    pts, steps, _, status = kernels.wob_batch(bg, kind, dom_params, x0, alpha,
                                              gamma, max_steps, n, kappa)
    ok = status == 0
    x1 = pts[:, 0]
    rt = np.sqrt(np.sum(pts[:, 1:] ** 2, axis=1))
    with np.errstate(invalid="ignore"):
        in_region = (x1 > 0.0) & (rt < a * np.where(x1 > 0.0, x1, 0.0) ** beta)
    hits = int(np.count_nonzero(ok & in_region & (x1 >= s_cut)))
    return {
        "hits": hits,
        "exited": int(np.count_nonzero(ok)),
        "max_steps_exceeded": int(np.count_nonzero(~ok)),
        "total_steps": int(steps.sum()),
    }


def _euler_task(args):
    """One Euler batch; returns exit times and censoring flags."""
    (seed, stream_id, kind, dom_params, x0, alpha, h, t_max, n) = args
    bg = RngStream(seed, stream_id).bit_generator()
    times, censored, _ = kernels.euler_batch(bg, kind, dom_params, x0, alpha,
                                             h, t_max, n)
    return {"times": times, "censored": censored}


def _euler_coupled_task(args):
    (seed, stream_id, kind, dom_params, x0, alpha, h, t_max, n) = args
    bg = RngStream(seed, stream_id).bit_generator()
    tf, cf, tc, cc, _ = kernels.euler_batch_coupled(bg, kind, dom_params, x0,
                                                    alpha, h, t_max, n)
    return {"times_fine": tf, "cens_fine": cf, "times_coarse": tc, "cens_coarse": cc}


_TASK_FUNCS = {
    "wob": _wob_task,
    "euler": _euler_task,
    "euler_coupled": _euler_coupled_task,
}


def _dispatch(task):
    name, args = task
    return _TASK_FUNCS[name](args)


def _run_tasks(tasks, workers):
    """Execute tasks and return results in task order (merge is order-fixed,
    so output is independent of the worker count)."""
    if workers <= 1 or len(tasks) <= 1:
        return [_dispatch(t) for t in tasks]
    try:
        import multiprocessing as mp

        ctx = mp.get_context("fork")
    except ValueError:  # platforms without fork
        ctx = None
    try:
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            return list(pool.map(_dispatch, tasks, chunksize=1))
    except Exception as exc:
        raise RunAborted(f"worker failure: {exc}") from exc


# ---------------------------------------------------------------------------
# experiment drivers


def _predicted(cfg: ExperimentConfig) -> dict:
    p0 = critical_exponent(cfg.region.d, cfg.alpha, cfg.region.beta)
    ab = cfg.alpha * cfg.region.beta
    return {
        "p0": p0,
        "minus_p0": -p0,
        "minus_alpha_beta_p0": -ab * p0,
        "minus_alpha_beta_p0_minus_1": -ab * (p0 - 1.0),
    }


def _wob_scale_tasks(cfg, scale_idx, scale, domain, n, s_cut):
    kind, dom_params = domain.kernel_encoding()
    x0 = cfg.start_point(scale)
    tasks = []
    for b, m in _batches(n, WOB_BATCH):
        sid = scale_idx * STREAM_SCALE_STRIDE + b
        tasks.append(("wob", (cfg.seed, sid, kind, dom_params, x0, cfg.alpha,
                              cfg.region.d, cfg.gamma, cfg.max_steps, m,
                              cfg.region.beta, cfg.region.a, s_cut)))
    return tasks


def _merge_wob(batches):
    out = {"hits": 0, "exited": 0, "max_steps_exceeded": 0, "total_steps": 0}
    for b in batches:
        for key in out:
            out[key] += b[key]
    return out


def _scale_entry(cfg, scale_idx, scale, merged, n):
    n_eff = merged["exited"]
    if n_eff == 0:
        raise RunAborted(f"scale {scale}: every walk exceeded the step budget")
    lo, hi = clopper_pearson(merged["hits"], n_eff, level=0.99)
    n_batches = len(_batches(n, WOB_BATCH))
    base = scale_idx * STREAM_SCALE_STRIDE
    return {
        "scale": scale,
        "x0": cfg.start_point(scale).tolist(),
        "n": n,
        "n_exited": n_eff,
        "hits": merged["hits"],
        "estimate": merged["hits"] / n_eff,
        "ci_lo": lo,
        "ci_hi": hi,
        "max_steps_exceeded": merged["max_steps_exceeded"],
        "mean_wob_steps": merged["total_steps"] / n,
        "stream_ids": [base, base + n_batches - 1],
    }


def _run_harmonic_decay(cfg: ExperimentConfig, workers: int) -> dict:
    tasks = []
    spans = []
    for i, s in enumerate(cfg.scales):
        ts = _wob_scale_tasks(cfg, i, s, RegionSlice(cfg.region, 0.0, s),
                              cfg.n_per_scale, s_cut=s)
        spans.append(len(ts))
        tasks.extend(ts)
    results = _run_tasks(tasks, workers)
    record_scales = []
    pos = 0
    for i, s in enumerate(cfg.scales):
        merged = _merge_wob(results[pos:pos + spans[i]])
        pos += spans[i]
        record_scales.append(_scale_entry(cfg, i, s, merged, cfg.n_per_scale))
    pred = _predicted(cfg)
    predicted_slope = (pred["minus_alpha_beta_p0"] if cfg.start["mode"] == "fixed"
                       else pred["minus_alpha_beta_p0_minus_1"])
    fit_obj = None
    if len(record_scales) >= 3:
        fit = fit_log_log_exponent(
            [(e["scale"], e["estimate"], e["ci_lo"], e["ci_hi"]) for e in record_scales],
            predicted=predicted_slope,
        )
        fit_obj = {
            "slope": fit.slope, "stderr": fit.stderr, "intercept": fit.intercept,
            "window": list(fit.window), "predicted": fit.predicted,
            "n_points": fit.n_points, "r_squared": fit.r_squared,
        }
    return {"scales": record_scales, "fit": fit_obj}


def _euler_scale_tasks(cfg, scale_idx, domain, x0, n, h, t_max, coupled=False):
    kind, dom_params = domain.kernel_encoding()
    name = "euler_coupled" if coupled else "euler"
    batch = EULER_BATCH
    tasks = []
    for b, m in _batches(n, batch):
        sid = scale_idx * STREAM_SCALE_STRIDE + b
        tasks.append((name, (cfg.seed, sid, kind, dom_params, x0, cfg.alpha,
                             h, t_max, m)))
    return tasks


def _default_time_grid(cfg) -> np.ndarray:
    if cfg.time_grid is not None:
        return np.asarray(cfg.time_grid, dtype=np.float64)
    lo = 10.0 * cfg.h
    return np.geomspace(lo, cfg.t_max, 96)


def _run_tail_index(cfg: ExperimentConfig, workers: int) -> dict:
    x0 = cfg.start_point(cfg.scales[0])
    tasks = _euler_scale_tasks(cfg, 0, cfg.region, x0, cfg.n_per_scale,
                               cfg.h, cfg.t_max)
    results = _run_tasks(tasks, workers)
    times = np.concatenate([r["times"] for r in results])
    censored = np.concatenate([r["censored"] for r in results]).astype(bool)
    grid = _default_time_grid(cfg)
    curve = survival_from_times(times, censored, grid)
    pred = _predicted(cfg)
    boot_stream = RngStream(cfg.seed, (len(cfg.scales) + 7) * STREAM_SCALE_STRIDE)
    tail = fit_tail_index(times, censored, predicted=pred["p0"], bootstrap=48,
                          rng=boot_stream)
    n_unc = tail.n_uncensored
    ks = sorted({max(1, min(int(k), n_unc - 1))
                 for k in np.geomspace(max(8, tail.k / 8), min(8 * tail.k, n_unc // 5), 9)})
    sweep = hill_sweep(times[~censored], ks)
    p0 = pred["p0"]
    morders = cfg.moments if cfg.moments is not None else (0.5 * p0, 1.2 * p0)
    moments = []
    for p in morders:
        m = moment_estimate(times[~censored], float(censored.mean()), p)
        moments.append({
            "p": m.p, "estimate": m.value,
            "rel_change_last_doubling": m.rel_change_last_doubling,
            "stable": m.stable,
            "doubling_estimates": list(m.doubling_estimates[-8:]),
        })
    out = {
        "scales": [{
            "scale": cfg.scales[0], "x0": x0.tolist(), "n": cfg.n_per_scale,
            "censored": int(censored.sum()),
            "stream_ids": [0, len(tasks) - 1],
        }],
        "survival_curve": _curve_json(curve),
        "fit": {
            "slope": tail.survival.slope, "stderr": tail.survival.stderr,
            "intercept": tail.survival.intercept,
            "window": list(tail.survival.window),
            "predicted": tail.survival.predicted,
            "n_points": tail.survival.n_points,
            "r_squared": tail.survival.r_squared,
        },
        "hill": {
            "tail_index": tail.hill.slope, "stderr": tail.hill.stderr,
            "k": tail.k, "predicted": tail.hill.predicted,
            "sweep": [{"k": k, "tail_index": q, "stderr": se} for k, q, se in sweep],
        },
        "moments": moments,
    }
    if cfg.step_halving is not None:
        out["step_halving"] = _step_halving(cfg, tail, workers)
    return out


def _step_halving(cfg, tail, workers) -> dict:
    """Coupled h/2 rerun: the coarse chain observes the fine trajectory at
    every other grid point, so the fitted-slope difference isolates the
    discretization effect."""
    n = cfg.step_halving["n"]
    h_fine = 0.5 * cfg.h
    x0 = cfg.start_point(cfg.scales[0])
    tasks = _euler_scale_tasks(cfg, len(cfg.scales) + 1, cfg.region, x0, n,
                               h_fine, cfg.t_max, coupled=True)
    results = _run_tasks(tasks, workers)
    tf = np.concatenate([r["times_fine"] for r in results])
    cf = np.concatenate([r["cens_fine"] for r in results]).astype(bool)
    tc = np.concatenate([r["times_coarse"] for r in results])
    cc = np.concatenate([r["cens_coarse"] for r in results]).astype(bool)
    window = tail.survival.window
    fit_fine = fit_tail_index(tf, cf, window=window, predicted=tail.survival.predicted)
    fit_coarse = fit_tail_index(tc, cc, window=window, predicted=tail.survival.predicted)
    shift = fit_coarse.survival.slope - fit_fine.survival.slope
    return {
        "h_fine": h_fine, "n": n,
        "slope_fine": fit_fine.survival.slope,
        "slope_coarse": fit_coarse.survival.slope,
        "shift": shift,
        "main_fit_stderr": tail.survival.stderr,
        "within_stderr": bool(abs(shift) < tail.survival.stderr),
    }


def _curve_json(curve) -> dict:
    return {
        "times": curve.times.tolist(),
        "survival": curve.survival.tolist(),
        "ci_lo": curve.ci_lo.tolist(),
        "ci_hi": curve.ci_hi.tolist(),
        "n": curve.n,
        "censored_fraction": curve.censored_fraction,
    }


def _decay_window(curve):
    """Fit window for the exponential regime: from where survival falls
    through 0.5 to where fewer than ~30 walks remain alive."""
    s = curve.survival
    lo_idx = int(np.argmax(s <= 0.5)) if np.any(s <= 0.5) else 0
    floor = max(30.0 / curve.n, 1e-4)
    alive = s >= floor
    hi_idx = int(np.max(np.nonzero(alive))) if np.any(alive) else s.size - 1
    if hi_idx <= lo_idx + 2:
        raise RunAborted("survival curve leaves no usable decay window")
    return float(curve.times[lo_idx]), float(curve.times[hi_idx])


def _run_survival(cfg: ExperimentConfig, workers: int) -> dict:
    tasks = []
    spans = []
    for i, r in enumerate(cfg.scales):
        dom = InfiniteCylinder(radius=r, d=cfg.region.d)
        ts = _euler_scale_tasks(cfg, i, dom, cfg.start_point(r), cfg.n_per_scale,
                                cfg.h, cfg.t_max)
        spans.append(len(ts))
        tasks.extend(ts)
    results = _run_tasks(tasks, workers)
    grid = _default_time_grid(cfg)
    entries = []
    pos = 0
    for i, r in enumerate(cfg.scales):
        rs = results[pos:pos + spans[i]]
        pos += spans[i]
        times = np.concatenate([x["times"] for x in rs])
        censored = np.concatenate([x["censored"] for x in rs]).astype(bool)
        curve = survival_from_times(times, censored, grid)
        window = _decay_window(curve)
        fit = fit_cylinder_decay(curve, window)
        base = i * STREAM_SCALE_STRIDE
        entries.append({
            "scale": r, "x0": cfg.start_point(r).tolist(), "n": cfg.n_per_scale,
            "censored": int(censored.sum()),
            "lambda_hat": fit.lambda_hat, "stderr": fit.stderr,
            "window": list(fit.window), "r_squared": fit.r_squared,
            "curve": _curve_json(curve),
            "stream_ids": [base, base + spans[i] - 1],
        })
    out = {"scales": entries}
    if len(entries) >= 3:
        fit = fit_log_log_exponent(
            [(e["scale"], e["lambda_hat"],
              max(e["lambda_hat"] - Z99_SE * e["stderr"], 1e-300),
              e["lambda_hat"] + Z99_SE * e["stderr"]) for e in entries],
            predicted=-cfg.alpha,
        )
        out["fit"] = {
            "slope": fit.slope, "stderr": fit.stderr, "intercept": fit.intercept,
            "window": list(fit.window), "predicted": fit.predicted,
            "n_points": fit.n_points, "r_squared": fit.r_squared,
        }
    if len(entries) >= 2:
        out["rate_ratios"] = [
            {
                "scale_ratio": b["scale"] / a["scale"],
                "rate_ratio": b["lambda_hat"] / a["lambda_hat"],
                "predicted": (b["scale"] / a["scale"]) ** (-cfg.alpha),
            }
            for a, b in zip(entries, entries[1:])
        ]
    return out


def _run_scaling_check(cfg: ExperimentConfig, workers: int) -> dict:
    r = cfg.scales[0]
    x0 = np.zeros(cfg.region.d)  # the scaling law is checked from the center
    unit = Ball(radius=1.0, d=cfg.region.d)
    big = Ball(radius=r, d=cfg.region.d)
    ralpha = r**cfg.alpha
    tasks_unit = _euler_scale_tasks(cfg, 0, unit, x0, cfg.n_per_scale, cfg.h,
                                    cfg.t_max)
    tasks_big = _euler_scale_tasks(cfg, 1, big, x0, cfg.n_per_scale,
                                   ralpha * cfg.h, ralpha * cfg.t_max)
    n_u = len(tasks_unit)
    results = _run_tasks(tasks_unit + tasks_big, workers)
    t_unit = np.concatenate([x["times"] for x in results[:n_u]])
    c_unit = np.concatenate([x["censored"] for x in results[:n_u]]).astype(bool)
    t_big = np.concatenate([x["times"] for x in results[n_u:]])
    c_big = np.concatenate([x["censored"] for x in results[n_u:]]).astype(bool)
    scaled = ralpha * t_unit[~c_unit]
    big_unc = t_big[~c_big]
    ks = _ks_distance(scaled, big_unc)
    grid = np.geomspace(ralpha * cfg.h * 4.0, ralpha * cfg.t_max, 64)
    curve = survival_from_times(t_big, c_big, grid)
    return {
        "scales": [{
            "scale": r, "n": cfg.n_per_scale,
            "censored_unit": int(c_unit.sum()), "censored_scaled": int(c_big.sum()),
            "stream_ids": [0, STREAM_SCALE_STRIDE + len(tasks_big) - 1],
        }],
        "ks_distance": ks,
        "n_unit": int((~c_unit).sum()), "n_scaled": int((~c_big).sum()),
        "survival_curve": _curve_json(curve),
    }


def _ks_distance(a, b):
    """Two-sample Kolmogorov-Smirnov statistic."""
    a = np.sort(np.asarray(a))
    b = np.sort(np.asarray(b))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def _run_bound_check(cfg: ExperimentConfig, workers: int) -> dict:
    tasks = []
    spans = []
    for i, s in enumerate(cfg.scales):
        slc = RegionSlice(cfg.region, 0.0, s)
        cyl = Cylinder(s=s, beta=cfg.region.beta, d=cfg.region.d)
        ts_s = _wob_scale_tasks(cfg, 2 * i, s, slc, cfg.n_per_scale, s_cut=s)
        ts_c = _wob_scale_tasks(cfg, 2 * i + 1, s, cyl, cfg.n_per_scale, s_cut=s)
        spans.append((len(ts_s), len(ts_c)))
        tasks.extend(ts_s)
        tasks.extend(ts_c)
    results = _run_tasks(tasks, workers)
    comparisons = []
    entries = []
    pos = 0
    for i, s in enumerate(cfg.scales):
        ns, nc = spans[i]
        m_s = _merge_wob(results[pos:pos + ns])
        m_c = _merge_wob(results[pos + ns:pos + ns + nc])
        pos += ns + nc
        e_s = _scale_entry(cfg, 2 * i, s, m_s, cfg.n_per_scale)
        e_c = _scale_entry(cfg, 2 * i + 1, s, m_c, cfg.n_per_scale)
        hw_s = 0.5 * (e_s["ci_hi"] - e_s["ci_lo"])
        hw_c = 0.5 * (e_c["ci_hi"] - e_c["ci_lo"])
        slack = 2.0 * (hw_s + hw_c)
        comparisons.append({
            "scale": s,
            "slice_estimate": e_s["estimate"],
            "cylinder_estimate": e_c["estimate"],
            "slack": slack,
            "dominated": bool(e_s["estimate"] <= e_c["estimate"] + slack),
        })
        e_s["domain"] = "slice"
        e_c["domain"] = "cylinder"
        entries.extend([e_s, e_c])
    return {"scales": entries, "comparisons": comparisons,
            "all_dominated": bool(all(c["dominated"] for c in comparisons))}


_RUNNERS = {
    "harmonic_decay": _run_harmonic_decay,
    "tail_index": _run_tail_index,
    "survival": _run_survival,
    "scaling_check": _run_scaling_check,
    "bound_check": _run_bound_check,
}


def default_workers() -> int:
    env = os.environ.get("STABLE_EXIT_WORKERS")
    if env:
        try:
            w = int(env)
            if w >= 1:
                return w
        except ValueError:
            pass
    return os.cpu_count() or 1


def run_experiment(config: ExperimentConfig, workers: int = None) -> dict:
    """Execute the experiment and return the RunRecord mapping.

    The record embeds the config echo, seed, stream ranges and code version,
    so any estimate can be re-run exactly; everything except
    wall_time_seconds is a pure function of (config, seed).
    """
    if workers is None:
        workers = config.workers if config.workers is not None else default_workers()
    t0 = time.monotonic()
    body = _RUNNERS[config.kind](config, workers)
    record = {
        "kind": config.kind,
        "config": config.to_json(),
        "seed": config.seed,
        "code_version": __version__,
        "predicted": _predicted(config),
        "rng": {"generator": "philox4x64", "key": "(seed, stream_id)",
                "scale_stride": STREAM_SCALE_STRIDE},
    }
    record.update(body)
    record["max_steps_exceeded_total"] = sum(
        e.get("max_steps_exceeded", 0) for e in body.get("scales", []))
    record["censored_total"] = sum(e.get("censored", 0) for e in body.get("scales", []))
    record["wall_time_seconds"] = time.monotonic() - t0
    return record


# ---------------------------------------------------------------------------
# outputs


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf" if obj > 0 else "-inf"
    return obj


def _csv_rows(record) -> list:
    kind = record["kind"]
    rows = []
    if kind in ("harmonic_decay", "bound_check"):
        for e in record["scales"]:
            rows.append((e["scale"], e["estimate"], e["ci_lo"], e["ci_hi"], e["n"]))
    elif kind in ("tail_index", "scaling_check"):
        c = record["survival_curve"]
        for t, sv, lo, hi in zip(c["times"], c["survival"], c["ci_lo"], c["ci_hi"]):
            rows.append((t, sv, lo, hi, c["n"]))
    elif kind == "survival":
        for e in record["scales"]:
            lam = e["lambda_hat"]
            se = e["stderr"]
            rows.append((e["scale"], lam, lam - Z99_SE * se, lam + Z99_SE * se, e["n"]))
    return rows


def _plot(record, path):
    kind = record["kind"]
    fit = record.get("fit")
    if kind in ("harmonic_decay", "bound_check"):
        pts = [(e["scale"], e["estimate"], e["ci_lo"], e["ci_hi"])
               for e in record["scales"] if e["estimate"] > 0]
        xlabel, ylabel = "scale s", "escape probability"
    elif kind in ("tail_index", "scaling_check"):
        c = record["survival_curve"]
        pts = [(t, sv, lo, hi) for t, sv, lo, hi in
               zip(c["times"], c["survival"], c["ci_lo"], c["ci_hi"]) if sv > 0]
        xlabel, ylabel = "t", "P(tau > t)"
    else:
        pts = [(e["scale"], e["lambda_hat"],
                max(e["lambda_hat"] - Z99_SE * e["stderr"], 1e-12),
                e["lambda_hat"] + Z99_SE * e["stderr"]) for e in record["scales"]]
        xlabel, ylabel = "transverse radius", "decay rate"
    if not pts:
        raise RunAborted("no positive estimates to plot")
    x_a, y_a = pts[0][0], pts[0][1]
    lines = []
    if fit is not None:
        anchor_y = math.exp(fit["intercept"] + fit["slope"] * math.log(x_a))
        lines.append((f"fit: slope={fit['slope']:.3f} +/- {fit['stderr']:.3f}",
                      fit["slope"], x_a, anchor_y, "#c02020"))
        lines.append((f"predicted: slope={fit['predicted']:.3f}",
                      fit["predicted"], x_a, anchor_y, "#2040c0"))
    else:
        pred = record["predicted"]["minus_p0"]
        ks = record.get("ks_distance")
        label = f"fit: ks={ks:.4f}" if ks is not None else "fit: n/a"
        lines.append((label, 0.0, x_a, y_a, "#c02020"))
        lines.append((f"predicted: tail slope {pred:.3f}", pred, x_a, y_a, "#2040c0"))
    loglog_plot(path, pts, lines, f"{kind} (seed {record['seed']})", xlabel, ylabel)


def emit_outputs(record: dict, out_dir) -> dict:
    """Write results.json, curves.csv and plot.svg; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "results": os.path.join(out_dir, "results.json"),
        "curves": os.path.join(out_dir, "curves.csv"),
        "plot": os.path.join(out_dir, "plot.svg"),
    }
    with open(paths["results"], "w", encoding="utf-8") as fh:
        json.dump(_jsonify(record), fh, sort_keys=True, indent=2)
        fh.write("\n")
    with open(paths["curves"], "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in _csv_rows(record):
            fh.write(",".join(repr(float(v)) if isinstance(v, float) else str(v)
                              for v in row) + "\n")
    _plot(record, paths["plot"])
    return paths
