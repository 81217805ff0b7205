"""Synthetic missing-location regression experiment.

Rentals-style geodata: points uniform in a disk of radius ``city_radius``
around the origin, price linear in [coords, distance-to-center, extra
features] plus Gaussian noise.  The exact coordinates are then hidden
into their containing ``square_side`` x ``square_side`` grid square, and
several estimators are compared on clean test data:

  * full_ols        - OLS with the true coordinates (baseline)
  * drop            - OLS without the coordinate columns
  * center_impute   - OLS with coordinates replaced by square centers
  * robust_square   - RERM, square uncertainty sets on the coordinates
  * robust_square_disk - RERM, squares intersected with the disk of the
                         known center distance

Excess error is each method's test MSE minus full_ols's on the same seed.
Wall times go to a separate timings file so result artifacts stay
byte-identical across runs.
"""

import concurrent.futures
import csv
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .builder import RermProblem, solve_rerm
from .losses import LossKind, LossSpec
from .sets import Box, FixCoords, NormBall, SetExpr
from .solver import SolverSettings

__all__ = ["ALL_METHODS", "ExperimentConfig", "ResultRow", "run_experiment"]

ALL_METHODS = (
    "drop",
    "center_impute",
    "robust_square",
    "robust_square_disk",
    "full_ols",
)


@dataclass(frozen=True)
class ExperimentConfig:
    n_train: int = 300
    n_test: int = 150
    d: int = 6
    square_side: float = 1.0
    city_radius: float = 7.0
    noise_std: float = 1.0
    seeds: tuple = tuple(range(10))
    methods: tuple = ALL_METHODS
    # test-MSE is insensitive to solver accuracy well past this point;
    # tighter settings only slow the robust fits down
    solver_eps: float = 1e-4
    max_workers: int | None = None

    def __post_init__(self):
        if self.square_side <= 0:
            raise ValueError("square_side must be positive")
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("n_train and n_test must be at least 1")
        if self.d < 3:
            raise ValueError("need at least [lon, lat, distance] features")
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")


@dataclass(frozen=True)
class ResultRow:
    method: str
    seed: int
    test_mse: float
    excess: float
    wall_time: float


def _make_dataset(cfg, seed):
    rng = np.random.default_rng(seed)
    n = cfg.n_train + cfg.n_test
    u = rng.random(n)
    ang = rng.random(n) * 2 * math.pi
    r = cfg.city_radius * np.sqrt(u)
    coords = np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
    dist = np.linalg.norm(coords, axis=1)
    extras = rng.normal(size=(n, cfg.d - 3))
    X = np.column_stack([coords, dist, extras])
    theta_star = rng.normal(size=cfg.d)
    y = X @ theta_star + cfg.noise_std * rng.normal(size=n)
    return X[: cfg.n_train], y[: cfg.n_train], X[cfg.n_train :], y[cfg.n_train :]


def _square_bounds(coords, side):
    idx = np.floor(coords / side)
    return idx * side, (idx + 1) * side


def _ols(X, y):
    return np.linalg.lstsq(X, y, rcond=None)[0]


def _mse(pred, y):
    return float(np.mean((pred - y) ** 2))


def _robust_sets(X_tr, lo, hi, with_disk, cfg):
    d = cfg.d
    sets = []
    for i in range(len(X_tr)):
        l = np.full(d, -np.inf)
        u = np.full(d, np.inf)
        l[:2], u[:2] = lo[i], hi[i]
        cons = [Box(l, u), FixCoords(X_tr[i, 2:], rng=(2, d))]
        if with_disk:
            cons.append(NormBall(2, np.zeros(2), float(X_tr[i, 2]), rng=(0, 2)))
        sets.append(SetExpr(d, tuple(cons)))
    return tuple(sets)


def _run_seed(cfg, seed):
    X_tr, y_tr, X_te, y_te = _make_dataset(cfg, seed)
    lo, hi = _square_bounds(X_tr[:, :2], cfg.square_side)
    centers = 0.5 * (lo + hi)
    X_center = X_tr.copy()
    X_center[:, :2] = centers

    settings = SolverSettings(eps_abs=cfg.solver_eps, eps_rel=cfg.solver_eps)
    loss = LossSpec(LossKind.PNORM, p=2)

    results = {}
    timings = {}
    base_theta = _ols(X_tr, y_tr)
    for method in cfg.methods:
        t0 = time.perf_counter()
        if method == "full_ols":
            theta = base_theta
            pred = X_te @ theta
        elif method == "drop":
            theta = _ols(X_tr[:, 2:], y_tr)
            pred = X_te[:, 2:] @ theta
        elif method == "center_impute":
            theta = _ols(X_center, y_tr)
            pred = X_te @ theta
        else:
            with_disk = method == "robust_square_disk"
            sets = _robust_sets(X_tr, lo, hi, with_disk, cfg)
            sol = solve_rerm(
                RermProblem(X_center, y_tr, sets, loss), settings, analytical=False
            )
            pred = X_te @ sol.theta
        results[method] = _mse(pred, y_te)
        timings[method] = time.perf_counter() - t0

    base = results.get("full_ols")
    rows = []
    for method in cfg.methods:
        excess = results[method] - base if base is not None else math.nan
        rows.append(
            ResultRow(method, seed, results[method], excess, timings[method])
        )
    return rows


def run_experiment(cfg, out_dir=None):
    """Runs every (seed, method); returns rows sorted by (method, seed).

    Seeds run in a process pool; output order is independent of
    completion order.  When out_dir is given, writes rows.csv,
    summary.json and timings.csv there.
    """
    seeds = list(cfg.seeds)
    workers = cfg.max_workers or min(len(seeds), os.cpu_count() or 1)
    if workers > 1 and len(seeds) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            per_seed = list(pool.map(_run_seed, [cfg] * len(seeds), seeds))
    else:
        per_seed = [_run_seed(cfg, s) for s in seeds]

    rows = sorted(
        (r for chunk in per_seed for r in chunk), key=lambda r: (r.method, r.seed)
    )
    summary = _summarize(rows)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "rows.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["method", "seed", "test_mse", "excess"])
            for r in rows:
                w.writerow([r.method, r.seed, repr(r.test_mse), repr(r.excess)])
        with open(os.path.join(out_dir, "timings.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["method", "seed", "wall_time"])
            for r in rows:
                w.writerow([r.method, r.seed, f"{r.wall_time:.6f}"])
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return rows, summary


def _summarize(rows):
    by_method = {}
    for r in rows:
        by_method.setdefault(r.method, []).append(r)
    out = {}
    for method, rs in sorted(by_method.items()):
        mses = np.array([r.test_mse for r in rs])
        exc = np.array([r.excess for r in rs])
        k = len(rs)
        out[method] = {
            "n_seeds": k,
            "mean_mse": float(mses.mean()),
            "stderr_mse": float(mses.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0,
            "mean_excess": float(exc.mean()),
            "stderr_excess": float(exc.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0,
        }
    return out
