"""Monte Carlo harness: selection quality per (penalty, criterion), df comparison, timings.

Replicate ``r`` of a run seeded with ``seed`` always uses child ``r`` of
``SeedSequence(seed)``, so results do not depend on thread count or on
which penalties/criteria are requested alongside.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .criteria import CRITERIA, cross_validate, estimate_tau2, evaluate, select
from .dataset import TrueModel, example_model, generate_gaussian, standardize
from .dof import dense_series, reduced_replay
from .errors import InputError
from .path import PathOptions, fit, quiet_sign_changes
from .penalty import PenaltySpec

__all__ = [
    "SimConfig",
    "CellSummary",
    "SimResult",
    "DfComparison",
    "run_example",
    "compare_df",
    "bench_timing",
    "loglog_slope",
    "worker_count",
]

ALL_CRITERIA = CRITERIA + ("cv",)


def worker_count() -> int:
    """Thread cap from ``GPSSELECT_THREADS`` (default 1)."""
    raw = os.environ.get("GPSSELECT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"GPSSELECT_THREADS must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class SimConfig:
    example: Optional[int] = 1
    reps: int = 200
    seed: int = 1
    penalties: tuple[PenaltySpec, ...] = (PenaltySpec("lasso", 0.0),)
    criteria: tuple[str, ...] = ("cp", "aicc", "gcv", "bic", "cv")
    tau2_mode: str = "estimated"
    model: Optional[TrueModel] = None
    n: Optional[int] = None
    step_budget: int = 20000
    folds: int = 10
    aicc_form: str = "plus"
    se_frame: str = "centered"

    def __post_init__(self):
        if self.se_frame not in ("centered", "raw"):
            raise InputError("se_frame must be 'centered' or 'raw'")
        if self.reps < 2:
            raise InputError(f"reps must be at least 2, got {self.reps}")
        if self.tau2_mode not in ("true", "estimated"):
            raise InputError("tau2_mode must be 'true' or 'estimated'")
        bad = [c for c in self.criteria if c not in ALL_CRITERIA]
        if bad:
            raise InputError(f"unknown criteria {bad}; choose from {ALL_CRITERIA}")
        if self.model is None and self.example is None:
            raise InputError("give either an example id or a custom model")

    def resolve(self) -> tuple[int, TrueModel]:
        if self.model is not None:
            if self.n is None:
                raise InputError("custom model needs n")
            return self.n, self.model
        n, model = example_model(self.example)
        return (self.n or n), model

    def replicate_seeds(self) -> list[np.random.SeedSequence]:
        return np.random.SeedSequence(self.seed).spawn(self.reps)


@dataclass
class CellSummary:
    """Squared-error summary over replicates for one (penalty, criterion) cell.

    ``zz`` is ``None`` when the true coefficient vector has no zeros.
    """

    se_values: np.ndarray
    zz_hits: int
    zz_total: int
    nn_hits: int
    nn_total: int

    @property
    def mse(self) -> float:
        return float(self.se_values.mean())

    @property
    def sd(self) -> float:
        return float(self.se_values.std(ddof=1))

    @property
    def mse_se(self) -> float:
        return self.sd / math.sqrt(self.se_values.size)

    @property
    def zz(self) -> Optional[float]:
        return self.zz_hits / self.zz_total if self.zz_total else None

    @property
    def nn(self) -> Optional[float]:
        return self.nn_hits / self.nn_total if self.nn_total else None

    def to_dict(self) -> dict:
        return {
            "mse": self.mse,
            "sd": self.sd,
            "mse_se": self.mse_se,
            "zz": self.zz,
            "nn": self.nn,
            "zz_den": self.zz_total,
            "nn_den": self.nn_total,
        }


@dataclass
class SimResult:
    config: SimConfig
    cells: dict[tuple[str, str], CellSummary] = field(default_factory=dict)

    def cell(self, penalty: str, criterion: str) -> CellSummary:
        return self.cells[(penalty, criterion)]

    def rows(self) -> list[dict]:
        ex = self.config.example if self.config.model is None else "custom"
        out = []
        for (pen, crit), c in self.cells.items():
            out.append({"example": ex, "penalty": pen, "criterion": crit, **c.to_dict()})
        return out


def _squared_error(design, raw, beta_std, frame: str) -> float:
    """``||mu_hat - X beta_true||^2 / N`` on the realized design.

    ``centered`` compares centered fits (the intercept is a nuisance removed
    by centering); ``raw`` also charges the estimated intercept.
    """
    if frame == "centered":
        diff = design.X @ beta_std - (raw.mu - raw.mu.mean())
    else:
        diff = design.y_mean + design.X @ beta_std - raw.mu
    return float(diff @ diff / raw.N)


def _replicate(args):
    """One data set: returns ``{(penalty, criterion): (se, beta_std)}`` plus the true beta."""
    cfg, n, model, ss = args
    data_ss, cv_ss = ss.spawn(2)
    raw = generate_gaussian(model, n, data_ss)
    design = standardize(raw)
    tau2 = model.sigma ** 2 if cfg.tau2_mode == "true" else None
    if tau2 is None and any(c in ("cp", "aic", "bic") for c in cfg.criteria):
        tau2 = estimate_tau2(design)
    opts = PathOptions(step_budget=cfg.step_budget)
    cv_seed = int(cv_ss.generate_state(1)[0])
    out = {}
    for pen in cfg.penalties:
        path = fit(design, pen, opts)
        df = reduced_replay(path)
        table = evaluate(path, df, tau2, aicc_form=cfg.aicc_form)
        for crit in cfg.criteria:
            if crit == "cv":
                beta = cross_validate(design, pen, opts, cfg.folds, cv_seed).selection.beta_std
            else:
                beta = select(path, table, crit).beta_std
            out[(pen.label(), crit)] = (_squared_error(design, raw, beta, cfg.se_frame), beta)
    return out


def _quiet(fn):
    def run(item):
        with quiet_sign_changes():
            return fn(item)
    return run


def _map(fn, items):
    fn = _quiet(fn)
    workers = worker_count()
    if workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _summarize(results, beta_true, keys) -> dict[tuple[str, str], CellSummary]:
    zero = np.asarray(beta_true) == 0
    cells = {}
    for key in keys:
        se = np.array([r[key][0] for r in results])
        betas = np.array([r[key][1] for r in results])
        cells[key] = CellSummary(
            se_values=se,
            zz_hits=int(((betas == 0) & zero).sum()),
            zz_total=int(zero.sum()) * len(results),
            nn_hits=int(((betas != 0) & ~zero).sum()),
            nn_total=int((~zero).sum()) * len(results),
        )
    return cells


def run_example(config: SimConfig) -> SimResult:
    n, model = config.resolve()
    seeds = config.replicate_seeds()
    results = _map(_replicate, [(config, n, model, ss) for ss in seeds])
    keys = [(pen.label(), c) for pen in config.penalties for c in config.criteria]
    return SimResult(config, _summarize(results, model.beta_true, keys))


@dataclass
class DfComparison:
    """Paired lasso comparison of Cp with tracked df versus the nonzero count."""

    gps: CellSummary
    zou: CellSummary

    @property
    def diff(self) -> np.ndarray:
        return self.gps.se_values - self.zou.se_values

    @property
    def mean_diff(self) -> float:
        return float(self.diff.mean())

    @property
    def diff_se(self) -> float:
        d = self.diff
        return float(d.std(ddof=1) / math.sqrt(d.size))

    def ci95(self) -> tuple[float, float]:
        h = 1.959963984540054 * self.diff_se
        return self.mean_diff - h, self.mean_diff + h

    def to_dict(self) -> dict:
        lo, hi = self.ci95()
        return {
            "gps": self.gps.to_dict(),
            "zou": self.zou.to_dict(),
            "mean_diff": self.mean_diff,
            "diff_se": self.diff_se,
            "ci95": [lo, hi],
        }


def _replicate_df(args):
    cfg, n, model, ss = args
    data_ss, _ = ss.spawn(2)
    raw = generate_gaussian(model, n, data_ss)
    design = standardize(raw)
    tau2 = model.sigma ** 2 if cfg.tau2_mode == "true" else estimate_tau2(design)
    path = fit(design, PenaltySpec.lasso(), PathOptions(step_budget=cfg.step_budget))
    out = {}
    for name, df in (("gps", reduced_replay(path)), ("zou", path.nnz.astype(np.float64))):
        table = evaluate(path, df, tau2)
        beta = select(path, table, "cp").beta_std
        out[(name, "cp")] = (_squared_error(design, raw, beta, cfg.se_frame), beta)
    return out


def compare_df(config: SimConfig) -> DfComparison:
    """Same data streams for both arms; ``tau2_mode`` defaults to the true variance here."""
    if any(p.family != "lasso" for p in config.penalties):
        raise InputError("the nonzero-count df is only defined for the lasso")
    n, model = config.resolve()
    results = _map(_replicate_df, [(config, n, model, ss) for ss in config.replicate_seeds()])
    cells = _summarize(results, model.beta_true, [("gps", "cp"), ("zou", "cp")])
    return DfComparison(cells[("gps", "cp")], cells[("zou", "cp")])


# ---------------------------------------------------------------------------


def _warm_up():
    n, model = example_model(1)
    d = standardize(generate_gaussian(model, n, 0))
    path = fit(d, opts=PathOptions(step_budget=200))
    dense_series(path)
    reduced_replay(path)


def bench_timing(n_list: Sequence[int] = (100, 200, 500), reps: int = 5, example: int = 1,
                 seed: int = 1, step_budget: int = 20000) -> list[dict]:
    """Wall-clock of path + df + criteria with the dense and the reduced tracker."""
    _warm_up()
    _, model = example_model(example)
    rows = []
    for n in n_list:
        naive = np.empty(reps)
        modified = np.empty(reps)
        for r, ss in enumerate(np.random.SeedSequence([seed, n]).spawn(reps)):
            design = standardize(generate_gaussian(model, n, ss))
            tau2 = estimate_tau2(design) if n > model.p + 1 else model.sigma ** 2
            opts = PathOptions(step_budget=step_budget)
            for tracker, store in ((dense_series, naive), (reduced_replay, modified)):
                t0 = time.perf_counter()
                path = fit(design, PenaltySpec.lasso(), opts)
                df = tracker(path)
                table = evaluate(path, df, tau2)
                select(path, table, "cp")
                store[r] = time.perf_counter() - t0
        rows.append({
            "example": example,
            "n": int(n),
            "p": model.p,
            "reps": reps,
            "naive_s": float(naive.mean()),
            "modified_s": float(modified.mean()),
            "ratio": float(naive.mean() / modified.mean()),
        })
    return rows


def loglog_slope(n_values, seconds) -> float:
    """Least squares slope of ``log(seconds)`` against ``log(n)``."""
    return float(np.polyfit(np.log(n_values), np.log(seconds), 1)[0])
