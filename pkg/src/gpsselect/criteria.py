"""Cp-type criteria along a path, tau^2 estimation, and K-fold CV as a comparator.

Per step, with ``rss = ||y - mu_hat||^2``::

    cp   = rss + 2 tau2 df
    aic  = N log(2 pi tau2) + rss / tau2 + 2 df
    aicc = N log(2 pi rss / N) + N + 2 N df / (N - df - 1)      (df < N - 1, else inf)
    bic  = N log(2 pi tau2) + rss / tau2 + log(N) df
    gcv  = rss / N / (1 - df / N)^2                            (df < N, else inf)

``aicc_form="minus"`` flips the sign of the aicc complexity term.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .dataset import StandardizedDesign, destandardize
from .errors import InputError, NumericalError
from .path import PathOptions, SolutionPath, fit, ols_fit, quiet_sign_changes
from .penalty import PenaltySpec

log = logging.getLogger(__name__)

CRITERIA = ("cp", "aic", "aicc", "bic", "gcv")
TAU2_CRITERIA = ("cp", "aic", "bic")

__all__ = [
    "CRITERIA",
    "CriterionTable",
    "SelectionResult",
    "CVResult",
    "estimate_tau2",
    "evaluate",
    "select",
    "selection_at",
    "expected_error_oracle",
    "cross_validate",
]


@dataclass
class CriterionTable:
    """Criterion values per path step; tau2-based columns are ``None`` without tau2."""

    N: int
    rss: NDArray[np.float64]
    df: NDArray[np.float64]
    aicc: NDArray[np.float64]
    gcv: NDArray[np.float64]
    tau2: Optional[float] = None
    cp: Optional[NDArray[np.float64]] = None
    aic: Optional[NDArray[np.float64]] = None
    bic: Optional[NDArray[np.float64]] = None

    def column(self, name: str) -> NDArray[np.float64]:
        if name not in CRITERIA:
            raise InputError(f"unknown criterion {name!r}; choose from {CRITERIA}")
        col = getattr(self, name)
        if col is None:
            raise InputError(f"criterion {name!r} needs tau2, which was not supplied")
        return col

    def available(self) -> tuple[str, ...]:
        return tuple(c for c in CRITERIA if getattr(self, c) is not None)


@dataclass
class SelectionResult:
    criterion: str
    step: int
    t: float
    l1: float
    df: float
    beta_std: NDArray[np.float64]
    intercept: float
    beta: NDArray[np.float64]
    value: float = math.nan

    def to_dict(self, names: Sequence[str] | None = None) -> dict:
        names = list(names) if names is not None else [f"x{j + 1}" for j in range(len(self.beta))]
        return {
            "criterion": self.criterion,
            "step": self.step,
            "t": self.t,
            "l1": self.l1,
            "df": self.df,
            "value": self.value,
            "intercept": self.intercept,
            "beta_std": dict(zip(names, self.beta_std.tolist())),
            "beta": dict(zip(names, self.beta.tolist())),
        }


def estimate_tau2(design: StandardizedDesign) -> float:
    """Residual variance of the full least squares fit.

    The design is centered, so the intercept has already used one degree
    of freedom: ``rss / (N - p - 1)``.
    """
    N, p = design.X.shape
    if N <= p + 1:
        raise NumericalError(
            f"cannot estimate tau2 with N={N} <= p+1={p + 1}; use aicc or gcv, "
            "which do not need tau2, or pass tau2 explicitly"
        )
    beta = ols_fit(design)
    r = design.y - design.X @ beta
    tau2 = float(r @ r) / (N - p - 1)
    if tau2 <= 1e-14 * max(float(design.y @ design.y), 1e-300) / N:
        warnings.warn("estimated tau2 is zero (exact fit); Cp degenerates to rss", RuntimeWarning, stacklevel=2)
    return tau2


def evaluate(path_or_rss, df, tau2: float | None = None, N: int | None = None,
             aicc_form: str = "plus") -> CriterionTable:
    """Criterion table from a path (or an ``rss`` array plus ``N``) and aligned df."""
    if isinstance(path_or_rss, SolutionPath):
        rss = np.asarray(path_or_rss.rss, dtype=np.float64)
        N = path_or_rss.design.N
    else:
        rss = np.asarray(path_or_rss, dtype=np.float64)
        if N is None:
            raise InputError("N is required when passing rss directly")
    df = np.asarray(df, dtype=np.float64)
    if df.shape != rss.shape:
        raise InputError(f"df has shape {df.shape}, path has {rss.shape}")
    if aicc_form not in ("plus", "minus"):
        raise InputError("aicc_form must be 'plus' or 'minus'")
    rss = np.maximum(rss, 0.0)
    sgn = 1.0 if aicc_form == "plus" else -1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ok = df < N - 1
        aicc = np.full_like(rss, np.inf)
        aicc[ok] = N * np.log(2 * np.pi * rss[ok] / N) + N + sgn * 2 * N * df[ok] / (N - df[ok] - 1)
        ok = df < N
        gcv = np.full_like(rss, np.inf)
        gcv[ok] = rss[ok] / N / (1.0 - df[ok] / N) ** 2
    table = CriterionTable(N=N, rss=rss, df=df, aicc=aicc, gcv=gcv)
    if tau2 is not None:
        tau2 = float(tau2)
        if not tau2 > 0:
            raise InputError(f"tau2 must be positive, got {tau2}")
        base = N * math.log(2 * math.pi * tau2) + rss / tau2
        table.tau2 = tau2
        table.cp = rss + 2.0 * tau2 * df
        table.aic = base + 2.0 * df
        table.bic = base + math.log(N) * df
    return table


def _argmin(values: NDArray[np.float64]) -> int:
    finite = np.isfinite(values)
    if not finite.any():
        raise NumericalError("criterion is infinite at every step")
    v = np.where(finite, values, np.inf)
    return int(np.argmin(v))


def selection_at(path: SolutionPath, step: int, df: NDArray[np.float64], criterion: str = "",
                 value: float = math.nan) -> SelectionResult:
    beta_std = path.coef(step)
    intercept, beta = destandardize(beta_std, path.design)
    return SelectionResult(
        criterion=criterion,
        step=int(step),
        t=float(path.t[step]),
        l1=float(path.l1[step]),
        df=float(df[step]),
        beta_std=beta_std,
        intercept=intercept,
        beta=beta,
        value=float(value),
    )


def select(path: SolutionPath, table: CriterionTable, criterion: str = "cp") -> SelectionResult:
    """Step minimizing ``criterion`` over finite values; ties go to the earliest step."""
    col = table.column(criterion)
    step = _argmin(col)
    return selection_at(path, step, table.df, criterion, col[step])


# ---------------------------------------------------------------------------
# Monte Carlo oracle for the expected prediction error


def expected_error_oracle(
    fitter: Callable[[np.ndarray], tuple[np.ndarray, float]],
    mu,
    tau2: float,
    B: int = 2000,
    seed=None,
) -> dict:
    """Estimate ``Err = E_y E_ynew ||mu_hat - y_new||^2`` and ``E[Cp]`` side by side.

    ``fitter(y)`` returns ``(mu_hat, df)``; ``df`` feeds the Cp value of the
    same replicate.  Each replicate draws its own independent ``y_new``.
    """
    mu = np.asarray(mu, dtype=np.float64)
    rng = np.random.default_rng(seed)
    sd = math.sqrt(tau2)
    err = np.empty(B)
    cp = np.empty(B)
    for b in range(B):
        y = mu + sd * rng.standard_normal(mu.size)
        y_new = mu + sd * rng.standard_normal(mu.size)
        mu_hat, df = fitter(y)
        err[b] = float(((mu_hat - y_new) ** 2).sum())
        cp[b] = float(((y - mu_hat) ** 2).sum()) + 2.0 * tau2 * df
    se_err = err.std(ddof=1) / math.sqrt(B)
    se_cp = cp.std(ddof=1) / math.sqrt(B)
    return {
        "err": float(err.mean()),
        "err_se": float(se_err),
        "cp": float(cp.mean()),
        "cp_se": float(se_cp),
        "combined_se": float(math.hypot(se_err, se_cp)),
    }


# ---------------------------------------------------------------------------
# K-fold cross validation


S_GRID = np.round(np.linspace(0.0, 1.0, 101), 2)


@dataclass
class CVResult:
    s_grid: NDArray[np.float64]
    cv_error: NDArray[np.float64]
    cv_se: NDArray[np.float64]
    s_best: float
    path: SolutionPath
    selection: SelectionResult


def _step_at_fraction(path: SolutionPath, s: float) -> int:
    end = path.l1[-1]
    if end <= 0:
        return 0
    frac = path.l1 / end
    return int(np.nonzero(frac <= s + 1e-12)[0].max())


def _canonical_order(X, y):
    keys = [y] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys[::-1])


def _restandardize(X, y):
    xm = X.mean(0)
    Xc = X - xm
    sc = np.sqrt((Xc * Xc).sum(0))
    if np.any(sc <= 1e-12 * np.sqrt(len(y))):
        raise NumericalError("a cross-validation fold has a constant predictor column")
    ym = float(y.mean())
    d = StandardizedDesign(np.ascontiguousarray(Xc / sc), y - ym, ym, xm, sc)
    return d


def cross_validate(
    design: StandardizedDesign,
    penalty: PenaltySpec | None = None,
    opts: PathOptions | None = None,
    folds: int = 10,
    seed=0,
) -> CVResult:
    """K-fold CV over the normalized-l1 grid ``s = l1(t) / l1(end)``.

    Rows are first put in a canonical (sorted) order so that the fold
    assignment depends on the seed and the data, not on storage order.
    Per fold the model at grid point ``s`` is the last step whose
    normalized l1 is ``<= s``.
    """
    penalty = penalty or PenaltySpec.lasso()
    opts = opts or PathOptions()
    N = design.N
    if folds < 2 or N < folds:
        raise InputError(f"need 2 <= folds <= N, got folds={folds}, N={N}")
    order = _canonical_order(design.X, design.y)
    X = design.X[order]
    y = design.y[order] + design.y_mean
    perm = np.random.default_rng(seed).permutation(N)
    errs = np.empty((folds, S_GRID.size))
    for f, test in enumerate(np.array_split(perm, folds)):
        train = np.setdiff1d(np.arange(N), test)
        d = _restandardize(X[train], y[train])
        with quiet_sign_changes():
            P = fit(d, penalty, opts)
        steps = [_step_at_fraction(P, s) for s in S_GRID]
        B = P.coef_path(steps) / d.x_scales
        icpt = d.y_mean - B @ d.x_means
        pred = icpt[:, None] + B @ X[test].T
        errs[f] = ((pred - y[test]) ** 2).mean(1)
    cv = errs.mean(0)
    se = errs.std(0, ddof=1) / math.sqrt(folds)
    best = int(np.argmin(cv))
    s_best = float(S_GRID[best])
    full = _restandardize(X, y)
    full = StandardizedDesign(full.X, full.y, full.y_mean, full.x_means, full.x_scales,
                              design.predictor_names, design.response_name)
    with quiet_sign_changes():
        P = fit(full, penalty, opts)
    step = _step_at_fraction(P, s_best)
    sel = selection_at(P, step, np.full(P.n_steps + 1, math.nan), "cv", cv[best])
    # the refit ran on a copy of the caller's (already standardized) design,
    # so its raw-unit coefficients are the caller's standardized ones
    sel.beta_std = sel.beta
    sel.intercept, sel.beta = destandardize(sel.beta_std, design)
    return CVResult(S_GRID.copy(), cv, se, s_best, P, sel)
