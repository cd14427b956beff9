"""Degrees of freedom along a path.

Every step applies ``I - M <- (I - alpha_t x_k x_k') (I - M)`` to the
complement of the covariance matrix ``M = cov(mu_hat, y) / tau^2``, and
``df = tr M``.

Two trackers:

* dense:   keeps the ``N x N`` complement, ``O(N^2)`` per step;
* reduced: after the path is known, QR-factors the ``q`` columns that were
  ever selected (``X* = QR``) and replays the steps on the ``q x q``
  matrix ``prod(I - alpha_t r_k r_k')``, ``O(q^2)`` per step.  Because
  ``M`` lives in the column span of ``Q``, ``tr M = q - tr(prod)``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np
from numpy.typing import NDArray

from .dataset import StandardizedDesign
from .errors import InputError, InternalError
from .path import SolutionPath

log = logging.getLogger(__name__)

__all__ = [
    "DenseTracker",
    "ReducedTracker",
    "dense_series",
    "reduced_replay",
    "df_series",
    "zou_df",
    "zou_series",
    "monte_carlo_df",
    "RANK_TOL",
]

RANK_TOL = 1e-10


class DenseTracker:
    """``N x N`` complement ``I - M(t)``, updated one rank-one factor at a time."""

    def __init__(self, N: int):
        self.complement = np.eye(N)
        self.df = 0.0

    def update(self, x_k, alpha_t: float) -> float:
        if not 0.0 < alpha_t <= 1.0:
            raise InputError(f"alpha_t must lie in (0, 1], got {alpha_t}")
        x_k = np.asarray(x_k, dtype=np.float64)
        w = x_k @ self.complement
        self.df += alpha_t * float(w @ x_k)
        self.complement -= alpha_t * np.outer(x_k, w)
        return self.df


@dataclass
class ReducedTracker:
    """``q x q`` replay state in the QR basis of the selected columns."""

    Q: NDArray[np.float64]
    R: NDArray[np.float64]
    selected_columns: NDArray[np.int64]
    product: NDArray[np.float64] = field(init=False)
    df: float = field(init=False, default=0.0)

    def __post_init__(self):
        q = len(self.selected_columns)
        self.product = np.eye(q)
        self._pos = {int(j): i for i, j in enumerate(self.selected_columns)}

    @classmethod
    def from_design(cls, X, columns) -> "ReducedTracker":
        cols = np.asarray(columns, dtype=np.int64)
        Q, R = np.linalg.qr(X[:, cols])
        return cls(Q, R, cols)

    def r(self, k: int) -> NDArray[np.float64]:
        try:
            return self.R[:, self._pos[int(k)]]
        except KeyError:
            raise InternalError(f"step references column {k}, which was never selected") from None

    def update(self, k: int, alpha_t: float) -> float:
        r = self.r(k)
        w = r @ self.product
        self.df += alpha_t * float(w @ r)
        self.product -= alpha_t * np.outer(r, w)
        return self.df


@numba.njit(cache=True, nogil=True)
def _rank_one_replay(A, cols, alpha_t, out):
    """Replay ``P <- (I - a c c') P`` with ``c = A[:, cols[s]]``; ``out[s] = tr(I - P)``.

    ``A`` is ``X`` for the dense tracker and ``R`` for the reduced one.
    """
    n = A.shape[0]
    P = np.eye(n)
    w = np.empty(n)
    df = 0.0
    out[0] = 0.0
    for s in range(cols.shape[0]):
        c = cols[s]
        a = alpha_t[s]
        for j in range(n):
            w[j] = 0.0
        for i in range(n):
            ci = A[i, c]
            if ci != 0.0:
                for j in range(n):
                    w[j] += ci * P[i, j]
        quad = 0.0
        for j in range(n):
            quad += w[j] * A[j, c]
        df += a * quad
        for i in range(n):
            f = a * A[i, c]
            if f != 0.0:
                for j in range(n):
                    P[i, j] -= f * w[j]
        out[s + 1] = df
    return out


def dense_series(path: SolutionPath) -> NDArray[np.float64]:
    """df at every step via the full ``N x N`` recursion."""
    out = np.empty(path.n_steps + 1)
    X = np.ascontiguousarray(path.design.X)
    return _rank_one_replay(X, path.k[1:], path.alpha_t[1:], out)


def reduced_replay(path: SolutionPath, design: StandardizedDesign | None = None) -> NDArray[np.float64]:
    """df at every step via the ``q x q`` replay in the QR basis.

    Falls back to :func:`dense_series` (with a warning) when the selected
    columns are numerically collinear.
    """
    design = design or path.design
    out = np.zeros(path.n_steps + 1)
    if path.q == 0:
        return out
    Xs = design.X[:, path.selected]
    Q, R = np.linalg.qr(Xs)
    diag = np.abs(np.diag(R))
    if diag.min() <= RANK_TOL * np.linalg.norm(Xs, 2):
        warnings.warn(
            "selected columns are nearly collinear; using the dense df tracker",
            RuntimeWarning,
            stacklevel=2,
        )
        return dense_series(path)
    pos = np.full(design.p, -1, dtype=np.int64)
    pos[path.selected] = np.arange(path.q)
    cols = pos[path.k[1:]]
    if np.any(cols < 0):
        raise InternalError("a step references a column outside the selected set")
    return _rank_one_replay(np.ascontiguousarray(R), cols, path.alpha_t[1:], out)


def df_series(path: SolutionPath, method: str = "reduced") -> NDArray[np.float64]:
    if method == "reduced":
        return reduced_replay(path)
    if method == "dense":
        return dense_series(path)
    raise InputError(f"unknown df method {method!r}; use dense or reduced")


def zou_df(beta) -> int:
    """Number of nonzero coefficients."""
    return int(np.count_nonzero(np.asarray(beta)))


def zou_series(path: SolutionPath) -> NDArray[np.int64]:
    return path.nnz.copy()


def monte_carlo_df(
    fitter: Callable[[np.ndarray], np.ndarray],
    mu,
    tau2: float,
    B: int = 1000,
    seed=None,
) -> tuple[float, float]:
    """Covariance definition ``sum_i cov(mu_hat_i, y_i) / tau2`` by simulation.

    Draws ``y = mu + N(0, tau2 I)`` ``B`` times, fits each, and returns the
    sample-covariance estimate together with its jackknife standard error.
    """
    if B < 100:
        raise InputError(f"need B >= 100 replicates, got {B}")
    if not tau2 > 0:
        raise InputError(f"tau2 must be positive, got {tau2}")
    mu = np.asarray(mu, dtype=np.float64)
    rng = np.random.default_rng(seed)
    Y = mu + np.sqrt(tau2) * rng.standard_normal((B, mu.size))
    F = np.empty_like(Y)
    for b in range(B):
        F[b] = fitter(Y[b])
    return _cov_df(F, Y, tau2)


def _cov_df(F, Y, tau2):
    B = Y.shape[0]
    Sfy = (F * Y).sum(0)
    Sf = F.sum(0)
    Sy = Y.sum(0)
    est = float(((Sfy - Sf * Sy / B) / (B - 1)).sum() / tau2)
    # leave-one-out covariances, all b at once
    Sfy_b = Sfy - F * Y
    Sf_b = Sf - F
    Sy_b = Sy - Y
    loo = ((Sfy_b - Sf_b * Sy_b / (B - 1)) / (B - 2)).sum(1) / tau2
    se = float(np.sqrt((B - 1) / B * ((loo - loo.mean()) ** 2).sum()))
    return est, se
