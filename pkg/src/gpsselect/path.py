"""Generalized path seeking with the fixed-size coefficient step.

Each iteration moves one coefficient by exactly ``delta_t`` in the
direction of its penalty-scaled gradient and advances the tuning value
``t`` by ``m * delta_t`` where ``m = log(1 - alpha/|g_k|) / log(1 - alpha)``
and ``alpha = 2 delta_t / N``.  The per-step quantities ``(k, alpha_t)``
with ``alpha_t = alpha / |g_k|`` are everything the df trackers need.

Coefficients are stored as integer multiples of ``delta_t`` so that a
coefficient which returns to zero is *exactly* zero.
"""

from __future__ import annotations

import contextlib
import contextvars
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numba
import numpy as np
from numpy.typing import NDArray

from .dataset import StandardizedDesign
from .errors import DegenerateDataError, InputError, InternalError, NumericalError
from .penalty import P_FLOOR, PenaltySpec, gradient_abs, validate

log = logging.getLogger(__name__)

__all__ = ["PathOptions", "SolutionPath", "fit", "ols_fit", "estimate_delta_t"]

# kernel status codes
_RUNNING, _CONVERGED, _MAX_VARS, _NONFINITE = 0, 1, 2, 3
_STATUS_NAMES = {_CONVERGED: "converged", _MAX_VARS: "max_vars", _NONFINITE: "nonfinite"}

REFRESH_EVERY = 1000
_CHUNK = 1 << 16


@dataclass(frozen=True)
class PathOptions:
    """Knobs for :func:`fit`.

    ``delta_t="auto"`` spreads ``step_budget`` steps over the l1 norm of
    the least squares fit.  ``max_vars`` stops the path before a variable
    beyond the first ``max_vars`` distinct ones would enter.
    """

    step_budget: int = 20000
    max_vars: Optional[int] = None
    max_iterations: Optional[int] = None
    delta_t: Union[float, str] = "auto"

    def __post_init__(self):
        if int(self.step_budget) < 1:
            raise InputError(f"step_budget must be positive, got {self.step_budget}")
        if self.max_vars is not None and int(self.max_vars) < 1:
            raise InputError(f"max_vars must be positive, got {self.max_vars}")
        if self.max_iterations is not None and int(self.max_iterations) < 1:
            raise InputError(f"max_iterations must be positive, got {self.max_iterations}")
        if self.delta_t != "auto":
            dt = float(self.delta_t)
            if not (dt > 0 and math.isfinite(dt)):
                raise InputError(f"delta_t must be a positive finite number, got {self.delta_t}")

    @property
    def iteration_cap(self) -> int:
        return int(self.max_iterations) if self.max_iterations is not None else 10 * int(self.step_budget)


@dataclass
class SolutionPath:
    """Step log of one path.

    All per-step arrays have length ``n_steps + 1``; entry 0 is the null
    model (``k = -1``).  Entry ``s`` describes the state *after* update ``s``.
    """

    design: StandardizedDesign
    penalty: PenaltySpec
    delta_t: float
    alpha: float
    k: NDArray[np.int64]
    sign: NDArray[np.int8]
    g_k: NDArray[np.float64]
    alpha_t: NDArray[np.float64]
    m: NDArray[np.float64]
    t: NDArray[np.float64]
    l1: NDArray[np.float64]
    rss: NDArray[np.float64]
    nnz: NDArray[np.int64]
    selected: NDArray[np.int64]
    update_counts: NDArray[np.int64]
    effective_counts: NDArray[np.float64]
    status: str
    sign_changes: int = 0
    _units: Optional[NDArray[np.int64]] = field(default=None, repr=False)

    @property
    def n_steps(self) -> int:
        return len(self.k) - 1

    @property
    def q(self) -> int:
        return len(self.selected)

    def _unit_path(self) -> NDArray[np.int64]:
        if self._units is None:
            n, p = self.n_steps, self.design.p
            steps = np.zeros((n + 1, p), dtype=np.int64)
            if n:
                steps[np.arange(1, n + 1), self.k[1:]] = self.sign[1:]
            self._units = np.cumsum(steps, axis=0)
        return self._units

    def coef(self, step: int = -1) -> NDArray[np.float64]:
        """Standardized coefficients after ``step`` updates (``-1`` = last)."""
        if step < 0:
            step += self.n_steps + 1
        if not 0 <= step <= self.n_steps:
            raise IndexError(f"step {step} outside 0..{self.n_steps}")
        units = np.bincount(
            self.k[1 : step + 1], weights=self.sign[1 : step + 1], minlength=self.design.p
        ) if step else np.zeros(self.design.p)
        return units * self.delta_t

    def coef_path(self, steps=None) -> NDArray[np.float64]:
        """``(len(steps), p)`` coefficient array (all steps by default)."""
        units = self._unit_path()
        if steps is not None:
            units = units[np.asarray(steps)]
        return units * self.delta_t

    def fitted(self, step: int = -1) -> NDArray[np.float64]:
        return self.design.X @ self.coef(step)

    def gradient_path(self, j: int, steps=None) -> NDArray[np.float64]:
        """``g_j = 2 x_j'(y - X beta)/N`` along the path."""
        d = self.design
        B = self.coef_path(steps)
        return 2.0 * (d.X[:, j] @ d.y - B @ d.gram[j]) / d.N

    def thin(self, every: int, keep=()) -> NDArray[np.int64]:
        """Every ``every``-th step plus the last step and any indices in ``keep``."""
        every = max(int(every), 1)
        idx = set(range(0, self.n_steps + 1, every))
        idx.add(self.n_steps)
        idx.update(int(i) for i in keep)
        return np.array(sorted(idx), dtype=np.int64)

    def last_step_at(self, t_value: float) -> int:
        """Largest step index whose accumulated ``t`` does not exceed ``t_value``."""
        return int(np.searchsorted(self.t, t_value, side="right") - 1)


# ---------------------------------------------------------------------------
# compiled loop


@numba.njit(cache=True, nogil=True)
def _refresh(X, y, units, dt, mu, g):
    N, p = X.shape
    rss = 0.0
    for i in range(N):
        s = 0.0
        for j in range(p):
            s += X[i, j] * units[j]
        mu[i] = s * dt
        r = y[i] - mu[i]
        rss += r * r
    for j in range(p):
        s = 0.0
        for i in range(N):
            s += X[i, j] * (y[i] - mu[i])
        g[j] = 2.0 * s / N
    return rss


@numba.njit(cache=True, nogil=True)
def _gps_chunk(X, y, G, code, amix, dt, alpha, units, mu, g, order, counts, eff, lastsgn,
               fstate, istate, max_vars, n_max,
               k_out, s_out, gk_out, at_out, m_out, t_out, l1_out, rss_out, nnz_out):
    """Run up to ``n_max`` updates.  Returns (steps_done, status).

    fstate = [t, rss]; istate = [l1_units, n_selected, nnz, sign_changes, since_refresh]
    """
    N, p = X.shape
    lam = np.empty(p)
    log1m_alpha = math.log1p(-alpha)
    t = fstate[0]
    rss = fstate[1]
    l1u = istate[0]
    nsel = istate[1]
    nnz = istate[2]
    flips = istate[3]
    since = istate[4]
    done = 0
    status = 0
    while done < n_max:
        # candidate set C = {|g_j| > alpha}; S = {j in C : lambda_j beta_j < 0}
        best_c = -1
        best_s = -1
        vc = -1.0
        vs = -1.0
        for j in range(p):
            gj = g[j]
            if not math.isfinite(gj):
                status = 3
                break
            if abs(gj) <= alpha:
                continue
            b = abs(units[j]) * dt
            if code == 0:
                pj = 1.0
            elif code == 1:
                pj = amix * b + (1.0 - amix)
            else:
                pj = (1.0 - amix) / (amix + (1.0 - amix) * b)
            if pj < 1e-12:
                pj = 1e-12
            lj = gj / pj
            lam[j] = lj
            a = abs(lj)
            if a > vc:
                vc = a
                best_c = j
            if lj * units[j] < 0 and a > vs:
                vs = a
                best_s = j
        if status != 0:
            break
        if best_c < 0:
            status = 1
            break
        k = best_s if best_s >= 0 else best_c
        if counts[k] == 0:
            if nsel >= max_vars:
                status = 2
                break
            order[nsel] = k
            nsel += 1
        gk = g[k]
        agk = abs(gk)
        sgn = 1 if gk > 0 else -1
        at = alpha / agk
        m = math.log1p(-at) / log1m_alpha
        old = units[k]
        new = old + sgn
        units[k] = new
        if old == 0:
            nnz += 1
            if lastsgn[k] != 0 and lastsgn[k] != sgn:
                flips += 1
            lastsgn[k] = sgn
        elif new == 0:
            nnz -= 1
        l1u += abs(new) - abs(old)
        step = sgn * dt
        for i in range(N):
            mu[i] += step * X[i, k]
        for j in range(p):
            g[j] -= alpha * sgn * G[j, k]
        rss = rss - N * step * gk + dt * dt * G[k, k]
        counts[k] += 1
        eff[k] += m
        t += m * dt
        since += 1
        if since >= 1000:
            rss = _refresh(X, y, units, dt, mu, g)
            since = 0
        k_out[done] = k
        s_out[done] = sgn
        gk_out[done] = gk
        at_out[done] = at
        m_out[done] = m
        t_out[done] = t
        l1_out[done] = l1u * dt
        rss_out[done] = rss
        nnz_out[done] = nnz
        done += 1
    fstate[0] = t
    fstate[1] = rss
    istate[0] = l1u
    istate[1] = nsel
    istate[2] = nnz
    istate[3] = flips
    istate[4] = since
    return done, status


def _gps_chunk_python(X, y, G, weights, dt, alpha, units, mu, g, order, counts, eff, lastsgn,
                      fstate, istate, max_vars, n_max, outs):
    """Same loop as :func:`_gps_chunk` for penalties given as Python callables."""
    N, p = X.shape
    log1m_alpha = math.log1p(-alpha)
    t, rss = fstate
    l1u, nsel, nnz, flips, since = (int(v) for v in istate)
    done, status = 0, _RUNNING
    while done < n_max:
        if not np.all(np.isfinite(g)):
            status = _NONFINITE
            break
        cand = np.abs(g) > alpha
        if not cand.any():
            status = _CONVERGED
            break
        pw = np.maximum(np.asarray(weights(np.abs(units) * dt), dtype=np.float64), P_FLOOR)
        lam = g / pw
        score = np.where(cand, np.abs(lam), -1.0)
        in_s = cand & (lam * units < 0)
        k = int(np.argmax(np.where(in_s, score, -1.0))) if in_s.any() else int(np.argmax(score))
        if counts[k] == 0:
            if nsel >= max_vars:
                status = _MAX_VARS
                break
            order[nsel] = k
            nsel += 1
        gk = float(g[k])
        sgn = 1 if gk > 0 else -1
        at = alpha / abs(gk)
        m = math.log1p(-at) / log1m_alpha
        old = int(units[k])
        new = old + sgn
        units[k] = new
        nnz += (old == 0) - (new == 0)
        if old == 0:
            flips += lastsgn[k] != 0 and lastsgn[k] != sgn
            lastsgn[k] = sgn
        l1u += abs(new) - abs(old)
        step = sgn * dt
        mu += step * X[:, k]
        g -= alpha * sgn * G[:, k]
        rss = rss - N * step * gk + dt * dt * G[k, k]
        counts[k] += 1
        eff[k] += m
        t += m * dt
        since += 1
        if since >= REFRESH_EVERY:
            rss = float(_refresh(X, y, units, dt, mu, g))
            since = 0
        for arr, v in zip(outs, (k, sgn, gk, at, m, t, l1u * dt, rss, nnz)):
            arr[done] = v
        done += 1
    fstate[:] = (t, rss)
    istate[:] = (l1u, nsel, nnz, flips, since)
    return done, status


# ---------------------------------------------------------------------------
# least squares helpers


def ols_fit(design: StandardizedDesign) -> NDArray[np.float64]:
    """Least squares coefficients of the full model on the standardized design."""
    N, p = design.X.shape
    if N <= p:
        raise NumericalError(
            f"least squares needs N > p (N={N}, p={p}); use aicc or gcv, which do not need tau2"
        )
    sv = np.linalg.svd(design.X, compute_uv=False)
    if sv[-1] == 0 or (sv[0] / sv[-1]) ** 2 >= 1e12:
        raise NumericalError(
            "design is rank deficient or nearly so (cond(X'X) >= 1e12); "
            "use aicc or gcv, which do not need tau2"
        )
    beta, *_ = np.linalg.lstsq(design.X, design.y, rcond=None)
    return beta


def estimate_delta_t(design: StandardizedDesign, opts: PathOptions) -> float:
    """Coefficient step size.

    An explicit ``opts.delta_t`` is returned as is.  Otherwise the l1
    norm of the least squares fit (minimum-norm fit when ``N <= p`` or
    the design is singular) divided by ``step_budget``, reduced if needed
    so that ``2 delta_t / N`` stays below the smallest of the ``q`` largest
    nonzero initial gradients.
    """
    if opts.delta_t != "auto":
        return float(opts.delta_t)
    N, p = design.X.shape
    g0 = np.abs(2.0 * (design.X.T @ design.y) / N)
    if not np.any(g0 > 0):
        raise DegenerateDataError("all initial gradients are zero; the response is orthogonal to every predictor")
    try:
        beta = ols_fit(design)
    except NumericalError:
        beta = np.linalg.pinv(design.X) @ design.y
    l1 = float(np.abs(beta).sum())
    if not (l1 > 0 and math.isfinite(l1)):
        raise DegenerateDataError("least squares fit has zero or non-finite l1 norm")
    dt = l1 / int(opts.step_budget)
    q = p if opts.max_vars is None else min(int(opts.max_vars), p)
    top = np.sort(g0)[::-1][:q]
    bound = float(top[top > 0].min())
    if 2.0 * dt / N >= bound:
        dt = 0.25 * bound * N
        log.info("delta_t clamped to %.6g so that the first step is admissible", dt)
    if not dt > 0:
        raise DegenerateDataError("could not find an admissible delta_t")
    return dt


# ---------------------------------------------------------------------------


_QUIET: contextvars.ContextVar[bool] = contextvars.ContextVar("gps_quiet", default=False)


@contextlib.contextmanager
def quiet_sign_changes():
    """Suppress the per-path sign change warning (internal refits, simulations)."""
    token = _QUIET.set(True)
    try:
        yield
    finally:
        _QUIET.reset(token)


def _null_path(design, penalty, dt):
    z_i = np.zeros(1, dtype=np.int64)
    z_f = np.zeros(1)
    p = design.p
    return SolutionPath(
        design=design, penalty=penalty, delta_t=dt, alpha=2.0 * dt / design.N,
        k=np.full(1, -1, dtype=np.int64), sign=np.zeros(1, dtype=np.int8), g_k=z_f.copy(),
        alpha_t=z_f.copy(), m=z_f.copy(), t=z_f.copy(), l1=z_f.copy(),
        rss=np.array([float(design.y @ design.y)]), nnz=z_i.copy(),
        selected=np.zeros(0, dtype=np.int64), update_counts=np.zeros(p, dtype=np.int64),
        effective_counts=np.zeros(p), status="converged",
    )


def fit(design: StandardizedDesign, penalty: PenaltySpec | None = None,
        opts: PathOptions | None = None) -> SolutionPath:
    """Compute the whole path from ``beta = 0`` until no ``|g_j|`` exceeds ``alpha``."""
    penalty = validate(penalty or PenaltySpec.lasso())
    opts = opts or PathOptions()
    X, y, G = design.X, design.y, design.gram
    N, p = X.shape
    g0 = 2.0 * (X.T @ y) / N
    if not np.all(np.isfinite(g0)):
        raise NumericalError("non-finite initial gradient")
    if not np.any(g0 != 0):
        dt = float(opts.delta_t) if opts.delta_t != "auto" else 1.0 / int(opts.step_budget)
        return _null_path(design, penalty, dt)

    dt = estimate_delta_t(design, opts)
    alpha = 2.0 * dt / N
    if alpha >= np.abs(g0).max():
        raise NumericalError(
            f"delta_t={dt:.6g} gives alpha=2*delta_t/N={alpha:.6g}, not below the largest "
            f"initial gradient {np.abs(g0).max():.6g}; no step can be taken"
        )
    if not alpha < 1.0:
        raise NumericalError(f"alpha=2*delta_t/N={alpha:.6g} must be below 1")

    max_vars = p if opts.max_vars is None else min(int(opts.max_vars), p)
    cap = opts.iteration_cap
    units = np.zeros(p, dtype=np.int64)
    mu = np.zeros(N)
    g = g0.copy()
    order = np.full(p, -1, dtype=np.int64)
    counts = np.zeros(p, dtype=np.int64)
    eff = np.zeros(p)
    lastsgn = np.zeros(p, dtype=np.int8)
    fstate = np.array([0.0, float(y @ y)])
    istate = np.zeros(5, dtype=np.int64)

    chunks = []
    total = 0
    status = _RUNNING
    while status == _RUNNING and total < cap:
        n_max = min(_CHUNK, cap - total)
        outs = (
            np.empty(n_max, dtype=np.int64), np.empty(n_max, dtype=np.int8),
            np.empty(n_max), np.empty(n_max), np.empty(n_max), np.empty(n_max),
            np.empty(n_max), np.empty(n_max), np.empty(n_max, dtype=np.int64),
        )
        if penalty.code >= 0:
            done, status = _gps_chunk(
                X, y, G, penalty.code, float(penalty.alpha_mix), dt, alpha, units, mu, g,
                order, counts, eff, lastsgn, fstate, istate, max_vars, n_max, *outs,
            )
        else:
            done, status = _gps_chunk_python(
                X, y, G, lambda b: gradient_abs(penalty, b), dt, alpha, units, mu, g,
                order, counts, eff, lastsgn, fstate, istate, max_vars, n_max, outs,
            )
        chunks.append(tuple(a[:done] for a in outs))
        total += done
    if status == _NONFINITE:
        raise NumericalError(f"non-finite gradient after {total} steps (numerical blow-up)")
    status_name = _STATUS_NAMES.get(status, "max_iterations")
    if status_name == "max_iterations":
        log.warning("path stopped at the iteration cap (%d) before convergence", cap)

    def cat(i, first):
        return np.concatenate([np.array([first], dtype=chunks[0][i].dtype)] + [c[i] for c in chunks])

    nsel = int(istate[1])
    path = SolutionPath(
        design=design, penalty=penalty, delta_t=dt, alpha=alpha,
        k=cat(0, -1), sign=cat(1, 0), g_k=cat(2, 0.0), alpha_t=cat(3, 0.0), m=cat(4, 0.0),
        t=cat(5, 0.0), l1=cat(6, 0.0), rss=cat(7, float(y @ y)), nnz=cat(8, 0),
        selected=order[:nsel].copy(), update_counts=counts, effective_counts=eff,
        status=status_name, sign_changes=int(istate[3]),
    )
    if path.sign_changes and not _QUIET.get():
        log.warning(
            "%d coefficient sign change(s) along the path; discontinuous paths are not handled specially",
            path.sign_changes,
        )
    if np.any(counts[order[:nsel]] == 0):
        raise InternalError("selected-variable bookkeeping is inconsistent")
    return path
