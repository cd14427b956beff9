"""Shared instance builders for the test suite."""

from __future__ import annotations

import sys

import numpy as np

from gpsselect import StandardizedDesign, TrueModel, generate_gaussian, standardize
from gpsselect.dataset import Correlation


# acceptance criterion -> (passed, detail); printed by the terminal summary hook
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(k: int, passed: bool, detail: str) -> bool:
    ACCEPTANCE[k] = (bool(passed), detail)
    print(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}", file=sys.stderr)
    return bool(passed)


def orthonormal_design(N: int = 32, p: int = 8, seed: int = 0, noise: float = 1.0) -> StandardizedDesign:
    """Centered, orthonormal columns and a sparse-signal response."""
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((N, p))
    Z -= Z.mean(axis=0)
    Q, _ = np.linalg.qr(Z)
    beta = np.array([6.0, -4.0, 3.0, 2.0, -1.0] + [0.0] * (p - 5))
    y = Q @ beta + noise * rng.standard_normal(N)
    return StandardizedDesign.from_standardized(Q, y - y.mean())


def gaussian_design(N: int, p: int, seed: int, rho: float = 0.5, sigma: float = 1.0) -> StandardizedDesign:
    rng = np.random.default_rng(seed)
    beta = rng.normal(0.0, 2.0, p) * (rng.random(p) < 0.6)
    if not beta.any():
        beta[0] = 1.0
    model = TrueModel(beta, sigma, Correlation("ar1", rho))
    return standardize(generate_gaussian(model, N, rng.integers(2**63)))


def iid_instance(seed: int, N: int = 50, p: int = 8, sigma: float = 2.0) -> StandardizedDesign:
    """Independent standard normal predictors, about 60% nonzero coefficients."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((N, p))
    beta = rng.normal(0.0, 2.0, p) * (rng.random(p) < 0.6)
    y = X @ beta + sigma * rng.standard_normal(N)
    from gpsselect import RawDataset

    return standardize(RawDataset(X, y, tuple(f"x{j + 1}" for j in range(p)), "y"))


def orthogonal_closed_form(path) -> np.ndarray:
    """``sum_j 1 - (1 - alpha)^{t_j}`` at every step, ``t_j`` the accumulated multiplicity of variable ``j``."""
    p = path.design.p
    T = np.zeros((path.n_steps + 1, p))
    if path.n_steps:
        T[np.arange(1, path.n_steps + 1), path.k[1:]] = path.m[1:]
    T = np.cumsum(T, axis=0)
    return (1.0 - np.exp(T * np.log1p(-path.alpha))).sum(axis=1)
