"""Tabular input, the centering/unit-norm convention and Gaussian designs.

Predictors are centered and scaled to unit *sum of squares* (not unit
variance), and the response is centered.  Everything downstream (the
path engine, the df trackers) relies on ``x_j' x_j == 1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import InputError

__all__ = [
    "RawDataset",
    "StandardizedDesign",
    "Correlation",
    "TrueModel",
    "EXAMPLES",
    "load_csv",
    "load_diabetes",
    "diabetes_path",
    "standardize",
    "destandardize",
    "generate_gaussian",
    "example_model",
]


@dataclass(frozen=True)
class RawDataset:
    """Predictors and response before standardization.

    ``mu`` is only set for simulated data, where it holds the noiseless
    mean ``X @ beta_true``.
    """

    X: NDArray[np.float64]
    y: NDArray[np.float64]
    predictor_names: tuple[str, ...]
    response_name: str = "y"
    mu: Optional[NDArray[np.float64]] = None

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=np.float64)
        y = np.ascontiguousarray(self.y, dtype=np.float64).reshape(-1)
        if X.ndim != 2:
            raise InputError(f"predictor matrix must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise InputError(f"{X.shape[0]} predictor rows but {y.shape[0]} responses")
        if X.shape[0] < 2:
            raise InputError(f"need at least 2 rows, got {X.shape[0]}")
        if len(self.predictor_names) != X.shape[1]:
            raise InputError("predictor_names does not match the number of columns")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise InputError("all values must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class StandardizedDesign:
    """Centered response and centered, unit-norm predictor columns.

    Attributes
    ----------
    X : (N, p) array
        Standardized predictors, ``X.sum(0) == 0`` and ``(X**2).sum(0) == 1``.
    y : (N,) array
        Centered response.
    y_mean : float
        Mean of the raw response.
    x_means, x_scales : (p,) arrays
        Raw column means and post-centering root sums of squares.
    """

    X: NDArray[np.float64]
    y: NDArray[np.float64]
    y_mean: float
    x_means: NDArray[np.float64]
    x_scales: NDArray[np.float64]
    predictor_names: tuple[str, ...] = ()
    response_name: str = "y"
    _gram: Optional[NDArray[np.float64]] = field(default=None, repr=False, compare=False)

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def gram(self) -> NDArray[np.float64]:
        if self._gram is None:
            object.__setattr__(self, "_gram", np.ascontiguousarray(self.X.T @ self.X))
        return self._gram

    def with_response(self, y) -> "StandardizedDesign":
        """Same predictors, a new (re-centered) response."""
        y = np.asarray(y, dtype=np.float64).reshape(-1)
        if y.shape[0] != self.N:
            raise InputError(f"response has length {y.shape[0]}, design has {self.N} rows")
        ym = float(y.mean())
        return StandardizedDesign(
            X=self.X,
            y=y - ym,
            y_mean=ym,
            x_means=self.x_means,
            x_scales=self.x_scales,
            predictor_names=self.predictor_names,
            response_name=self.response_name,
            _gram=self._gram,
        )

    @classmethod
    def from_standardized(cls, X, y, names: Sequence[str] | None = None) -> "StandardizedDesign":
        """Wrap arrays that already follow the convention (no rescaling)."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.float64).reshape(-1)
        p = X.shape[1]
        if names is None:
            names = tuple(f"x{j + 1}" for j in range(p))
        return cls(
            X=X,
            y=y,
            y_mean=0.0,
            x_means=np.zeros(p),
            x_scales=np.ones(p),
            predictor_names=tuple(names),
        )


# ---------------------------------------------------------------------------
# CSV input


def load_csv(path, response: str = "y") -> RawDataset:
    """Read a headered, comma separated numeric table.

    Predictors keep their file order; the ``response`` column is pulled out.
    Every error names the offending row (1-based, header is row 1) and column.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"data file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"{path}: empty file") from None
        if response not in header:
            raise InputError(f"{path}: response column {response!r} not in header {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(
                    f"{path}: row {lineno} has {len(row)} fields, header has {len(header)}"
                )
            vals = []
            for name, cell in zip(header, row):
                try:
                    v = float(cell)
                except ValueError:
                    raise InputError(
                        f"{path}: row {lineno}, column {name!r}: non-numeric value {cell!r}"
                    ) from None
                if not math.isfinite(v):
                    raise InputError(f"{path}: row {lineno}, column {name!r}: non-finite value {cell!r}")
                vals.append(v)
            rows.append(vals)
    if len(rows) < 2:
        raise InputError(f"{path}: need at least 2 data rows, found {len(rows)}")
    table = np.array(rows, dtype=np.float64)
    ri = header.index(response)
    keep = [j for j in range(len(header)) if j != ri]
    return RawDataset(
        X=table[:, keep],
        y=table[:, ri],
        predictor_names=tuple(header[j] for j in keep),
        response_name=response,
    )


def diabetes_path() -> Path:
    """Location of the bundled diabetes table (442 rows, 10 predictors + ``y``)."""
    return Path(str(resources.files("gpsselect") / "data" / "diabetes.csv"))


def load_diabetes() -> RawDataset:
    return load_csv(diabetes_path(), response="y")


# ---------------------------------------------------------------------------
# Standardization


def standardize(raw: RawDataset) -> StandardizedDesign:
    X = raw.X
    x_means = X.mean(axis=0)
    Xc = X - x_means
    ss = np.einsum("ij,ij->j", Xc, Xc)
    scales = np.sqrt(ss)
    # relative test: a constant column leaves only rounding residue after centering
    floor = 1e-12 * np.sqrt(raw.N) * np.maximum(1.0, np.abs(X).max(axis=0))
    bad = np.nonzero(scales <= floor)[0]
    if bad.size:
        names = ", ".join(repr(raw.predictor_names[j]) for j in bad)
        raise InputError(f"zero-variance predictor column(s): {names}")
    y_mean = float(raw.y.mean())
    return StandardizedDesign(
        X=np.ascontiguousarray(Xc / scales),
        y=raw.y - y_mean,
        y_mean=y_mean,
        x_means=x_means,
        x_scales=scales,
        predictor_names=raw.predictor_names,
        response_name=raw.response_name,
    )


def destandardize(beta_std, design: StandardizedDesign) -> tuple[float, NDArray[np.float64]]:
    """Map standardized coefficients back to raw units.

    Returns ``(intercept, beta_orig)`` so that
    ``intercept + X_raw @ beta_orig == y_mean + X_std @ beta_std``.
    """
    beta_std = np.asarray(beta_std, dtype=np.float64)
    if beta_std.shape != (design.p,):
        raise InputError(f"coefficient vector has shape {beta_std.shape}, expected ({design.p},)")
    beta_orig = beta_std / design.x_scales
    intercept = design.y_mean - float(beta_orig @ design.x_means)
    return intercept, beta_orig


# ---------------------------------------------------------------------------
# Simulation designs


@dataclass(frozen=True)
class Correlation:
    """Predictor correlation structure: ``ar1`` (rho**|i-j|), ``equi`` or ``identity``."""

    kind: str = "identity"
    rho: float = 0.0

    def matrix(self, p: int) -> NDArray[np.float64]:
        if self.kind == "identity":
            return np.eye(p)
        if self.kind == "ar1":
            if not -1.0 < self.rho < 1.0:
                raise InputError(f"AR1 correlation needs -1 < rho < 1, got {self.rho}")
            idx = np.arange(p)
            return self.rho ** np.abs(idx[:, None] - idx[None, :])
        if self.kind == "equi":
            lo = -1.0 / (p - 1) if p > 1 else -np.inf
            if not lo < self.rho < 1.0:
                raise InputError(f"equicorrelation needs {lo:.4g} < rho < 1, got {self.rho}")
            C = np.full((p, p), self.rho)
            np.fill_diagonal(C, 1.0)
            return C
        raise InputError(f"unknown correlation kind {self.kind!r}")


@dataclass(frozen=True)
class TrueModel:
    beta_true: tuple[float, ...]
    sigma: float
    correlation: Correlation = Correlation()

    def __post_init__(self):
        object.__setattr__(self, "beta_true", tuple(float(b) for b in self.beta_true))
        if not self.sigma >= 0.0:
            raise InputError(f"sigma must be non-negative, got {self.sigma}")
        self.correlation.matrix(len(self.beta_true))

    @property
    def p(self) -> int:
        return len(self.beta_true)


_EX1_BETA = (3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0)

#: The four simulation settings: ``example -> (n, TrueModel)``.
EXAMPLES: dict[int, tuple[int, TrueModel]] = {
    1: (20, TrueModel(_EX1_BETA, 3.0, Correlation("ar1", 0.5))),
    2: (20, TrueModel((0.85,) * 8, 3.0, Correlation("ar1", 0.5))),
    3: (20, TrueModel((5.0,) + (0.0,) * 7, 2.0, Correlation("ar1", 0.5))),
    4: (
        100,
        TrueModel((0.0,) * 10 + (2.0,) * 10 + (0.0,) * 10 + (2.0,) * 10, 15.0, Correlation("equi", 0.5)),
    ),
}


def example_model(example: int) -> tuple[int, TrueModel]:
    try:
        return EXAMPLES[example]
    except KeyError:
        raise InputError(f"unknown example {example}; choose from {sorted(EXAMPLES)}") from None


def generate_gaussian(model: TrueModel, n: int, seed) -> RawDataset:
    """Draw ``X ~ N(0, C)`` rows and ``y = X beta + N(0, sigma^2)``.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`
    (PCG64), including a ``SeedSequence`` or a ``Generator``.
    """
    if n < 2:
        raise InputError(f"n must be at least 2, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    beta = np.asarray(model.beta_true)
    L = np.linalg.cholesky(model.correlation.matrix(model.p))
    X = rng.standard_normal((n, model.p)) @ L.T
    mu = X @ beta
    y = mu + model.sigma * rng.standard_normal(n)
    return RawDataset(
        X=X,
        y=y,
        predictor_names=tuple(f"x{j + 1}" for j in range(model.p)),
        mu=mu,
    )
