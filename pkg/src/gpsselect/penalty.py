"""Penalty families whose value increases in every ``|beta_j|``.

The path engine only needs ``p_j = dP/d|beta_j|`` at the current
coefficients.  Three families ship:

* ``lasso``:  ``sum |b|``                                  -> ``p_j = 1``
* ``enet``:   ``sum a/2 b^2 + (1-a)|b|``,  ``0 <= a <= 1``   -> ``a|b| + 1 - a``
* ``genet``:  ``sum log(a + (1-a)|b|)``,   ``0 < a < 1``     -> ``(1-a) / (a + (1-a)|b|)``

Any callable mapping ``|beta|`` to positive weights can be plugged in via
:meth:`PenaltySpec.custom`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InputError

#: Lower bound applied to ``p_j`` before dividing by it.
P_FLOOR = 1e-12

FAMILY_CODES = {"lasso": 0, "enet": 1, "genet": 2}


@dataclass(frozen=True)
class PenaltySpec:
    family: str = "lasso"
    alpha_mix: float = 0.0
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @classmethod
    def lasso(cls) -> "PenaltySpec":
        return cls("lasso", 0.0)

    @classmethod
    def enet(cls, alpha_mix: float) -> "PenaltySpec":
        return validate(cls("enet", float(alpha_mix)))

    @classmethod
    def genet(cls, alpha_mix: float) -> "PenaltySpec":
        return validate(cls("genet", float(alpha_mix)))

    @classmethod
    def custom(cls, func: Callable[[np.ndarray], np.ndarray], name: str = "custom") -> "PenaltySpec":
        """Wrap ``func(abs_beta) -> p`` where every output must be > 0."""
        return cls(name if name not in FAMILY_CODES else "custom", math.nan, func)

    @property
    def code(self) -> int:
        """Integer tag used by the compiled kernel; -1 for custom penalties."""
        if self.func is not None:
            return -1
        return FAMILY_CODES[self.family]

    def label(self) -> str:
        if self.family == "lasso" or self.func is not None:
            return self.family
        return f"{self.family}({self.alpha_mix:g})"


def validate(spec: PenaltySpec) -> PenaltySpec:
    """Return ``spec`` unchanged or raise :class:`InputError`."""
    if spec.func is not None:
        if not callable(spec.func):
            raise InputError("custom penalty must be callable")
        return spec
    a = spec.alpha_mix
    if spec.family not in FAMILY_CODES:
        raise InputError(f"unknown penalty family {spec.family!r}; choose lasso, enet or genet")
    if a is None or not isinstance(a, (int, float)) or math.isnan(a):
        raise InputError(f"penalty mixing parameter must be a number, got {a!r}")
    if spec.family == "enet" and not 0.0 <= a <= 1.0:
        raise InputError(f"enet requires 0 <= alpha <= 1, got {a}")
    if spec.family == "genet" and not 0.0 < a < 1.0:
        raise InputError(f"genet requires 0 < alpha < 1, got {a}")
    return spec


def gradient_abs(spec: PenaltySpec, beta) -> np.ndarray:
    """``dP/d|beta_j|`` evaluated at ``beta`` (depends on ``|beta|`` only)."""
    validate(spec)
    b = np.abs(np.asarray(beta, dtype=np.float64))
    if spec.func is not None:
        out = np.asarray(spec.func(b), dtype=np.float64)
        if out.shape != b.shape:
            raise InputError(f"custom penalty returned shape {out.shape}, expected {b.shape}")
        return out
    a = spec.alpha_mix
    if spec.family == "lasso":
        return np.ones_like(b)
    if spec.family == "enet":
        return a * b + (1.0 - a)
    return (1.0 - a) / (a + (1.0 - a) * b)


def parse_penalty(name: str, alpha: float | None = None) -> PenaltySpec:
    """Build a spec from CLI-style ``name`` (+ ``alpha`` for the mixed families)."""
    name = name.lower()
    if name == "lasso":
        return PenaltySpec.lasso()
    if name in ("enet", "genet"):
        return validate(PenaltySpec(name, 0.5 if alpha is None else float(alpha)))
    raise InputError(f"unknown penalty {name!r}; choose lasso, enet or genet")
