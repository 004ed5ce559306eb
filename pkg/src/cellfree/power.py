"""Distributed downlink power control.

Each AP spreads its budget over the UEs it serves in proportion to
``f(x_mk) = x_mk ** alpha`` where ``x`` is either the estimate quality gamma or
the large-scale gain beta, normalised so the per-AP constraint
``sum_k eta_mk * gamma_mk <= 1`` holds with equality. Only the AP's own row of
statistics is needed, so every row can be computed independently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .association import ServingMap
from .channel import LargeScaleState


class NumericDomainError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PowerPolicy:
    basis: str = "gamma"
    alpha: float = -0.5

    def __post_init__(self):
        if self.basis not in ("gamma", "beta"):
            raise ValueError(f"basis must be 'gamma' or 'beta', got {self.basis!r}")
        if not np.isfinite(self.alpha):
            raise ValueError("alpha must be finite")

    @property
    def label(self) -> str:
        return f"{self.basis}^{self.alpha:g}"


UNIFORM = PowerPolicy("gamma", 0.0)
SQRT_INVERSE = PowerPolicy("gamma", -0.5)


def compute_eta(state: LargeScaleState, serving: ServingMap | np.ndarray,
                policy: PowerPolicy) -> np.ndarray:
    """Power-control coefficients eta, shape (M, K).

    Rows of inactive APs (no served UE) are exactly zero.
    """
    mask = serving.serving if isinstance(serving, ServingMap) else np.asarray(serving, bool)
    if mask.shape != state.beta.shape:
        raise ValueError(f"serving mask shape {mask.shape} != channel shape {state.beta.shape}")
    x = state.gamma if policy.basis == "gamma" else state.beta
    weight = np.where(mask, x ** policy.alpha, 0.0)
    denom = np.sum(weight * state.gamma, axis=1, keepdims=True)
    active = mask.any(axis=1, keepdims=True)
    if np.any(active & ~(denom > 0)) or not np.all(np.isfinite(denom)):
        raise NumericDomainError("non-positive or non-finite normalisation on an active AP")
    return np.divide(weight, denom, out=np.zeros_like(weight), where=active)


def effective_power_share(state: LargeScaleState, eta: np.ndarray) -> np.ndarray:
    """Fraction gamma_mk * eta_mk of AP m's budget spent on UE k."""
    return state.gamma * eta


def constraint_residual(state: LargeScaleState, eta: np.ndarray) -> np.ndarray:
    """Per-AP ``sum_k eta_mk gamma_mk``; 1 for active APs, 0 for idle ones."""
    return np.sum(eta * state.gamma, axis=1)
