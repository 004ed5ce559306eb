"""Large-scale fading, uplink pilot assignment and channel-estimation quality."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ChannelConfig
from .deployment import NetworkGeometry


@dataclass(frozen=True)
class LargeScaleState:
    """Per-snapshot channel statistics shared by every evaluated variant.

    ``beta`` and ``gamma`` are (M, K) linear gains; ``gamma`` is the mean
    square of the MMSE channel estimate, so ``beta - gamma`` is the
    estimation-error variance.
    """

    beta: np.ndarray
    pilot_of_ue: np.ndarray
    gamma: np.ndarray
    rho_d: float
    rho_p: float
    tau: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.beta.shape

    def copilot(self) -> np.ndarray:
        """(K, K) boolean, True where two UEs share a pilot (diagonal included)."""
        p = self.pilot_of_ue
        return p[:, None] == p[None, :]

    @classmethod
    def build(cls, beta, pilot_of_ue, rho_d: float, rho_p: float, tau: int) -> "LargeScaleState":
        beta = np.asarray(beta, dtype=float)
        pilots = np.asarray(pilot_of_ue, dtype=np.int64)
        gamma = estimate_quality(beta, pilots, rho_p, tau)
        return cls(beta=beta, pilot_of_ue=pilots, gamma=gamma,
                   rho_d=float(rho_d), rho_p=float(rho_p), tau=int(tau))


def path_loss_db(distance, params: ChannelConfig):
    """Three-slope path loss in dB (returned as a non-positive gain).

    Distances are given in metres; breakpoints ``d0``/``d1`` too. The log terms
    are evaluated in kilometres, which is the unit the Hata-COST231 fixed loss
    is calibrated for.
    """
    d = np.asarray(distance, dtype=float) / 1000.0
    d0, d1 = params.d0 / 1000.0, params.d1 / 1000.0
    loss = params.hata_loss_db
    far = -loss - 35.0 * np.log10(np.maximum(d, d1))
    mid = -loss - 15.0 * np.log10(d1) - 20.0 * np.log10(np.clip(d, d0, d1))
    out = np.where(d > d1, far, mid)
    return out if out.ndim else float(out)


def large_scale_gains(geometry: NetworkGeometry, params: ChannelConfig, seed) -> np.ndarray:
    """Linear gains beta (M, K) with log-normal shadowing beyond ``d1``."""
    rng = np.random.default_rng(seed)
    dist = geometry.distances()
    pl = path_loss_db(dist, params)
    shadow = params.shadow_std_db * rng.standard_normal(dist.shape)
    shadow[dist <= params.d1] = 0.0
    return 10.0 ** ((pl + shadow) / 10.0)


def assign_pilots(n_ues: int, tau: int, seed) -> np.ndarray:
    """Independent uniform pilot index per UE, collisions allowed."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    rng = np.random.default_rng(seed)
    return rng.integers(0, tau, size=n_ues)


def estimate_quality(beta, pilot_of_ue, rho_p: float, tau: int) -> np.ndarray:
    """Mean square of the MMSE estimate under (possibly shared) orthogonal pilots."""
    beta = np.asarray(beta, dtype=float)
    pilots = np.asarray(pilot_of_ue)
    if rho_p <= 0 or tau < 1:
        raise ValueError("rho_p must be positive and tau >= 1")
    n_pilots = int(pilots.max()) + 1 if pilots.size else 0
    # per-AP received pilot power on each pilot index, then mapped back to UEs
    onehot = np.zeros((pilots.size, n_pilots))
    onehot[np.arange(pilots.size), pilots] = 1.0
    pilot_power = (beta @ onehot)[:, pilots]
    snr = tau * rho_p
    return snr * beta**2 / (snr * pilot_power + 1.0)


def draw_state(geometry: NetworkGeometry, params: ChannelConfig, seed) -> LargeScaleState:
    """Gains, pilots and estimation quality for one snapshot."""
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    shadow_seed, pilot_seed = seed.spawn(2)
    beta = large_scale_gains(geometry, params, shadow_seed)
    pilots = assign_pilots(geometry.n_ues, params.tau, pilot_seed)
    return LargeScaleState.build(beta, pilots, params.rho_d, params.rho_p, params.tau)
