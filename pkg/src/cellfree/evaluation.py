"""Closed-form downlink SINR under conjugate beamforming and SE statistics.

The bound treats the mean effective channel as known at the UE ("use and then
forget"); the denominator collects pilot-contamination interference, the
beamforming-gain uncertainty plus inter-user interference, and unit noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LargeScaleState


@dataclass(frozen=True)
class SinrTerms:
    """Per-UE SINR components, each already scaled by rho_d where applicable."""

    desired: np.ndarray
    pilot_contamination: np.ndarray
    interference: np.ndarray
    noise: np.ndarray

    @property
    def sinr(self) -> np.ndarray:
        return self.desired / (self.pilot_contamination + self.interference + self.noise)


@dataclass(frozen=True)
class SEReport:
    sinr: np.ndarray
    se: np.ndarray
    focus_min_se: float
    prelog: float


def sinr_terms(state: LargeScaleState, eta: np.ndarray) -> SinrTerms:
    beta, gamma, rho = state.beta, state.gamma, state.rho_d
    # coherent[k, j] = sum_m sqrt(eta_mj) gamma_mj beta_mk / beta_mj
    weights = np.sqrt(eta) * gamma / beta
    coherent = beta.T @ weights
    desired = rho * np.diag(coherent) ** 2
    cross = state.copilot()
    np.fill_diagonal(cross, False)
    pilot = rho * np.sum(np.where(cross, coherent, 0.0) ** 2, axis=1)
    # sum_j sum_m eta_mj gamma_mj beta_mk
    interference = rho * (beta.T @ np.sum(eta * gamma, axis=1))
    return SinrTerms(desired=desired, pilot_contamination=pilot,
                     interference=interference, noise=np.ones_like(desired))


def sinr_closed_form(state: LargeScaleState, eta: np.ndarray) -> np.ndarray:
    return sinr_terms(state, eta).sinr


def spectral_efficiency(sinr, prelog: float = 1.0) -> np.ndarray:
    if not 0.0 <= prelog <= 1.0:
        raise ValueError("prelog must lie in [0, 1]")
    sinr = np.asarray(sinr, dtype=float)
    if np.any(sinr < 0):
        raise ValueError("SINR must be non-negative")
    return prelog * np.log2(1.0 + sinr)


def se_report(state: LargeScaleState, eta: np.ndarray, in_focus: np.ndarray,
              prelog: float) -> SEReport:
    sinr = sinr_closed_form(state, eta)
    se = spectral_efficiency(sinr, prelog)
    focus = se[np.asarray(in_focus, bool)]
    return SEReport(sinr=sinr, se=se,
                    focus_min_se=float(focus.min()) if focus.size else float("nan"),
                    prelog=prelog)


def percentiles(values, qs) -> np.ndarray:
    """Percentiles with linear interpolation between order statistics."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("cannot take percentiles of an empty sample")
    return np.percentile(values, qs, method="linear")


def empirical_cdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Sorted values and right-continuous CDF levels rank/n."""
    values = np.sort(np.asarray(values, dtype=float))
    if values.size == 0:
        raise ValueError("cannot build a CDF from an empty sample")
    return values, np.arange(1, values.size + 1) / values.size


@dataclass(frozen=True)
class DistributionSummary:
    per_user_se: np.ndarray
    min_se: np.ndarray
    percentiles: tuple
    per_user_table: dict
    min_se_table: dict

    @property
    def se_95_likely(self) -> float:
        return float(percentiles(self.per_user_se, 5.0))

    @property
    def median(self) -> float:
        return float(percentiles(self.per_user_se, 50.0))


def aggregate(reports, in_focus_masks=None, qs=(5.0, 50.0, 95.0)) -> DistributionSummary:
    """Pool in-focus SE over snapshots and summarise.

    ``reports`` is a sequence of :class:`SEReport`; ``in_focus_masks`` gives the
    matching per-snapshot focus flags. Without masks every UE counts.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("aggregate needs at least one snapshot")
    if in_focus_masks is None:
        in_focus_masks = [np.ones(r.se.size, bool) for r in reports]
    pooled = np.concatenate([r.se[np.asarray(m, bool)] for r, m in zip(reports, in_focus_masks)])
    mins = np.array([r.focus_min_se for r in reports])
    qs = tuple(float(q) for q in qs)
    return DistributionSummary(
        per_user_se=pooled,
        min_se=mins,
        percentiles=qs,
        per_user_table=dict(zip(qs, percentiles(pooled, qs).tolist())),
        min_se_table=dict(zip(qs, percentiles(mins, qs).tolist())),
    )
