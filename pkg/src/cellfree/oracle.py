"""Monte-Carlo link simulator used to validate the closed-form SINR.

Draws Rayleigh channels, sends pilots, forms MMSE estimates, precodes with the
conjugate estimates and measures the effective-channel statistics that the
closed form predicts. Meant for desk-sized instances only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LargeScaleState
from .evaluation import SinrTerms

MAX_APS = 8
MAX_UES = 4
MIN_REALIZATIONS = 10_000
N_BATCHES = 100

TERMS = ("desired", "pilot_contamination", "interference", "noise")


class OracleGuardError(ValueError):
    """Instance too large (or too few realizations) for the oracle."""


@dataclass(frozen=True)
class SmallScaleRealization:
    g: np.ndarray       # (n, M, K) true channels
    g_hat: np.ndarray   # (n, M, K) MMSE estimates
    symbols: np.ndarray  # (n, K) unit-power data symbols
    noise: np.ndarray   # (n, K) downlink receiver noise


@dataclass(frozen=True)
class TermEstimate:
    mean: np.ndarray
    se: np.ndarray


@dataclass(frozen=True)
class OracleReport:
    terms: dict
    n_realizations: int

    @property
    def sinr(self) -> np.ndarray:
        t = self.terms
        return t["desired"].mean / (t["pilot_contamination"].mean + t["interference"].mean
                                    + t["noise"].mean)


def _check_guard(state: LargeScaleState, n: int) -> None:
    m, k = state.beta.shape
    if m > MAX_APS or k > MAX_UES:
        raise OracleGuardError(f"oracle limited to M <= {MAX_APS}, K <= {MAX_UES}; got {m}x{k}")
    if n < MIN_REALIZATIONS:
        raise OracleGuardError(f"need at least {MIN_REALIZATIONS} realizations, got {n}")


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_realizations(state: LargeScaleState, n: int, rng: np.random.Generator) -> SmallScaleRealization:
    beta, pilots = state.beta, state.pilot_of_ue
    m, k = beta.shape
    g = np.sqrt(beta) * _cn(rng, (n, m, k))
    # de-spread pilot observation: one noise sample per (AP, pilot index)
    n_pilots = int(pilots.max()) + 1
    pilot_noise = _cn(rng, (n, m, n_pilots))
    snr = state.tau * state.rho_p
    onehot = (pilots[:, None] == np.arange(n_pilots)[None, :]).astype(float)
    received = np.sqrt(snr) * (g @ onehot) + pilot_noise  # (n, M, P)
    copilot_power = (beta @ onehot)[:, pilots]
    c = np.sqrt(snr) * beta / (snr * copilot_power + 1.0)
    g_hat = c * received[:, :, pilots]
    phases = rng.integers(0, 4, size=(n, k))
    symbols = np.exp(1j * (np.pi / 4 + np.pi / 2 * phases))
    return SmallScaleRealization(g=g, g_hat=g_hat, symbols=symbols, noise=_cn(rng, (n, k)))


def effective_gains(state: LargeScaleState, eta: np.ndarray,
                    real: SmallScaleRealization) -> np.ndarray:
    """a[n, k, j]: gain seen by UE k on the stream precoded for UE j."""
    w = np.sqrt(state.rho_d * eta)
    return np.einsum("nmk,nmj->nkj", real.g, w * np.conj(real.g_hat), optimize=True)


def _batch_terms(state: LargeScaleState, a: np.ndarray, noise: np.ndarray) -> np.ndarray:
    nb = a.shape[0]
    mu = a.mean(axis=0)
    var = np.sum(np.abs(a - mu) ** 2, axis=0) / (nb - 1)
    # |mean|^2 minus its bias var/n is unbiased for |E a|^2
    power = np.abs(mu) ** 2 - var / nb
    cross = state.copilot()
    np.fill_diagonal(cross, False)
    return np.stack([
        np.diag(power),
        np.sum(np.where(cross, power, 0.0), axis=1),
        var.sum(axis=1),
        np.mean(np.abs(noise) ** 2, axis=0),
    ])


def simulate_sinr(state: LargeScaleState, serving, eta: np.ndarray, n_realizations: int,
                  seed) -> OracleReport:
    """Monte-Carlo estimate of each SINR term, with batch-means standard errors.

    ``serving`` is a ServingMap or (M, K) mask; coefficients outside it are
    ignored, so each AP transmits only to its own served UEs.
    """
    _check_guard(state, n_realizations)
    mask = getattr(serving, "serving", serving)
    eta = np.where(np.asarray(mask, bool), eta, 0.0) if mask is not None else eta
    rng = np.random.default_rng(seed)
    batch = n_realizations // N_BATCHES
    estimates = []
    for _ in range(N_BATCHES):
        real = draw_realizations(state, batch, rng)
        estimates.append(_batch_terms(state, effective_gains(state, eta, real), real.noise))
    est = np.stack(estimates)  # (B, 4, K)
    mean = est.mean(axis=0)
    se = est.std(axis=0, ddof=1) / np.sqrt(N_BATCHES)
    terms = {name: TermEstimate(mean[i], se[i]) for i, name in enumerate(TERMS)}
    return OracleReport(terms=terms, n_realizations=batch * N_BATCHES)


def per_ap_radiated_power(real: SmallScaleRealization, eta: np.ndarray,
                          state: LargeScaleState) -> TermEstimate:
    """Empirical E|x_m|^2 / rho_d per AP."""
    x = np.einsum("nmk,nk->nm", np.sqrt(eta) * np.conj(real.g_hat), real.symbols)
    p = np.abs(x) ** 2
    return TermEstimate(p.mean(axis=0), p.std(axis=0, ddof=1) / np.sqrt(p.shape[0]))


def estimate_moments(state: LargeScaleState, n_realizations: int, seed) -> dict:
    """Empirical E|g|^2, E|g_hat|^2 and E[(g - g_hat) g_hat^*] with standard errors."""
    _check_guard(state, n_realizations)
    real = draw_realizations(state, n_realizations, np.random.default_rng(seed))
    n = n_realizations
    samples = {
        "g_power": np.abs(real.g) ** 2,
        "g_hat_power": np.abs(real.g_hat) ** 2,
        "error_correlation": (real.g - real.g_hat) * np.conj(real.g_hat),
    }
    return {name: TermEstimate(s.mean(axis=0), s.std(axis=0, ddof=1) / np.sqrt(n))
            for name, s in samples.items()}


@dataclass(frozen=True)
class TermComparison:
    ue: int
    term: str
    closed_form: float
    oracle: float
    se: float
    n_se: float

    @property
    def ok(self) -> bool:
        if self.se == 0.0:
            return abs(self.closed_form - self.oracle) <= 1e-12 * max(1.0, abs(self.closed_form))
        return abs(self.closed_form - self.oracle) <= self.n_se * self.se


def compare_terms(closed: SinrTerms, report: OracleReport, n_se: float = 3.0) -> list[TermComparison]:
    rows = []
    for name in TERMS:
        cf = getattr(closed, name)
        est = report.terms[name]
        for k in range(cf.size):
            rows.append(TermComparison(k, name, float(cf[k]), float(est.mean[k]),
                                       float(est.se[k]), n_se))
    return rows


def format_comparison(rows: list[TermComparison]) -> str:
    lines = [f"{'ue':>3} {'term':<20} {'closed_form':>14} {'oracle':>14} {'se':>11} "
             f"{'z':>7}  ok"]
    for r in rows:
        z = (r.oracle - r.closed_form) / r.se if r.se > 0 else 0.0
        lines.append(f"{r.ue:>3} {r.term:<20} {r.closed_form:>14.6g} {r.oracle:>14.6g} "
                     f"{r.se:>11.3g} {z:>7.2f}  {'yes' if r.ok else 'NO'}")
    return "\n".join(lines)


def default_instance():
    """Three APs, two UEs sharing one pilot, all APs serving both UEs.

    Gains are normalised so that rho * beta is of order one, which keeps every
    SINR term visible; the closed form depends on the gains only through
    those products.
    """
    from .power import SQRT_INVERSE, compute_eta

    beta = np.array([[0.8, 0.3],
                     [0.2, 0.6],
                     [0.05, 0.1]])
    state = LargeScaleState.build(beta, [0, 0], rho_d=10.0, rho_p=5.0, tau=1)
    serving = np.ones(beta.shape, dtype=bool)
    return state, serving, compute_eta(state, serving, SQRT_INVERSE)
