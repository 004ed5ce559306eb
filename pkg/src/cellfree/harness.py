"""Monte-Carlo experiment driver.

Every snapshot draws one deployment and one set of large-scale statistics;
all variants (mode x power policy) are evaluated on that same state so the
comparison between them is paired.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .association import derive_serving_map, selection_mask
from .channel import draw_state
from .config import Config, parse_policy
from .deployment import generate_deployment, partition_clusters
from .evaluation import percentiles, sinr_closed_form, spectral_efficiency
from .power import PowerPolicy, compute_eta

log = logging.getLogger(__name__)

# Snapshot i uses SeedSequence(entropy=master_seed, spawn_key=(i,)); its first
# child seeds the deployment, its second the channel (shadowing, then pilots).
SEED_SCHEME = "numpy-seedsequence-v1"


class SnapshotError(RuntimeError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"snapshot {index}: {type(cause).__name__}: {cause}")
        self.index = index


@dataclass(frozen=True)
class Variant:
    mode: str
    policy: PowerPolicy

    @property
    def name(self) -> str:
        return f"{self.mode}/{self.policy.basis}/{self.policy.alpha:g}"


def snapshot_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))


def default_variants(config: Config) -> list[Variant]:
    if config.experiment.policies:
        policies = [PowerPolicy(*parse_policy(p)) for p in config.experiment.policies]
    else:
        policies = [PowerPolicy(config.power.basis, config.power.alpha)]
    return [Variant(mode, policy) for mode in config.experiment.modes for policy in policies]


@dataclass
class SnapshotOutcome:
    index: int
    ue: np.ndarray                       # in-focus UE indices
    sinr: dict = field(default_factory=dict)
    se: dict = field(default_factory=dict)
    selection_size: dict = field(default_factory=dict)
    cluster_count: dict = field(default_factory=dict)


def evaluate_snapshot(config: Config, variants: list[Variant], index: int) -> SnapshotOutcome:
    try:
        deploy_seed, channel_seed = snapshot_seed(config.experiment.master_seed, index).spawn(2)
        geometry = generate_deployment(config.deployment, deploy_seed)
        partition = partition_clusters(geometry, config.deployment.n_per_side)
        state = draw_state(geometry, config.channel, channel_seed)
        assoc = config.association
        selection = None
        if any(v.mode == "proposed" for v in variants):
            selection = selection_mask(geometry, state.beta, assoc.strategy,
                                       assoc.n_select, assoc.delta)
        focus = np.flatnonzero(geometry.ue_in_focus)
        out = SnapshotOutcome(index=index, ue=focus)
        maps = {}
        for v in variants:
            if v.mode not in maps:
                maps[v.mode] = derive_serving_map(selection, partition, v.mode, state.beta,
                                                  assoc.comp_metric)
            smap = maps[v.mode]
            eta = compute_eta(state, smap, v.policy)
            sinr = sinr_closed_form(state, eta)[focus]
            out.sinr[v.name] = sinr
            out.se[v.name] = spectral_efficiency(sinr, config.prelog)
            out.selection_size[v.name] = smap.selection_size[focus]
            out.cluster_count[v.name] = smap.cluster_count[focus]
        return out
    except Exception as exc:
        raise SnapshotError(index, exc) from exc


def _evaluate_star(args):
    return evaluate_snapshot(*args)


@dataclass
class VariantSamples:
    snapshot: np.ndarray
    ue: np.ndarray
    sinr: np.ndarray
    se: np.ndarray
    min_se: np.ndarray
    selection_size: np.ndarray
    cluster_count: np.ndarray

    def table(self, qs) -> dict:
        return {
            "per_user_se": dict(zip(map(float, qs), percentiles(self.se, qs).tolist())),
            "min_se": dict(zip(map(float, qs), percentiles(self.min_se, qs).tolist())),
        }

    @property
    def se_95_likely(self) -> float:
        return float(percentiles(self.se, 5.0))

    @property
    def median_se(self) -> float:
        return float(percentiles(self.se, 50.0))


@dataclass
class ExperimentResult:
    config: Config
    variants: list
    samples: dict  # variant name -> VariantSamples

    def __getitem__(self, name: str) -> VariantSamples:
        return self.samples[name]

    def summary(self) -> dict:
        qs = self.config.experiment.percentiles
        out = {
            "version": __version__,
            "seed_scheme": SEED_SCHEME,
            "master_seed": self.config.experiment.master_seed,
            "n_snapshots": self.config.experiment.n_snapshots,
            "prelog": self.config.prelog,
            "derived": {
                "hata_loss_db": self.config.channel.hata_loss_db,
                "noise_power_mw": self.config.channel.noise_power_mw,
                "rho_d": self.config.channel.rho_d,
                "rho_p": self.config.channel.rho_p,
            },
            "config": self.config.to_dict(),
            "variants": {},
        }
        for v in self.variants:
            s = self.samples[v.name]
            b_values, b_counts = np.unique(s.cluster_count, return_counts=True)
            out["variants"][v.name] = {
                "mode": v.mode,
                "basis": v.policy.basis,
                "alpha": v.policy.alpha,
                "n_samples": int(s.se.size),
                "n_min_samples": int(s.min_se.size),
                "percentiles": {metric: {f"{q:g}": val for q, val in table.items()}
                                for metric, table in s.table(qs).items()},
                "mean_selection_size": float(s.selection_size.mean()),
                "serving_cluster_histogram": {str(int(b)): int(c)
                                              for b, c in zip(b_values, b_counts)},
            }
        return out


def _collect(config: Config, variants: list[Variant], outcomes: list[SnapshotOutcome]) -> ExperimentResult:
    samples = {}
    for v in variants:
        name = v.name
        samples[name] = VariantSamples(
            snapshot=np.concatenate([np.full(o.ue.size, o.index) for o in outcomes]),
            ue=np.concatenate([o.ue for o in outcomes]),
            sinr=np.concatenate([o.sinr[name] for o in outcomes]),
            se=np.concatenate([o.se[name] for o in outcomes]),
            min_se=np.array([o.se[name].min() if o.se[name].size else np.nan for o in outcomes]),
            selection_size=np.concatenate([o.selection_size[name] for o in outcomes]),
            cluster_count=np.concatenate([o.cluster_count[name] for o in outcomes]),
        )
    return ExperimentResult(config=config, variants=list(variants), samples=samples)


def run_experiment(config: Config, variants: list[Variant] | None = None,
                   workers: int = 1) -> ExperimentResult:
    """Evaluate every variant over ``config.experiment.n_snapshots`` paired snapshots.

    The output does not depend on ``workers``: snapshots are seeded by index
    and merged in index order.
    """
    config.validate()
    variants = default_variants(config) if variants is None else list(variants)
    names = [v.name for v in variants]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate variants: {names}")
    n = config.experiment.n_snapshots
    jobs = [(config, variants, i) for i in range(n)]
    log.info("running %d snapshots x %d variants on %d worker(s)", n, len(variants), workers)
    if workers <= 1:
        outcomes = [_evaluate_star(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_evaluate_star, jobs, chunksize=max(1, n // (4 * workers))))
    outcomes.sort(key=lambda o: o.index)
    return _collect(config, variants, outcomes)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    se_95_likely: float
    median_se: float


def sweep_alpha(config: Config, alpha_grid=None, workers: int = 1,
                mode: str = "proposed") -> tuple[list[SweepRow], ExperimentResult]:
    """95%-likely and median per-user SE for each exponent, on paired snapshots.

    Repeated grid entries produce repeated rows from a single evaluation.
    """
    grid = list(config.experiment.alpha_grid if alpha_grid is None else alpha_grid)
    if not grid:
        raise ValueError("alpha grid must not be empty")
    unique = list(dict.fromkeys(float(a) for a in grid))
    variants = [Variant(mode, PowerPolicy(config.power.basis, a)) for a in unique]
    result = run_experiment(config, variants, workers)
    by_alpha = {v.policy.alpha: result[v.name] for v in variants}
    rows = [SweepRow(float(a), by_alpha[float(a)].se_95_likely, by_alpha[float(a)].median_se)
            for a in grid]
    return rows, result


def compare_modes(config: Config, workers: int = 1) -> ExperimentResult:
    policy = PowerPolicy(config.power.basis, config.power.alpha)
    variants = [Variant(mode, policy) for mode in ("canonical", "proposed", "comp_jt")]
    return run_experiment(config, variants, workers)
