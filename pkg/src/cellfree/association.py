"""AP selection and serving maps for the proposed, canonical and CoMP-JT modes.

Every mode ends in the same representation: a boolean (M, K) mask telling
which AP transmits to which UE. ``T_m`` (the UEs served by AP ``m``) is a row
of that mask, the serving set of UE ``k`` is a column.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ConfigError
from .deployment import ClusterPartition, NetworkGeometry

MODES = ("proposed", "canonical", "comp_jt")


class InvalidSelectionError(ValueError):
    """A UE has an empty user-centric cluster in proposed mode."""


@dataclass(frozen=True)
class ServingMap:
    selected: np.ndarray          # (M, K) user-centric selection
    serving_clusters: np.ndarray  # (N, K) clusters serving each UE
    serving: np.ndarray           # (M, K) expanded serving set

    @property
    def cluster_count(self) -> np.ndarray:
        """B_k per UE."""
        return self.serving_clusters.sum(axis=0)

    @property
    def selection_size(self) -> np.ndarray:
        """L_k per UE."""
        return self.selected.sum(axis=0)

    def serving_aps(self, ue: int) -> np.ndarray:
        return np.flatnonzero(self.serving[:, ue])

    def selected_aps(self, ue: int) -> np.ndarray:
        return np.flatnonzero(self.selected[:, ue])

    def served_ues_of_ap(self, ap: int) -> np.ndarray:
        return np.flatnonzero(self.serving[ap])


def select_aps_distance(geometry: NetworkGeometry, ue_index: int, n_select: int) -> np.ndarray:
    """Indices of the ``n_select`` nearest APs, ties to the lower AP index."""
    if not 1 <= n_select <= geometry.n_aps:
        raise ConfigError(f"n_select must lie in [1, {geometry.n_aps}], got {n_select}")
    d = np.hypot(*(geometry.ap_positions - geometry.ue_positions[ue_index]).T)
    return np.sort(np.argsort(d, kind="stable")[:n_select])


def select_aps_llsf(beta_column, delta: float) -> np.ndarray:
    """Smallest set of strongest APs holding at least ``delta`` of the total gain."""
    beta_column = np.asarray(beta_column, dtype=float)
    order = np.argsort(-beta_column, kind="stable")
    cumulative = np.cumsum(beta_column[order])
    # relative slack absorbs round-off in the cumulative sum
    target = delta * cumulative[-1] * (1.0 - 1e-12)
    count = int(np.searchsorted(cumulative, target, side="left")) + 1
    count = min(count, beta_column.size)
    chosen = order[:count]
    return np.sort(chosen[beta_column[chosen] > 0])


def selection_mask(geometry: NetworkGeometry, beta: np.ndarray, strategy: str,
                   n_select: int = 5, delta: float = 0.95) -> np.ndarray:
    """User-centric selections for all UEs as an (M, K) mask."""
    m, k = beta.shape
    mask = np.zeros((m, k), dtype=bool)
    if strategy == "distance":
        if not 1 <= n_select <= m:
            raise ConfigError(f"n_select must lie in [1, {m}], got {n_select}")
        order = np.argsort(geometry.distances(), axis=0, kind="stable")[:n_select]
        mask[order, np.arange(k)] = True
    elif strategy == "llsf":
        for ue in range(k):
            mask[select_aps_llsf(beta[:, ue], delta), ue] = True
    else:
        raise ConfigError(f"unknown selection strategy {strategy!r}")
    return mask


def _cluster_scores(beta: np.ndarray, partition: ClusterPartition, metric: str) -> np.ndarray:
    n, k = partition.n_clusters, beta.shape[1]
    if metric == "beta_sum":
        scores = np.zeros((n, k))
        np.add.at(scores, partition.cluster_of_ap, beta)
        return scores
    if metric == "max_beta":
        scores = np.zeros((n, k))
        np.maximum.at(scores, partition.cluster_of_ap, beta)
        return scores
    raise ConfigError(f"unknown CoMP-JT cluster metric {metric!r}")


def best_cluster(beta: np.ndarray, partition: ClusterPartition, ue_index: int,
                 metric: str = "beta_sum") -> int:
    """Cluster with the largest aggregate gain toward the UE, ties to the lower index."""
    scores = _cluster_scores(np.asarray(beta)[:, [ue_index]], partition, metric)[:, 0]
    return int(np.argmax(scores))


def derive_serving_map(selection: np.ndarray | None, partition: ClusterPartition, mode: str,
                       beta: np.ndarray | None = None,
                       comp_metric: str = "beta_sum") -> ServingMap:
    """Expand per-UE selections into full serving sets for ``mode``."""
    onehot = np.zeros((partition.cluster_of_ap.size, partition.n_clusters), dtype=bool)
    onehot[np.arange(partition.cluster_of_ap.size), partition.cluster_of_ap] = True

    if mode == "proposed":
        if selection is None:
            raise InvalidSelectionError("proposed mode needs a selection")
        selection = np.asarray(selection, dtype=bool)
        empty = np.flatnonzero(~selection.any(axis=0))
        if empty.size:
            raise InvalidSelectionError(f"empty user-centric cluster for UE(s) {empty.tolist()}")
        clusters = (onehot.T.astype(np.int64) @ selection.astype(np.int64)) > 0
    elif mode == "canonical":
        k = selection.shape[1] if selection is not None else beta.shape[1]
        clusters = np.zeros((partition.n_clusters, k), dtype=bool)
        clusters[np.unique(partition.cluster_of_ap)] = True
    elif mode == "comp_jt":
        if beta is None:
            raise InvalidSelectionError("comp_jt mode needs the gain matrix")
        scores = _cluster_scores(beta, partition, comp_metric)
        best = np.argmax(scores, axis=0)
        clusters = np.zeros_like(scores, dtype=bool)
        clusters[best, np.arange(best.size)] = True
    else:
        raise ConfigError(f"unknown mode {mode!r}, expected one of {MODES}")

    serving = (onehot.astype(np.int64) @ clusters.astype(np.int64)) > 0
    if mode == "canonical":
        serving = np.ones_like(serving)
    # baselines ignore the user-centric selection; keep only the part they serve
    selected = serving.copy() if selection is None else np.asarray(selection, dtype=bool) & serving
    return ServingMap(selected=selected,
                      serving_clusters=clusters, serving=serving)
