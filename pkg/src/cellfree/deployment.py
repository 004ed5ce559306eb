"""Random AP/UE placement with a focus-square embedding, and cell-centric clustering.

All elements are dropped in an outer square; only those inside the centered
focus square are used for statistics, which keeps border effects away from
the evaluated population.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DeploymentConfig


@dataclass(frozen=True)
class NetworkGeometry:
    area_side: float
    focus_side: float
    ap_positions: np.ndarray  # (M, 2) metres
    ue_positions: np.ndarray  # (K, 2) metres
    ap_in_focus: np.ndarray
    ue_in_focus: np.ndarray

    @property
    def n_aps(self) -> int:
        return self.ap_positions.shape[0]

    @property
    def n_ues(self) -> int:
        return self.ue_positions.shape[0]

    def distances(self) -> np.ndarray:
        """AP-to-UE planar distances, shape (M, K)."""
        diff = self.ap_positions[:, None, :] - self.ue_positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])


@dataclass(frozen=True)
class ClusterPartition:
    n_clusters: int
    cluster_of_ap: np.ndarray

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.cluster_of_ap == cluster)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.cluster_of_ap, minlength=self.n_clusters)


def in_focus(points: np.ndarray, area_side: float, focus_side: float) -> np.ndarray:
    """Closed point-in-square test against the centered focus square."""
    lo = (area_side - focus_side) / 2.0
    hi = lo + focus_side
    return np.all((points >= lo) & (points <= hi), axis=-1)


def _uniform_in_ring(rng: np.random.Generator, n: int, area_side: float,
                     focus_side: float) -> np.ndarray:
    # The ring outer\focus is split into four rectangles (bottom, top, left, right),
    # chosen with probability proportional to their area.
    if n == 0:
        return np.empty((0, 2))
    m = (area_side - focus_side) / 2.0
    a = area_side
    rects = np.array([
        [0.0, 0.0, a, m],
        [0.0, a - m, a, a],
        [0.0, m, m, a - m],
        [a - m, m, a, a - m],
    ])
    areas = (rects[:, 2] - rects[:, 0]) * (rects[:, 3] - rects[:, 1])
    which = rng.choice(4, size=n, p=areas / areas.sum())
    r = rects[which]
    u = rng.random((n, 2))
    return np.column_stack([r[:, 0] + u[:, 0] * (r[:, 2] - r[:, 0]),
                            r[:, 1] + u[:, 1] * (r[:, 3] - r[:, 1])])


def _drop(rng: np.random.Generator, n_total: int, n_focus: int, area_side: float,
          focus_side: float) -> np.ndarray:
    lo = (area_side - focus_side) / 2.0
    inner = lo + focus_side * rng.random((n_focus, 2))
    outer = _uniform_in_ring(rng, n_total - n_focus, area_side, focus_side)
    points = np.vstack([inner, outer])
    # shuffle so element index carries no information about focus membership
    return points[rng.permutation(n_total)]


def generate_deployment(config: DeploymentConfig, seed) -> NetworkGeometry:
    """Drop APs and UEs uniformly with exactly the configured in-focus counts.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.
    """
    config.validate()
    rng = np.random.default_rng(seed)
    aps = _drop(rng, config.n_aps, config.n_aps_focus, config.area_side, config.focus_side)
    ues = _drop(rng, config.n_ues, config.n_ues_focus, config.area_side, config.focus_side)
    return NetworkGeometry(
        area_side=float(config.area_side),
        focus_side=float(config.focus_side),
        ap_positions=aps,
        ue_positions=ues,
        ap_in_focus=in_focus(aps, config.area_side, config.focus_side),
        ue_in_focus=in_focus(ues, config.area_side, config.focus_side),
    )


def partition_clusters(geometry: NetworkGeometry, n_per_side: int) -> ClusterPartition:
    """Tile the outer square into ``n_per_side**2`` equal squares, row-major.

    A point on a tile edge goes to the lower-indexed tile.
    """
    if n_per_side < 1:
        raise ValueError("n_per_side must be >= 1")
    width = geometry.area_side / n_per_side
    cols = np.clip(np.ceil(geometry.ap_positions[:, 0] / width) - 1, 0, n_per_side - 1)
    rows = np.clip(np.ceil(geometry.ap_positions[:, 1] / width) - 1, 0, n_per_side - 1)
    cluster = (rows * n_per_side + cols).astype(np.int64)
    return ClusterPartition(n_clusters=n_per_side * n_per_side, cluster_of_ap=cluster)
