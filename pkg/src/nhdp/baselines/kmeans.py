"""Two-stage K-means with silhouette selection of the number of clusters."""

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from sklearn.cluster import KMeans
from sklearn.metrics import silhouette_score

from nhdp.baselines import logger
from nhdp.common.exceptions import BaselineException
from nhdp.common.utils import canonical_labels
from nhdp.sampler.models import PosteriorSamples
from nhdp.state.models import PartitionPair, TwoLevelDataset

DEFAULT_K_MAX = 20
N_RESTARTS = 10


@dataclass(frozen=True, eq=False)
class KmeansResult:
    """Labels and centers of the chosen K, with the scanned silhouette curve."""

    labels: np.ndarray
    centers: np.ndarray
    chosen_k: int
    silhouette_by_k: Dict[int, float] = field(default_factory=dict)


def _as_points(points: np.ndarray) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    return points.reshape(-1, 1) if points.ndim == 1 else points


def silhouette(points: np.ndarray, labels: np.ndarray) -> float:
    """
    Mean silhouette width with the Euclidean metric.

    Points whose intra- and nearest-cluster distances are both 0 score 0.

    Raises:
        BaselineException: If there are fewer than two clusters
    """
    points = _as_points(points)
    labels = np.asarray(labels)
    n_labels = np.unique(labels).size
    if n_labels < 2:
        raise BaselineException("silhouette needs at least two clusters")
    if n_labels >= points.shape[0]:
        raise BaselineException("silhouette needs fewer clusters than points")
    return float(silhouette_score(points, labels, metric="euclidean"))


def _centers(points: np.ndarray, labels: np.ndarray) -> np.ndarray:
    return np.stack([points[labels == c].mean(axis=0) for c in range(int(labels.max()) + 1)])


def kmeans_scan(points: np.ndarray, k_max: int, seed: int) -> KmeansResult:
    """
    Fit K-means for K = 2..k_max and keep the K with the largest silhouette.

    K is capped by the number of distinct points and by n - 1. When no K can
    be scored (two distinct points or fewer), each distinct point is its own
    cluster.

    Args:
        points: (n, d) or (n,) array
        k_max: Largest K to try
        seed: Seed of the K-means initialisations

    Returns:
        The chosen clustering
    """
    points = _as_points(points)
    distinct, inverse = np.unique(points, axis=0, return_inverse=True)
    upper = min(k_max, distinct.shape[0], points.shape[0] - 1)
    if upper < 2:
        labels = canonical_labels(inverse.reshape(-1))
        return KmeansResult(
            labels=labels,
            centers=_centers(points, labels),
            chosen_k=int(labels.max()) + 1,
        )

    curve: Dict[int, float] = {}
    fits: Dict[int, np.ndarray] = {}
    for k in range(2, upper + 1):
        fit = KMeans(n_clusters=k, n_init=N_RESTARTS, random_state=seed).fit(points)
        labels = canonical_labels(fit.labels_)
        if int(labels.max()) + 1 < 2:
            continue
        curve[k] = silhouette(points, labels)
        fits[k] = labels
    chosen = max(curve, key=lambda k: (curve[k], -k))
    labels = fits[chosen]
    logger.debug(f"Silhouette curve: {curve}, chosen K = {chosen}")
    return KmeansResult(
        labels=labels,
        centers=_centers(points, labels),
        chosen_k=chosen,
        silhouette_by_k=curve,
    )


def cluster_proportions(dataset: TwoLevelDataset, gamma_h: np.ndarray) -> np.ndarray:
    """Per-group share of units in each high-resolution cluster; rows sum to 1."""
    counts = np.zeros((dataset.n_groups, int(gamma_h.max()) + 1))
    np.add.at(counts, (dataset.group_of, gamma_h), 1.0)
    return counts / counts.sum(axis=1, keepdims=True)


def default_k_max(n: int) -> int:
    return max(2, min(DEFAULT_K_MAX, n - 1))


def multilevel_kmeans(
    data: TwoLevelDataset, k_max: Optional[int] = None, seed: int = 0
) -> PartitionPair:
    """
    K-means on the unit values, then K-means on the per-group cluster proportions.

    Args:
        data: Dataset
        k_max: Largest K of both scans, min(20, n - 1) when omitted
        seed: Seed of the K-means initialisations

    Returns:
        The low- and high-resolution partitions

    Raises:
        BaselineException: If k_max < 2 or the values take fewer than two distinct values
    """
    k_max = default_k_max(data.n_customers) if k_max is None else k_max
    if k_max < 2:
        raise BaselineException(f"k_max must be at least 2, got {k_max}")
    if np.unique(data.values).size < 2:
        raise BaselineException("K-means needs at least two distinct values")

    stage1 = kmeans_scan(data.values, k_max, seed)
    proportions = cluster_proportions(data, stage1.labels)
    stage2 = kmeans_scan(proportions, k_max, seed)
    logger.info(
        f"Multilevel K-means: K_H = {stage1.chosen_k}, K_L = {stage2.chosen_k}"
    )
    return PartitionPair(gamma_l=stage2.labels, gamma_h=stage1.labels)


def point_samples(pair: PartitionPair) -> PosteriorSamples:
    """A one-draw sample with k0 = 0, so posterior means are plain cluster means."""
    one = np.zeros(1)
    return PosteriorSamples(
        gamma_l=pair.gamma_l[None, :],
        gamma_h=pair.gamma_h[None, :],
        sigma2=np.full(1, np.nan),
        alpha0=np.full(1, np.nan),
        alpha1=np.full(1, np.nan),
        alpha2=np.full(1, np.nan),
        log_posterior=np.full(1, np.nan),
        iteration=one.astype(np.int64),
        chain=one.astype(np.int64),
        k0=0.0,
    )
