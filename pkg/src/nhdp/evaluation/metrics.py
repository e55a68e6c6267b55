"""Variation of information, posterior similarity and minVI point estimates."""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform
from scipy.stats import entropy
from sklearn.metrics import mutual_info_score

from nhdp.common.exceptions import EvaluationException
from nhdp.common.models import Level
from nhdp.common.utils import canonical_labels
from nhdp.evaluation import logger
from nhdp.model.transforms import group_means
from nhdp.sampler.models import PosteriorSamples
from nhdp.synth.models import SynthTruth

LINKAGE_METHODS = ("average", "complete", "single", "weighted")
TIE_TOL = 1e-12


def _entropy(labels: np.ndarray) -> float:
    return float(entropy(np.unique(labels, return_counts=True)[1]))


def vi_distance(p1: Sequence[int], p2: Sequence[int]) -> float:
    """
    Variation of information H(p1) + H(p2) - 2 I(p1, p2), in nats.

    Raises:
        EvaluationException: If the partitions have different lengths
    """
    p1 = np.asarray(p1)
    p2 = np.asarray(p2)
    if p1.shape != p2.shape:
        raise EvaluationException(
            f"partitions have different lengths: {p1.size} and {p2.size}"
        )
    if p1.size == 0:
        return 0.0
    vi = _entropy(p1) + _entropy(p2) - 2.0 * mutual_info_score(p1, p2)
    return max(0.0, float(vi))


@dataclass(frozen=True, eq=False)
class Psm:
    """Pairwise co-clustering frequencies over retained draws."""

    matrix: np.ndarray
    level: Level


def similarity_matrix(draws: np.ndarray) -> np.ndarray:
    """Co-clustering frequencies of the columns of a (draws x items) label matrix."""
    draws = np.asarray(draws)
    smat = np.zeros((draws.shape[1], draws.shape[1]))
    for labels in draws:
        smat += labels[None, :] == labels[:, None]
    return smat / draws.shape[0]


def compute_psm(samples: PosteriorSamples, level: Level) -> Psm:
    if samples.n_draws < 1:
        raise EvaluationException("posterior similarity needs at least one draw")
    return Psm(matrix=similarity_matrix(samples.labels(level)), level=Level(level))


def mean_vi(partition: Sequence[int], draws: np.ndarray) -> float:
    """Average VI from a partition to every row of draws."""
    return float(np.mean([vi_distance(partition, d) for d in draws]))


def _unique_draws(draws: np.ndarray):
    canonical = np.array([canonical_labels(d) for d in draws])
    unique, first, counts = np.unique(
        canonical, axis=0, return_index=True, return_counts=True
    )
    order = np.argsort(first, kind="stable")
    return unique[order], counts[order]


def hierarchical_candidates(
    psm: np.ndarray, max_clusters: int, method: str = "average"
) -> List[np.ndarray]:
    """Cuts into 1..max_clusters clusters of the linkage tree on 1 - PSM."""
    if method not in LINKAGE_METHODS:
        raise EvaluationException(f"unknown linkage method: {method}")
    n = psm.shape[0]
    if n < 2:
        return [np.zeros(n, dtype=np.int64)]
    distance = 1.0 - psm
    np.fill_diagonal(distance, 0.0)
    tree = linkage(squareform(distance, checks=False), method=method)
    return [
        canonical_labels(fcluster(tree, t=k, criterion="maxclust"))
        for k in range(1, max_clusters + 1)
    ]


def minvi_point_estimate(
    samples: PosteriorSamples, level: Level, method: str = "average"
) -> np.ndarray:
    """
    The candidate partition with the smallest mean VI to the retained draws.

    Candidates are the distinct sampled partitions and the cuts of an
    agglomerative tree on 1 - PSM into 1 up to the largest sampled number of
    clusters. Ties go to the partition with fewer clusters, then to the
    first candidate seen.

    Args:
        samples: Retained draws
        level: Resolution level
        method: Linkage method of the agglomerative tree

    Returns:
        Canonical labels of the point estimate
    """
    draws = samples.labels(level)
    if draws.shape[0] < 1:
        raise EvaluationException("minVI needs at least one draw")
    unique, counts = _unique_draws(draws)
    weights = counts / counts.sum()
    max_clusters = int(max(u.max() for u in unique)) + 1

    candidates = list(unique)
    seen = {tuple(c.tolist()) for c in candidates}
    for cut in hierarchical_candidates(similarity_matrix(draws), max_clusters, method):
        key = tuple(cut.tolist())
        if key not in seen:
            seen.add(key)
            candidates.append(cut)

    scores = np.array(
        [sum(w * vi_distance(c, u) for w, u in zip(weights, unique)) for c in candidates]
    )
    best = scores.min()
    tied = [i for i, s in enumerate(scores) if s <= best + TIE_TOL]
    chosen = min(tied, key=lambda i: (int(candidates[i].max()) + 1, i))
    logger.info(
        f"minVI ({Level(level).value}): {len(candidates)} candidates, "
        f"mean VI {scores[chosen]:.4f}, {int(candidates[chosen].max()) + 1} clusters"
    )
    return candidates[chosen]


def posterior_theta(samples: PosteriorSamples, values: np.ndarray) -> np.ndarray:
    """Per-unit average over draws of the cluster posterior mean sum/(n + k0)."""
    theta = np.zeros(values.size)
    for labels in samples.gamma_h:
        n = np.bincount(labels)
        s = np.bincount(labels, weights=values)
        theta += (s / (n + samples.k0))[labels]
    return theta / samples.n_draws


def posterior_phi(
    samples: PosteriorSamples, values: np.ndarray, group_of: np.ndarray
) -> np.ndarray:
    """Per-group average over draws of the mean aggregated data of its cluster."""
    aggregated = group_means(values, group_of)
    phi = np.zeros(aggregated.size)
    for labels in samples.gamma_l:
        n = np.bincount(labels)
        s = np.bincount(labels, weights=aggregated)
        phi += (s / n)[labels]
    return phi / samples.n_draws


def _rmse(estimate: np.ndarray, truth: np.ndarray) -> float:
    if estimate.shape != truth.shape:
        raise EvaluationException("estimate and truth have different shapes")
    return float(np.sqrt(np.mean((estimate - truth) ** 2)))


def rmse_theta(samples: PosteriorSamples, truth: SynthTruth) -> float:
    if samples.n_draws < 1:
        raise EvaluationException("RMSE needs at least one draw")
    estimate = posterior_theta(samples, truth.dataset.values)
    return _rmse(estimate, truth.true_theta)


def rmse_phi(samples: PosteriorSamples, truth: SynthTruth) -> float:
    if samples.n_draws < 1:
        raise EvaluationException("RMSE needs at least one draw")
    estimate = posterior_phi(samples, truth.dataset.values, truth.dataset.group_of)
    return _rmse(estimate, truth.true_phi)
