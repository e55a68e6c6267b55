"""Posterior summaries: point partitions, cluster means and scores against a truth."""

from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from nhdp.common.exceptions import EvaluationException
from nhdp.common.models import Level
from nhdp.evaluation import logger
from nhdp.evaluation.metrics import mean_vi, minvi_point_estimate, rmse_phi, rmse_theta, vi_distance
from nhdp.model.transforms import destandardize, group_means
from nhdp.sampler.models import PosteriorSamples
from nhdp.state.models import PartitionPair, TwoLevelDataset
from nhdp.synth.models import SynthTruth


@dataclass(frozen=True, eq=False)
class PosteriorSummary:
    """
    Point estimate of a run with its cluster means on the original scale.

    unit_cluster_mean holds, for each high-resolution unit, the mean raw value
    of its gamma_h cluster; group_cluster_mean holds, for each group, the mean
    aggregated raw value of its gamma_l cluster.
    """

    point: PartitionPair
    unit_cluster_mean: np.ndarray
    group_cluster_mean: np.ndarray
    metrics: Dict[str, Any] = field(default_factory=dict)


def original_scale(data: TwoLevelDataset) -> np.ndarray:
    if data.transform is None:
        return data.values
    mean, sd = data.transform
    return destandardize(data.values, mean, sd)


def cluster_means(values: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Mean of values within each label, broadcast back to the items."""
    n = np.bincount(labels)
    return (np.bincount(labels, weights=values) / n)[labels]


def summarize(
    samples: PosteriorSamples, data: TwoLevelDataset, method: str = "average"
) -> PosteriorSummary:
    """
    Reduce retained draws to a minVI partition pair and descriptive metrics.

    Args:
        samples: Pooled draws
        data: The dataset the draws were fitted to
        method: Linkage of the hierarchical candidates

    Returns:
        The summary
    """
    if samples.gamma_h.shape[1] != data.n_customers or samples.gamma_l.shape[1] != data.n_groups:
        raise EvaluationException("draws do not match the dataset")
    point = PartitionPair(
        gamma_l=minvi_point_estimate(samples, Level.LOW, method),
        gamma_h=minvi_point_estimate(samples, Level.HIGH, method),
    )
    raw = original_scale(data)
    metrics: Dict[str, Any] = {
        "n_draws": samples.n_draws,
        "n_clusters_l": point.n_clusters_l,
        "n_clusters_h": point.n_clusters_h,
        "mean_vi_l": mean_vi(point.gamma_l, samples.gamma_l),
        "mean_vi_h": mean_vi(point.gamma_h, samples.gamma_h),
        "posterior_mean_sigma2": float(samples.sigma2.mean()),
        "posterior_mean_alphas": [
            float(samples.alpha0.mean()),
            float(samples.alpha1.mean()),
            float(samples.alpha2.mean()),
        ],
        "acceptance": {str(c): rates for c, rates in samples.acceptance.items()},
    }
    logger.info(
        f"Point estimate: {point.n_clusters_l} low-resolution and "
        f"{point.n_clusters_h} high-resolution clusters"
    )
    return PosteriorSummary(
        point=point,
        unit_cluster_mean=cluster_means(raw, point.gamma_h),
        group_cluster_mean=cluster_means(group_means(raw, data.group_of), point.gamma_l),
        metrics=metrics,
    )


def score_against_truth(
    samples: PosteriorSamples, point: PartitionPair, truth: SynthTruth
) -> Dict[str, float]:
    """VI of the point partitions to the true ones and RMSE of the estimated means."""
    return {
        "vi_l": vi_distance(point.gamma_l, truth.true_pair.gamma_l),
        "vi_h": vi_distance(point.gamma_h, truth.true_pair.gamma_h),
        "rmse_theta": rmse_theta(samples, truth),
        "rmse_phi": rmse_phi(samples, truth),
        "n_clusters_l": point.n_clusters_l,
        "n_clusters_h": point.n_clusters_h,
        "true_clusters_l": truth.true_pair.n_clusters_l,
        "true_clusters_h": truth.true_pair.n_clusters_h,
    }
