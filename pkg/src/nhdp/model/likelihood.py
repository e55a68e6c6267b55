"""Normal-Normal conjugate marginal likelihood with theta integrated out."""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from nhdp.common.exceptions import ModelException
from nhdp.common.models import Hyperparams
from nhdp.state.models import CrfState, TwoLevelDataset

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class ClusterStats:
    """Sufficient statistics of a cluster: count, sum and sum of squares."""

    n: int = 0
    sum: float = 0.0
    sumsq: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise ModelException(f"cluster size must be non-negative, got {self.n}")
        if self.n == 0 and (self.sum != 0 or self.sumsq != 0):
            raise ModelException("an empty cluster must have zero sums")

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "ClusterStats":
        values = np.asarray(values, dtype=float)
        return cls(
            n=int(values.size),
            sum=float(values.sum()),
            sumsq=float(np.square(values).sum()),
        )

    def __add__(self, other: "ClusterStats") -> "ClusterStats":
        return ClusterStats(
            n=self.n + other.n, sum=self.sum + other.sum, sumsq=self.sumsq + other.sumsq
        )


def _check_scale(sigma2: float, k0: float) -> None:
    if not sigma2 > 0 or not k0 > 0:
        raise ModelException(f"sigma2 and k0 must be positive, got {sigma2}, {k0}")


def log_marginal_arrays(
    n: np.ndarray, s: np.ndarray, ss: np.ndarray, sigma2: float, k0: float
) -> np.ndarray:
    """Elementwise log marginal likelihood of clusters given as stat arrays."""
    n = np.asarray(n, dtype=float)
    s = np.asarray(s, dtype=float)
    ss = np.asarray(ss, dtype=float)
    return (
        -0.5 * n * (LOG_2PI + np.log(sigma2))
        - 0.5 * np.log((n + k0) / k0)
        - (ss - s * s / (n + k0)) / (2.0 * sigma2)
    )


def log_marginal_cluster(stats: ClusterStats, sigma2: float, k0: float) -> float:
    """
    Log of the product of N(y_i; theta, sigma2) integrated against N(theta; 0, sigma2/k0).

    Args:
        stats: Sufficient statistics of the cluster
        sigma2: Within-cluster variance
        k0: Precision ratio of the base measure

    Returns:
        The log marginal likelihood, 0 for an empty cluster

    Raises:
        ModelException: If the statistics are not finite or the scales not positive
    """
    _check_scale(sigma2, k0)
    if not (np.isfinite(stats.sum) and np.isfinite(stats.sumsq)):
        raise ModelException("cluster statistics must be finite")
    if stats.n == 0:
        return 0.0
    return float(log_marginal_arrays(stats.n, stats.sum, stats.sumsq, sigma2, k0))


def label_stats(
    values: np.ndarray, labels: np.ndarray, n_labels: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(n, sum, sumsq) arrays of each label."""
    size = int(labels.max()) + 1 if n_labels is None else n_labels
    n = np.bincount(labels, minlength=size)
    s = np.bincount(labels, weights=values, minlength=size)
    ss = np.bincount(labels, weights=values * values, minlength=size)
    return n, s, ss


def dish_stats(state: CrfState, data: TwoLevelDataset) -> List[ClusterStats]:
    n, s, ss = label_stats(data.values, state.customer_dish)
    return [
        ClusterStats(n=int(a), sum=float(b), sumsq=float(c))
        for a, b, c in zip(n, s, ss)
        if a > 0
    ]


def log_likelihood(state: CrfState, data: TwoLevelDataset, hp: Hyperparams) -> float:
    """Sum of the dish-level marginal likelihoods of the data."""
    n, s, ss = label_stats(data.values, state.customer_dish)
    return float(log_marginal_arrays(n, s, ss, hp.sigma2, hp.k0).sum())


def quadratic_form(stats: Sequence[ClusterStats], k0: float) -> float:
    """Q = sum over clusters of sumsq - sum^2 / (n + k0)."""
    return float(sum(c.sumsq - c.sum * c.sum / (c.n + k0) for c in stats))
