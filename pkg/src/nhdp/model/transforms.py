"""Scale transforms between raw densities and model values."""

from typing import Sequence, Tuple

import numpy as np

from nhdp.common.exceptions import StandardizationException


def standardize(values: Sequence[float]) -> Tuple[np.ndarray, float, float]:
    """
    Centre values at zero with unit sample standard deviation.

    Returns:
        The z-scores, the mean and the standard deviation

    Raises:
        StandardizationException: If fewer than two values or all values are equal
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise StandardizationException("at least two values are needed to standardize")
    mean = float(values.mean())
    sd = float(values.std(ddof=1))
    if not sd > 0:
        raise StandardizationException("values are constant, standard deviation is 0")
    return (values - mean) / sd, mean, sd


def destandardize(z: Sequence[float] | np.ndarray, mean: float, sd: float) -> np.ndarray:
    return np.asarray(z, dtype=float) * sd + mean


def group_means(values: np.ndarray, group_of: np.ndarray) -> np.ndarray:
    """Low-resolution data: the average of each group's high-resolution values."""
    sizes = np.bincount(group_of)
    return np.bincount(group_of, weights=values, minlength=sizes.size) / sizes
