"""Ewens-Pitman partition probabilities of the restaurant franchise."""

from typing import Sequence

import numpy as np
from scipy.special import gammaln

from nhdp.common.exceptions import ModelException
from nhdp.common.models import Concentration, Hyperparams
from nhdp.state.models import CrfState
from nhdp.state.operations import check_state


def log_crp_partition(cluster_sizes: Sequence[int] | np.ndarray, alpha: float) -> float:
    """
    Log probability of a partition with the given block sizes under CRP(alpha).

    Args:
        cluster_sizes: Positive block sizes
        alpha: Concentration parameter

    Returns:
        K log(alpha) + sum log Gamma(n_k) + log Gamma(alpha) - log Gamma(alpha + n);
        0 for the empty partition

    Raises:
        ModelException: If a size is below 1 or alpha is not positive
    """
    sizes = np.asarray(cluster_sizes, dtype=float)
    if sizes.size == 0:
        return 0.0
    if not alpha > 0:
        raise ModelException(f"concentration must be positive, got {alpha}")
    if sizes.min() < 1:
        raise ModelException("cluster sizes must be at least 1")
    n = sizes.sum()
    return float(
        sizes.size * np.log(alpha)
        + gammaln(sizes).sum()
        + gammaln(alpha)
        - gammaln(alpha + n)
    )


def log_restaurant_prior(state: CrfState, alpha2: float) -> float:
    return log_crp_partition(np.bincount(state.r), alpha2)


def log_table_prior(state: CrfState, alpha1: float) -> float:
    """Sum over restaurants of the CRP(alpha1) probability of their seating."""
    if not alpha1 > 0:
        raise ModelException(f"concentration must be positive, got {alpha1}")
    sizes = state.table_sizes
    customers = np.bincount(state.customer_restaurant)
    customers = customers[customers > 0]
    return float(
        sizes.size * np.log(alpha1)
        + gammaln(sizes).sum()
        - (gammaln(alpha1 + customers) - gammaln(alpha1)).sum()
    )


def log_dish_prior(state: CrfState, alpha0: float) -> float:
    return log_crp_partition(np.bincount(state.k), alpha0)


def log_concentration_term(which: Concentration, state: CrfState, alpha: float) -> float:
    """The factor of the joint prior that depends on one concentration."""
    which = Concentration(which)
    if which is Concentration.ALPHA0:
        return log_dish_prior(state, alpha)
    if which is Concentration.ALPHA1:
        return log_table_prior(state, alpha)
    return log_restaurant_prior(state, alpha)


def log_joint_prior(state: CrfState, hp: Hyperparams, check: bool = True) -> float:
    """
    log p(r; alpha2) + sum_s log p(t_s; alpha1) + log p(k | t; alpha0).

    Raises:
        StateException: If check is set and the state is invalid
    """
    if check:
        check_state(state)
    return (
        log_restaurant_prior(state, hp.alpha2)
        + log_table_prior(state, hp.alpha1)
        + log_dish_prior(state, hp.alpha0)
    )
