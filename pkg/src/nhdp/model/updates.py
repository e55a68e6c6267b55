"""Gibbs and Metropolis-Hastings updates of sigma2 and the concentrations."""

from typing import Sequence

import numpy as np
from scipy.stats import invgamma

from nhdp.common.exceptions import ModelException
from nhdp.common.models import Concentration, Hyperparams
from nhdp.model import logger
from nhdp.model.likelihood import ClusterStats, quadratic_form
from nhdp.model.priors import log_concentration_term
from nhdp.state.models import CrfState

ALPHA_STEP = 0.2


def sigma2_posterior(
    dish_stats: Sequence[ClusterStats], hp: Hyperparams, beta: float = 1.0
) -> tuple[float, float]:
    """Shape and scale of the Inv-Gamma full conditional, likelihood weighted by beta."""
    if hp.sigma2_prior is None:
        raise ModelException("sigma2 has no prior, it cannot be updated")
    n = sum(c.n for c in dish_stats)
    q = quadratic_form(dish_stats, hp.k0)
    if not np.isfinite(q):
        raise ModelException("dish statistics must be finite")
    return (
        hp.sigma2_prior.beta0 + beta * n / 2.0,
        hp.sigma2_prior.beta1 + beta * q / 2.0,
    )


def gibbs_sigma2_draw(
    dish_stats: Sequence[ClusterStats],
    hp: Hyperparams,
    rng: np.random.Generator,
    beta: float = 1.0,
) -> float:
    """
    Draw sigma2 from Inv-Gamma(beta0 + n/2, beta1 + Q/2).

    Args:
        dish_stats: Statistics of the dishes, partitioning all observations
        hp: Current hyperparameters, sigma2_prior required
        rng: Random generator
        beta: Likelihood weight of a tempered chain

    Returns:
        The new sigma2
    """
    shape, scale = sigma2_posterior(dish_stats, hp, beta)
    return float(invgamma.rvs(a=shape, scale=scale, random_state=rng))


def log_alpha_target(
    which: Concentration, state: CrfState, hp: Hyperparams, alpha: float
) -> float:
    prior = hp.prior_for(which)
    return prior.logpdf(alpha) + log_concentration_term(which, state, alpha)


def mh_alpha_update(
    which: Concentration,
    state: CrfState,
    hp: Hyperparams,
    rng: np.random.Generator,
    step: float = ALPHA_STEP,
) -> Hyperparams:
    """
    One log-scale random-walk Metropolis-Hastings step on a concentration.

    The target is its truncated-normal prior times the CRP factor of the
    joint prior that depends on it. The log(proposal/current) term is the
    Jacobian of the log-scale walk.

    Raises:
        ModelException: If the concentration has no prior
    """
    which = Concentration(which)
    if hp.prior_for(which) is None:
        raise ModelException(f"{which.value} has no prior, it cannot be updated")
    current = hp.alpha(which)
    proposal = current * float(np.exp(step * rng.standard_normal()))
    log_ratio = (
        log_alpha_target(which, state, hp, proposal)
        - log_alpha_target(which, state, hp, current)
        + np.log(proposal)
        - np.log(current)
    )
    if np.log(rng.uniform()) < log_ratio:
        return hp.with_alpha(which, proposal)
    logger.debug(f"{which.value} proposal {proposal:.4f} rejected")
    return hp
