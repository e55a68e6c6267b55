"""Replica exchange between chains whose likelihoods are tempered."""

from typing import List

import numpy as np

from nhdp.common.exceptions import SamplerException
from nhdp.model.likelihood import log_likelihood
from nhdp.sampler import logger
from nhdp.sampler.models import ChainState
from nhdp.state.models import TwoLevelDataset

SWAP = "SWAP"


def log_swap_ratio(beta_a: float, beta_b: float, loglik_a: float, loglik_b: float) -> float:
    """log of (beta_a - beta_b)(logL_b - logL_a); priors are not tempered."""
    if beta_a == beta_b or loglik_a == loglik_b:
        return 0.0
    return (beta_a - beta_b) * (loglik_b - loglik_a)


def tempered_swap(
    chains: List[ChainState], data: TwoLevelDataset, rng: np.random.Generator
) -> List[ChainState]:
    """
    Attempt one swap between a uniformly chosen pair of adjacent rungs.

    Rungs keep their temperature; their states, sigma2 and concentrations
    are exchanged. The attempt is recorded on the colder rung of the pair.

    Args:
        chains: Rungs sorted by decreasing temperature
        data: Dataset
        rng: Random generator

    Returns:
        The same list, with the pair possibly swapped

    Raises:
        SamplerException: If fewer than two rungs are given or they are unsorted
    """
    if len(chains) < 2:
        raise SamplerException("tempering needs at least two rungs")
    betas = np.array([c.beta for c in chains])
    if np.any(np.diff(betas) < 0):
        raise SamplerException("rungs must be sorted by decreasing temperature")

    i = int(rng.integers(len(chains) - 1))
    a, b = chains[i], chains[i + 1]
    log_ratio = log_swap_ratio(
        a.beta,
        b.beta,
        log_likelihood(a.state, data, a.hp),
        log_likelihood(b.state, data, b.hp),
    )
    accepted = log_ratio >= 0 or np.log(rng.uniform()) < log_ratio
    if accepted:
        a.state, b.state = b.state, a.state
        a.hp, b.hp = b.hp, a.hp
    b.record(SWAP, accepted)
    logger.debug(f"Swap rungs {i}<->{i + 1}: {'accepted' if accepted else 'rejected'}")
    return chains
