"""Exhaustive enumeration of franchise states for tiny datasets."""

from collections import defaultdict
from itertools import product
from typing import Dict, Iterator, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from nhdp.common.exceptions import EnumerationLimitException
from nhdp.common.models import Hyperparams
from nhdp.common.utils import canonical_labels, iter_set_partitions
from nhdp.model.likelihood import log_likelihood
from nhdp.model.priors import log_joint_prior
from nhdp.state.models import CrfState, TwoLevelDataset
from nhdp.state.operations import induced_partitions

MAX_ENUMERATION_CUSTOMERS = 8

PartitionKey = Tuple[Tuple[int, ...], Tuple[int, ...]]


def enumerate_states(
    data: TwoLevelDataset, max_customers: int = MAX_ENUMERATION_CUSTOMERS
) -> Iterator[CrfState]:
    """
    Yield every valid (r, t, k) configuration once, canonicalized.

    Restaurants are set partitions of the groups, tables are set partitions
    of each restaurant's customers and dishes are set partitions of all
    tables.

    Raises:
        EnumerationLimitException: If the dataset has more than max_customers units
    """
    if data.n_customers > max_customers:
        raise EnumerationLimitException(
            f"enumeration is limited to {max_customers} customers, "
            f"dataset has {data.n_customers}"
        )
    group_of = data.group_of
    for r_labels in iter_set_partitions(data.n_groups):
        r = np.asarray(r_labels, dtype=np.int64)
        customer_restaurant = r[group_of]
        members = [
            np.flatnonzero(customer_restaurant == s) for s in range(int(r.max()) + 1)
        ]
        seatings = [list(iter_set_partitions(m.size)) for m in members]
        for seating in product(*seatings):
            t = np.empty(data.n_customers, dtype=np.int64)
            offset = 0
            for customers, tables in zip(members, seating):
                t[customers] = offset + np.asarray(tables, dtype=np.int64)
                offset += max(tables) + 1
            for k_labels in iter_set_partitions(offset):
                yield CrfState(
                    group_of=group_of, r=r, t=t, k=np.asarray(k_labels, dtype=np.int64)
                ).canonical()


def enumerate_log_weights(
    data: TwoLevelDataset, hp: Hyperparams, beta: float = 1.0
) -> Iterator[Tuple[CrfState, float]]:
    """Yield each state with its unnormalized log posterior, likelihood weighted by beta."""
    for state in enumerate_states(data):
        log_w = log_joint_prior(state, hp)
        if beta:
            log_w += beta * log_likelihood(state, data, hp)
        yield state, log_w


def enumerate_posterior(
    data: TwoLevelDataset,
    hp: Hyperparams,
    beta: float = 1.0,
    frozen_r: Optional[np.ndarray] = None,
) -> Dict[PartitionKey, float]:
    """
    Exact distribution over induced (gamma_l, gamma_h) partitions.

    Args:
        data: Tiny dataset
        hp: Hyperparameters, sigma2 and alphas held fixed
        beta: Likelihood weight, 0 for the prior
        frozen_r: Condition on this restaurant partition when given

    Returns:
        Probability of every reachable partition pair
    """
    frozen = None if frozen_r is None else canonical_labels(frozen_r)
    keys = []
    log_ws = []
    for state, log_w in enumerate_log_weights(data, hp, beta):
        if frozen is not None and not np.array_equal(state.r, frozen):
            continue
        keys.append(induced_partitions(state).key())
        log_ws.append(log_w)
    log_ws = np.asarray(log_ws)
    probs = np.exp(log_ws - logsumexp(log_ws))
    out: Dict[PartitionKey, float] = defaultdict(float)
    for key, p in zip(keys, probs):
        out[key] += float(p)
    return dict(out)
