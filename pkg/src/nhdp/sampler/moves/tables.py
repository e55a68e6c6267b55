"""Split-merge kernel on the seating of customers at tables."""

from typing import Optional, Tuple

import numpy as np

from nhdp.common.exceptions import SamplerException
from nhdp.common.models import Hyperparams
from nhdp.common.utils import child_rng
from nhdp.sampler.launch import N_LAUNCH_SCANS, LikelihoodSplitGibbs
from nhdp.sampler.models import ChainState, Proposal, ProposalKind
from nhdp.sampler.moves import (
    SamplerMove,
    SamplerMoveArgs,
    log_target,
    metropolis_accept,
    noop,
)
from nhdp.state.models import CrfState, TwoLevelDataset


def _stats(values: np.ndarray) -> np.ndarray:
    return np.array([values.size, values.sum(), np.square(values).sum()], dtype=float)


def _dish_choice_log_prob(n_dishes: int) -> float:
    # new table's dish is uniform over existing dishes plus a new one
    return -float(np.log(n_dishes + 1))


def _pick_customers(state: CrfState, rng: np.random.Generator) -> Optional[Tuple[int, int]]:
    i1 = int(rng.integers(state.n_customers))
    restaurant = state.customer_restaurant
    others = np.flatnonzero(restaurant == restaurant[i1])
    others = others[others != i1]
    if others.size == 0:
        return None
    return i1, int(others[rng.integers(others.size)])


def _split_gibbs(
    data: TwoLevelDataset,
    hp: Hyperparams,
    beta: float,
    items: np.ndarray,
    base0: np.ndarray,
    base1: np.ndarray,
    use_likelihood: bool,
) -> LikelihoodSplitGibbs:
    y = data.values[items]
    return LikelihoodSplitGibbs(
        item_n=np.ones(items.size),
        item_s=y,
        item_ss=y * y,
        base_n=np.array([base0[0], base1[0]]),
        base_s=np.array([base0[1], base1[1]]),
        base_ss=np.array([base0[2], base1[2]]),
        sigma2=hp.sigma2,
        k0=hp.k0,
        beta=beta,
        use_likelihood=use_likelihood,
    )


def _split_table(
    state: CrfState,
    data: TwoLevelDataset,
    hp: Hyperparams,
    rng: np.random.Generator,
    launch_rng: np.random.Generator,
    i1: int,
    i2: int,
    beta: float,
    n_launch_scans: int,
) -> Proposal:
    y = data.values
    table = state.t[i1]
    d1 = state.k[table]
    dishes = np.unique(state.k)
    choice = int(rng.integers(dishes.size + 1))
    new_dish = choice == dishes.size
    d2 = None if new_dish else dishes[choice]

    members = np.flatnonzero(state.t == table)
    items = members[(members != i1) & (members != i2)]
    dish = state.customer_dish
    outside = state.t != table
    base0 = _stats(y[(dish == d1) & outside]) + _stats(y[[i1]])
    base1 = _stats(y[[i2]])
    if not new_dish:
        base1 = base1 + _stats(y[(dish == d2) & outside])
    gibbs = _split_gibbs(data, hp, beta, items, base0, base1, new_dish or d2 != d1)
    z, log_q = gibbs.propose(launch_rng, n_launch_scans)

    t = state.t.copy()
    t[np.concatenate([[i2], items[z == 1]])] = state.n_tables
    k = np.append(state.k, state.k.max() + 1 if new_dish else d2)
    proposed = CrfState(group_of=state.group_of, r=state.r, t=t, k=k).canonical()
    return Proposal(
        state=proposed,
        kind=ProposalKind.SPLIT,
        log_target_diff=log_target(proposed, data, hp, beta)
        - log_target(state, data, hp, beta),
        log_q_forward=_dish_choice_log_prob(dishes.size) + log_q,
    )


def _merge_tables(
    state: CrfState,
    data: TwoLevelDataset,
    hp: Hyperparams,
    launch_rng: np.random.Generator,
    i1: int,
    i2: int,
    beta: float,
    n_launch_scans: int,
) -> Proposal:
    y = data.values
    t1, t2 = state.t[i1], state.t[i2]
    e1, e2 = state.k[t1], state.k[t2]
    t = state.t.copy()
    t[state.t == t2] = t1
    proposed = CrfState(group_of=state.group_of, r=state.r, t=t, k=state.k).canonical()

    # reverse split: i2's table would get a new dish if it was e2's only table
    e2_is_new = int((state.k == e2).sum()) == 1
    members = np.flatnonzero((state.t == t1) | (state.t == t2))
    items = members[(members != i1) & (members != i2)]
    observed = (state.t[items] == t2).astype(np.int64)
    dish = state.customer_dish
    outside = (state.t != t1) & (state.t != t2)
    base0 = _stats(y[(dish == e1) & outside]) + _stats(y[[i1]])
    base1 = _stats(y[[i2]])
    if not e2_is_new:
        base1 = base1 + _stats(y[(dish == e2) & outside])
    gibbs = _split_gibbs(data, hp, beta, items, base0, base1, e2_is_new or e2 != e1)
    log_q = gibbs.score(observed, launch_rng, n_launch_scans)

    return Proposal(
        state=proposed,
        kind=ProposalKind.MERGE,
        log_target_diff=log_target(proposed, data, hp, beta)
        - log_target(state, data, hp, beta),
        log_q_reverse=_dish_choice_log_prob(proposed.n_dishes) + log_q,
    )


def propose_tables(
    state: CrfState,
    data: TwoLevelDataset,
    hp: Hyperparams,
    rng: np.random.Generator,
    beta: float = 1.0,
    pair: Optional[Tuple[int, int]] = None,
    n_launch_scans: int = N_LAUNCH_SCANS,
) -> Proposal:
    """
    Propose splitting or merging tables around two customers of one restaurant.

    Customers sharing a table split it, the first keeping the table's dish
    and the second taking a dish drawn uniformly among the existing dishes
    and a new one. Customers at different tables merge them under the
    first customer's dish.

    Args:
        state: Current state
        data: Dataset
        hp: Hyperparameters
        rng: Random generator; its first draw seeds the launch
        beta: Likelihood weight
        pair: Force the two anchor customers instead of drawing them
        n_launch_scans: Intermediate restricted Gibbs scans of the launch

    Returns:
        The proposal, NOOP when the drawn restaurant has a single customer
    """
    launch_rng = child_rng(rng)
    if pair is None:
        pair = _pick_customers(state, rng)
        if pair is None:
            return noop(state)
    i1, i2 = pair
    restaurant = state.customer_restaurant
    if i1 == i2 or restaurant[i1] != restaurant[i2]:
        raise SamplerException(f"customers {i1} and {i2} are not two customers of one restaurant")
    if state.t[i1] == state.t[i2]:
        return _split_table(state, data, hp, rng, launch_rng, i1, i2, beta, n_launch_scans)
    return _merge_tables(state, data, hp, launch_rng, i1, i2, beta, n_launch_scans)


def sm_tables_move(
    state: CrfState,
    data: TwoLevelDataset,
    hp: Hyperparams,
    rng: np.random.Generator,
    beta: float = 1.0,
    n_launch_scans: int = N_LAUNCH_SCANS,
) -> Tuple[CrfState, bool]:
    proposal = propose_tables(state, data, hp, rng, beta, n_launch_scans=n_launch_scans)
    return metropolis_accept(proposal, state, rng)


class TablesMove(SamplerMove):
    """Split-merge updates of the table partition, Σn/2 per sweep by default."""

    def __init__(self, move_args: SamplerMoveArgs):
        self.data = move_args.data
        self.config = move_args.config

    def n_per_sweep(self) -> int:
        return self.config.moves_per_sweep.get(
            "TABLES", max(1, self.data.n_customers // 2)
        )

    def execute(self, chain: ChainState, rng: np.random.Generator) -> bool:
        chain.state, accepted = sm_tables_move(
            chain.state, self.data, chain.hp, rng, chain.beta, self.config.n_launch_scans
        )
        return accepted
