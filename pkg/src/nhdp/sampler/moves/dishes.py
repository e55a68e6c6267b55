"""Split-merge kernel on the assignment of tables to dishes."""

from typing import Optional, Tuple

import numpy as np

from nhdp.common.models import Hyperparams
from nhdp.common.utils import child_rng
from nhdp.model.likelihood import label_stats
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

DEFAULT_DISH_MOVES = 10


def _table_gibbs(
    state: CrfState,
    data: TwoLevelDataset,
    hp: Hyperparams,
    beta: float,
    tau1: int,
    tau2: int,
    items: np.ndarray,
) -> LikelihoodSplitGibbs:
    n, s, ss = label_stats(data.values, state.t, state.n_tables)
    anchors = np.array([tau1, tau2])
    return LikelihoodSplitGibbs(
        item_n=n[items],
        item_s=s[items],
        item_ss=ss[items],
        base_n=n[anchors],
        base_s=s[anchors],
        base_ss=ss[anchors],
        sigma2=hp.sigma2,
        k0=hp.k0,
        beta=beta,
    )


def propose_dishes(
    state: CrfState,
    data: TwoLevelDataset,
    hp: Hyperparams,
    rng: np.random.Generator,
    beta: float = 1.0,
    pair: Optional[Tuple[int, int]] = None,
    n_launch_scans: int = N_LAUNCH_SCANS,
) -> Proposal:
    """
    Propose splitting or merging dishes around two tables.

    Tables serving the same dish split it: the first keeps the dish, the
    second opens a new one and the remaining tables of the dish are
    allocated by restricted Gibbs. Tables with different dishes move every
    table of the second dish onto the first.
    """
    launch_rng = child_rng(rng)
    m = state.n_tables
    if pair is None:
        if m < 2:
            return noop(state)
        tau1 = int(rng.integers(m))
        tau2 = int(rng.integers(m - 1))
        if tau2 >= tau1:
            tau2 += 1
    else:
        tau1, tau2 = pair
    d1, d2 = state.k[tau1], state.k[tau2]
    k = state.k.copy()

    if d1 == d2:
        tables = np.flatnonzero(state.k == d1)
        items = tables[(tables != tau1) & (tables != tau2)]
        gibbs = _table_gibbs(state, data, hp, beta, tau1, tau2, items)
        z, log_q = gibbs.propose(launch_rng, n_launch_scans)
        new_dish = state.k.max() + 1
        k[tau2] = new_dish
        k[items[z == 1]] = new_dish
        kind = ProposalKind.SPLIT
        log_q_forward, log_q_reverse = log_q, 0.0
    else:
        tables = np.flatnonzero((state.k == d1) | (state.k == d2))
        items = tables[(tables != tau1) & (tables != tau2)]
        observed = (state.k[items] == d2).astype(np.int64)
        gibbs = _table_gibbs(state, data, hp, beta, tau1, tau2, items)
        log_q = gibbs.score(observed, launch_rng, n_launch_scans)
        k[state.k == d2] = d1
        kind = ProposalKind.MERGE
        log_q_forward, log_q_reverse = 0.0, log_q

    proposed = CrfState(group_of=state.group_of, r=state.r, t=state.t, k=k).canonical()
    return Proposal(
        state=proposed,
        kind=kind,
        log_target_diff=log_target(proposed, data, hp, beta)
        - log_target(state, data, hp, beta),
        log_q_forward=log_q_forward,
        log_q_reverse=log_q_reverse,
    )


def sm_dishes_move(
    state: CrfState,
    data: TwoLevelDataset,
    hp: Hyperparams,
    rng: np.random.Generator,
    beta: float = 1.0,
    n_launch_scans: int = N_LAUNCH_SCANS,
) -> Tuple[CrfState, bool]:
    proposal = propose_dishes(state, data, hp, rng, beta, n_launch_scans=n_launch_scans)
    return metropolis_accept(proposal, state, rng)


class DishesMove(SamplerMove):
    def __init__(self, move_args: SamplerMoveArgs):
        self.data = move_args.data
        self.config = move_args.config

    def n_per_sweep(self) -> int:
        return self.config.moves_per_sweep.get("DISHES", DEFAULT_DISH_MOVES)

    def execute(self, chain: ChainState, rng: np.random.Generator) -> bool:
        chain.state, accepted = sm_dishes_move(
            chain.state, self.data, chain.hp, rng, chain.beta, self.config.n_launch_scans
        )
        return accepted
