"""Split-merge kernel on the clustering of groups into restaurants."""

from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import gammaln

from nhdp.common.models import Hyperparams
from nhdp.common.utils import child_rng
from nhdp.model.priors import log_crp_partition, log_joint_prior
from nhdp.sampler.launch import N_LAUNCH_SCANS, RestrictedGibbs
from nhdp.sampler.models import ChainState, Proposal, ProposalKind
from nhdp.sampler.moves import SamplerMove, SamplerMoveArgs, metropolis_accept, noop
from nhdp.state.models import CrfState, TwoLevelDataset
from nhdp.state.operations import apply_restaurant_merge, derive_restaurant_split

TABLE_MERGE_PROB = 0.5


class RestaurantSplitGibbs(RestrictedGibbs):
    """
    Restricted Gibbs allocation of a restaurant's groups to two sides.

    The weight of a configuration is the part of the joint prior that
    depends on it: Gamma of the group counts of the two restaurants, the
    CRP seating of each side and the change in the dish prior caused by the
    tables that end up cut in two.
    """

    def __init__(
        self,
        state: CrfState,
        s: int,
        j1: int,
        j2: int,
        items: np.ndarray,
        hp: Hyperparams,
    ):
        self.n_items = int(items.size)
        self.alpha0 = hp.alpha0
        self.alpha1 = hp.alpha1
        tables = np.flatnonzero(state.table_restaurant == s)
        position = np.full(state.n_tables, -1, dtype=np.int64)
        position[tables] = np.arange(tables.size)
        groups = np.concatenate([[j1, j2], items])
        column = np.full(state.n_groups, -1, dtype=np.int64)
        column[groups] = np.arange(groups.size)
        customers = np.flatnonzero(column[state.group_of] >= 0)
        # customers of each group (column) at each table (row) of s
        self.counts = np.zeros((tables.size, groups.size))
        np.add.at(
            self.counts,
            (position[state.t[customers]], column[state.group_of[customers]]),
            1.0,
        )
        self.table_dish = state.k[tables]
        self.dish_tables = np.bincount(state.k).astype(float)
        self.n_tables = state.n_tables

    def reset(self, z: np.ndarray) -> None:
        self.a = self.counts[:, 0] + self.counts[:, 2:][:, z == 0].sum(axis=1)
        self.b = self.counts[:, 1] + self.counts[:, 2:][:, z == 1].sum(axis=1)
        self.n0 = 1 + int((z == 0).sum())
        self.n1 = 1 + int((z == 1).sum())

    def remove(self, i: int, side: int) -> None:
        if side == 0:
            self.a = self.a - self.counts[:, 2 + i]
            self.n0 -= 1
        else:
            self.b = self.b - self.counts[:, 2 + i]
            self.n1 -= 1

    def add(self, i: int, side: int) -> None:
        if side == 0:
            self.a = self.a + self.counts[:, 2 + i]
            self.n0 += 1
        else:
            self.b = self.b + self.counts[:, 2 + i]
            self.n1 += 1

    def _log_weight(self, a: np.ndarray, b: np.ndarray, n0: int, n1: int) -> float:
        cut = (a > 0) & (b > 0)
        extra = np.bincount(self.table_dish[cut], minlength=self.dish_tables.size)
        hit = extra > 0
        m = float(extra.sum())
        return float(
            gammaln(n0)
            + gammaln(n1)
            + log_crp_partition(a[a > 0], self.alpha1)
            + log_crp_partition(b[b > 0], self.alpha1)
            + (
                gammaln(self.dish_tables[hit] + extra[hit])
                - gammaln(self.dish_tables[hit])
            ).sum()
            - gammaln(self.alpha0 + self.n_tables + m)
        )

    def log_weights(self, i: int) -> np.ndarray:
        column = self.counts[:, 2 + i]
        return np.array(
            [
                self._log_weight(self.a + column, self.b, self.n0 + 1, self.n1),
                self._log_weight(self.a, self.b + column, self.n0, self.n1 + 1),
            ]
        )


def log_merge_prob(
    state: CrfState, s1: int, s2: int, fused: np.ndarray, p: float = TABLE_MERGE_PROB
) -> float:
    """
    Log probability that merging s2 into s1 fuses the given number of pairs per dish.

    For a dish with tables in both restaurants, the smaller set of tables is
    matched injectively and uniformly into the larger set and every matched
    pair is fused with probability p. Summing over the matchings that fuse
    the same pairs gives (n - m)!/n! p^m (1 - p)^(k - m) per dish, with n the
    larger and k the smaller table count and m the fused pairs.
    """
    table_restaurant = state.table_restaurant
    n_dishes = int(state.k.max()) + 1
    c1 = np.bincount(state.k[table_restaurant == s1], minlength=n_dishes)
    c2 = np.bincount(state.k[table_restaurant == s2], minlength=n_dishes)
    shared = (c1 > 0) & (c2 > 0)
    small = np.minimum(c1, c2)[shared].astype(float)
    large = np.maximum(c1, c2)[shared].astype(float)
    m = np.asarray(fused, dtype=float)[shared]
    return float(
        (
            gammaln(large - m + 1)
            - gammaln(large + 1)
            + m * np.log(p)
            + (small - m) * np.log1p(-p)
        ).sum()
    )


def draw_table_matching(
    state: CrfState, s1: int, s2: int, rng: np.random.Generator, p: float = TABLE_MERGE_PROB
) -> Tuple[List[Tuple[int, int]], List[bool]]:
    """Random injective matching of same-dish tables of s1 and s2 with fuse flags."""
    table_restaurant = state.table_restaurant
    matching: List[Tuple[int, int]] = []
    flags: List[bool] = []
    for d in np.unique(state.k):
        tables1 = np.flatnonzero((state.k == d) & (table_restaurant == s1))
        tables2 = np.flatnonzero((state.k == d) & (table_restaurant == s2))
        if tables1.size == 0 or tables2.size == 0:
            continue
        if tables1.size <= tables2.size:
            image = rng.permutation(tables2)[: tables1.size]
            pairs = list(zip(tables1.tolist(), image.tolist()))
        else:
            image = rng.permutation(tables1)[: tables2.size]
            pairs = list(zip(image.tolist(), tables2.tolist()))
        matching.extend(pairs)
        flags.extend(bool(f) for f in rng.uniform(size=len(pairs)) < p)
    return matching, flags


def _fused_per_dish(state: CrfState, tables: List[int]) -> np.ndarray:
    return np.bincount(
        state.k[np.asarray(tables, dtype=np.int64)], minlength=int(state.k.max()) + 1
    )


def _restaurant_items(state: CrfState, j1: int, j2: int) -> np.ndarray:
    groups = np.flatnonzero(state.r == state.r[j1])
    return groups[(groups != j1) & (groups != j2)]


def propose_restaurants(
    state: CrfState,
    data: TwoLevelDataset,
    hp: Hyperparams,
    rng: np.random.Generator,
    pair: Optional[Tuple[int, int]] = None,
    n_launch_scans: int = N_LAUNCH_SCANS,
    table_merge_prob: float = TABLE_MERGE_PROB,
) -> Proposal:
    """
    Propose splitting or merging restaurants around two groups.

    Groups in one restaurant split it: the other groups are allocated by
    restricted Gibbs and tables straddling the two sides are cut into two
    sub-tables with the same dish. Groups in different restaurants merge
    them, fusing a random matching of same-dish tables. The customer to
    dish map never changes, so only the prior enters the target ratio.
    """
    launch_rng = child_rng(rng)
    if pair is None:
        if state.n_groups < 2:
            return noop(state)
        j1 = int(rng.integers(state.n_groups))
        j2 = int(rng.integers(state.n_groups - 1))
        if j2 >= j1:
            j2 += 1
    else:
        j1, j2 = pair
    s1, s2 = int(state.r[j1]), int(state.r[j2])

    if s1 == s2:
        items = _restaurant_items(state, j1, j2)
        gibbs = RestaurantSplitGibbs(state, s1, j1, j2, items, hp)
        z, log_q = gibbs.propose(launch_rng, n_launch_scans)
        assignment: Dict[int, int] = {j1: 0, j2: 1}
        assignment.update({int(g): int(side) for g, side in zip(items, z)})
        split, cut = derive_restaurant_split(state, s1, assignment)
        fused = _fused_per_dish(split, [new for _, new in cut])
        log_q_reverse = log_merge_prob(
            split, s1, int(split.r[j2]), fused, table_merge_prob
        )
        proposed = split.canonical()
        kind = ProposalKind.SPLIT
        log_q_forward = log_q
    else:
        matching, flags = draw_table_matching(state, s1, s2, rng, table_merge_prob)
        fused = _fused_per_dish(state, [a for (a, _), f in zip(matching, flags) if f])
        log_q_forward = log_merge_prob(state, s1, s2, fused, table_merge_prob)
        proposed = apply_restaurant_merge(state, s1, s2, matching, flags)
        items = _restaurant_items(proposed, j1, j2)
        observed = (state.r[items] == s2).astype(np.int64)
        gibbs = RestaurantSplitGibbs(proposed, int(proposed.r[j1]), j1, j2, items, hp)
        log_q_reverse = gibbs.score(observed, launch_rng, n_launch_scans)
        kind = ProposalKind.MERGE

    return Proposal(
        state=proposed,
        kind=kind,
        log_target_diff=log_joint_prior(proposed, hp, check=False)
        - log_joint_prior(state, hp, check=False),
        log_q_forward=log_q_forward,
        log_q_reverse=log_q_reverse,
    )


def sm_restaurants_move(
    state: CrfState,
    data: TwoLevelDataset,
    hp: Hyperparams,
    rng: np.random.Generator,
    beta: float = 1.0,
    n_launch_scans: int = N_LAUNCH_SCANS,
    table_merge_prob: float = TABLE_MERGE_PROB,
) -> Tuple[CrfState, bool]:
    """
    One split-merge update of (r, t, k). beta is accepted for a uniform
    kernel signature; the likelihood ratio of this kernel is always 1.
    """
    proposal = propose_restaurants(
        state,
        data,
        hp,
        rng,
        n_launch_scans=n_launch_scans,
        table_merge_prob=table_merge_prob,
    )
    return metropolis_accept(proposal, state, rng)


class RestaurantsMove(SamplerMove):
    def __init__(self, move_args: SamplerMoveArgs):
        self.data = move_args.data
        self.config = move_args.config

    def n_per_sweep(self) -> int:
        if self.config.freeze_restaurants:
            return 0
        return self.config.moves_per_sweep.get("RESTAURANTS", self.data.n_groups)

    def execute(self, chain: ChainState, rng: np.random.Generator) -> bool:
        chain.state, accepted = sm_restaurants_move(
            chain.state,
            self.data,
            chain.hp,
            rng,
            chain.beta,
            self.config.n_launch_scans,
            self.config.table_merge_prob,
        )
        return accepted
