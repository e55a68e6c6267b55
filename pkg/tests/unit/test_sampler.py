"""Tests for the split-merge kernels, the chain driver and tempering."""

from math import comb, perm
from unittest.mock import MagicMock, patch

import numpy as np
import pytest
from pydantic import ValidationError

from nhdp.common.exceptions import SamplerException, StateException
from nhdp.common.models import Hyperparams, InvGammaPrior, TruncatedNormalPrior
from nhdp.common.utils import canonical_labels
from nhdp.sampler.chain import build_sweep, describe_sweep, run_chain, run_chains
from nhdp.sampler.launch import LikelihoodSplitGibbs
from nhdp.sampler.models import (
    ChainConfig,
    ChainState,
    PosteriorSamples,
    Proposal,
    ProposalKind,
    TemperingConfig,
)
from nhdp.sampler.moves import SamplerMoveArgs, log_target, metropolis_accept
from nhdp.sampler.moves.dishes import DishesMove, propose_dishes
from nhdp.sampler.moves.move_factory import MoveFactory, MoveType
from nhdp.sampler.moves.parameters import AlphasMove, Sigma2Move
from nhdp.sampler.moves.restaurants import (
    RestaurantsMove,
    draw_table_matching,
    log_merge_prob,
    propose_restaurants,
)
from nhdp.sampler.moves.tables import TablesMove, propose_tables
from nhdp.sampler.tempering import SWAP, log_swap_ratio, tempered_swap
from nhdp.state.enumerate import enumerate_states
from nhdp.state.models import CrfState, TwoLevelDataset
from nhdp.state.operations import apply_restaurant_merge, apply_restaurant_split, validate


N_PROPERTY_STATES = 10_000

# at most six customers each; the first two are small enough to enumerate
PROPERTY_DATASETS = (
    TwoLevelDataset.from_arrays([0.1, 0.2, -0.3, 0.9], [0, 0, 1, 2]),
    TwoLevelDataset.from_arrays([0.1, -0.2, 0.3, 1.1, 0.8], [0, 1, 1, 2, 3]),
    TwoLevelDataset.from_arrays([0.0, 0.5, -0.5, 1.0, -1.0, 0.2], [0, 0, 1, 1, 2, 2]),
    TwoLevelDataset.from_arrays([-1.0, -0.6, -0.2, 0.2, 0.6, 1.0], [0, 1, 2, 3, 4, 5]),
)


def assert_reverse_pair(forward: Proposal, backward: Proposal, start: CrfState):
    """The backward proposal undoes the forward one with mirrored ratio terms."""
    assert backward.state.key() == start.canonical().key()
    assert backward.log_target_diff == pytest.approx(-forward.log_target_diff, abs=1e-10)
    assert backward.log_q_reverse == pytest.approx(forward.log_q_forward, abs=1e-10)
    assert backward.log_q_forward == pytest.approx(forward.log_q_reverse, abs=1e-10)


def move_start_states(rng, random_state, n_states):
    """Every enumerated state of the two smallest datasets, then random states of all four."""
    count = 0
    for data in PROPERTY_DATASETS[:2]:
        for state in enumerate_states(data):
            if count == n_states:
                return
            yield data, state
            count += 1
    while count < n_states:
        data = PROPERTY_DATASETS[rng.integers(len(PROPERTY_DATASETS))]
        yield data, random_state(data, rng)
        count += 1


def random_restaurant_derivation(state: CrfState, rng: np.random.Generator) -> CrfState:
    """Split a random restaurant at a random cut, or merge two with a random matching."""
    restaurants = np.unique(state.r)
    splittable = [int(s) for s in restaurants if (state.r == s).sum() >= 2]
    if restaurants.size >= 2 and (not splittable or rng.uniform() < 0.5):
        s1, s2 = (int(s) for s in rng.choice(restaurants, size=2, replace=False))
        matching, flags = draw_table_matching(state, s1, s2, rng, p=rng.uniform(0.01, 0.99))
        return apply_restaurant_merge(state, s1, s2, matching, flags)
    s = int(rng.choice(splittable))
    groups = np.flatnonzero(state.r == s)
    sides = rng.integers(0, 2, size=groups.size)
    sides[:2] = (0, 1)
    sides = rng.permutation(sides)
    return apply_restaurant_split(state, s, dict(zip(groups.tolist(), sides.tolist())))


class TestLaunch:
    """Tests for the restricted Gibbs launch."""

    @pytest.fixture
    def gibbs(self):
        """Four unit items split between two anchored clusters."""
        y = np.array([-1.0, -0.8, 0.9, 1.1])
        return LikelihoodSplitGibbs(
            item_n=np.ones(4), item_s=y, item_ss=y * y,
            base_n=np.ones(2), base_s=np.array([-1.0, 1.0]), base_ss=np.ones(2),
            sigma2=0.1, k0=1.0,
        )

    def test_scan_probabilities_sum_to_one(self, gibbs):
        """Test that forced scans over every target sum to probability 1."""
        start = np.array([0, 1, 0, 1])
        total = 0.0
        for code in range(16):
            target = np.array([(code >> i) & 1 for i in range(4)])
            total += np.exp(gibbs.scan(start.copy(), target=target))
        assert total == pytest.approx(1.0, abs=1e-10)

    def test_score_matches_propose(self, gibbs):
        """Test that scoring a proposal with the same stream returns its probability."""
        z, log_q = gibbs.propose(np.random.default_rng(3))
        assert gibbs.score(z, np.random.default_rng(3)) == pytest.approx(log_q)

    def test_separates_clear_clusters(self, gibbs):
        """Test that the launch follows the likelihood."""
        z, _ = gibbs.propose(np.random.default_rng(0), n_scans=10)
        assert z.tolist() == [0, 0, 1, 1]


class TestRestaurantsKernel:
    """Tests for the restaurant split-merge kernel."""

    def test_split_merge_replay(self, tiny_dataset, fixed_hp):
        """Test that the merge of a split mirrors its acceptance terms."""
        start = CrfState(group_of=tiny_dataset.group_of, r=[0, 0, 0], t=[0, 1, 2, 3, 4],
                         k=[0, 1, 2, 3, 4])
        split = propose_restaurants(
            start, tiny_dataset, fixed_hp, np.random.default_rng(9), pair=(0, 1)
        )
        assert split.kind is ProposalKind.SPLIT
        merge = propose_restaurants(
            split.state, tiny_dataset, fixed_hp, np.random.default_rng(9), pair=(0, 1)
        )
        assert merge.kind is ProposalKind.MERGE
        assert_reverse_pair(split, merge, start)

    def test_restaurant_moves_keep_customer_dishes(self, fixed_hp, random_state_factory):
        """Test that restaurant splits and merges never change the high-resolution partition."""
        rng = np.random.default_rng(31)
        n_checked = 0
        for data, state in move_start_states(rng, random_state_factory, N_PROPERTY_STATES):
            dishes = canonical_labels(state.customer_dish).tolist()
            moved = random_restaurant_derivation(state, rng)
            assert validate(moved, data) == []
            assert canonical_labels(moved.customer_dish).tolist() == dishes
            if n_checked % 10 == 0:
                proposal = propose_restaurants(state, data, fixed_hp, rng)
                assert validate(proposal.state, data) == []
                assert canonical_labels(proposal.state.customer_dish).tolist() == dishes
            n_checked += 1
        assert n_checked == N_PROPERTY_STATES

    def test_merge_prob_sums_to_one(self):
        """Test that the fusion counts of a dish form a distribution."""
        # s1 has 2 tables of dish 0, s2 has 3
        state = CrfState(
            group_of=[0, 0, 1, 1, 1], r=[0, 1], t=[0, 1, 2, 3, 4], k=[0, 0, 0, 0, 0]
        )
        total = 0.0
        for m in range(3):
            # distinct fused pair sets: m tables of s1 and their images in s2
            ways = comb(2, m) * perm(3, m)
            total += ways * np.exp(log_merge_prob(state, 0, 1, np.array([m]), p=0.3))
        assert total == pytest.approx(1.0)

    def test_draw_table_matching(self, rng):
        """Test that matched tables share a dish and straddle the pair."""
        state = CrfState(
            group_of=[0, 0, 1, 1, 1], r=[0, 1], t=[0, 1, 2, 3, 4], k=[0, 1, 0, 0, 1]
        )
        matching, flags = draw_table_matching(state, 0, 1, rng)
        assert len(matching) == len(flags) == 2
        for a, b in matching:
            assert state.k[a] == state.k[b]
            assert state.table_restaurant[a] == 0
            assert state.table_restaurant[b] == 1

    def test_single_group_is_noop(self, fixed_hp, rng):
        """Test that one group gives a degenerate proposal."""
        data = TwoLevelDataset.from_arrays([0.0, 1.0], [0, 0])
        proposal = propose_restaurants(CrfState.all_merged(data.group_of), data, fixed_hp, rng)
        assert proposal.kind is ProposalKind.NOOP


class TestTablesKernel:
    """Tests for the table split-merge kernel."""

    def test_split_merge_replay(self, tiny_dataset, fixed_hp):
        """Test that the merge of a split mirrors its acceptance terms."""
        start = CrfState.all_merged(tiny_dataset.group_of)
        split = propose_tables(start, tiny_dataset, fixed_hp, np.random.default_rng(5),
                               pair=(0, 2))
        assert split.kind is ProposalKind.SPLIT
        assert split.state.n_tables == 2
        merge = propose_tables(split.state, tiny_dataset, fixed_hp,
                               np.random.default_rng(5), pair=(0, 2))
        assert merge.kind is ProposalKind.MERGE
        assert_reverse_pair(split, merge, start)

    def test_target_diff(self, tiny_dataset, fixed_hp, rng):
        """Test the target term against a direct evaluation."""
        start = CrfState.all_merged(tiny_dataset.group_of)
        proposal = propose_tables(start, tiny_dataset, fixed_hp, rng, beta=0.5, pair=(1, 3))
        expected = log_target(proposal.state, tiny_dataset, fixed_hp, 0.5) - log_target(
            start, tiny_dataset, fixed_hp, 0.5
        )
        assert proposal.log_target_diff == pytest.approx(expected)

    def test_customers_of_different_restaurants(self, tiny_dataset, fixed_hp, rng):
        """Test that anchors must share a restaurant."""
        state = CrfState.all_split(tiny_dataset.group_of)
        with pytest.raises(SamplerException):
            propose_tables(state, tiny_dataset, fixed_hp, rng, pair=(0, 2))


class TestDishesKernel:
    """Tests for the dish split-merge kernel."""

    def test_split_merge_replay(self, tiny_dataset, fixed_hp):
        """Test that the merge of a split mirrors its acceptance terms."""
        start = CrfState(group_of=tiny_dataset.group_of, r=[0, 1, 2], t=[0, 1, 2, 3, 4],
                         k=[0, 0, 0, 0, 0])
        split = propose_dishes(start, tiny_dataset, fixed_hp, np.random.default_rng(2),
                               pair=(0, 4))
        assert split.kind is ProposalKind.SPLIT
        merge = propose_dishes(split.state, tiny_dataset, fixed_hp,
                               np.random.default_rng(2), pair=(0, 4))
        assert merge.kind is ProposalKind.MERGE
        assert_reverse_pair(split, merge, start)

    def test_outputs_are_valid(self, medium_dataset, fixed_hp, random_state_factory, rng):
        """Test that proposals from random states are valid canonical states."""
        for _ in range(30):
            state = random_state_factory(medium_dataset, rng)
            proposal = propose_dishes(state, medium_dataset, fixed_hp, rng)
            assert validate(proposal.state, medium_dataset) == []
            assert proposal.state.key() == proposal.state.canonical().key()
            assert proposal.state.r.tolist() == state.r.tolist()


class TestMetropolisAccept:
    """Tests for the accept/reject step."""

    def test_noop_is_rejected(self, rng):
        """Test that degenerate proposals never move."""
        state = CrfState.all_merged(np.array([0]))
        result, accepted = metropolis_accept(
            Proposal(state=state, kind=ProposalKind.NOOP, log_target_diff=10.0), state, rng
        )
        assert result is state
        assert not accepted

    def test_sure_acceptance(self, rng):
        """Test that a large ratio always moves."""
        state = CrfState.all_merged(np.array([0, 0]))
        other = CrfState.all_split(np.array([0, 0]))
        proposal = Proposal(state=other, kind=ProposalKind.SPLIT, log_target_diff=50.0)
        assert metropolis_accept(proposal, state, rng) == (other, True)


class TestMoveFactory:
    """Tests for MoveFactory."""

    @pytest.fixture
    def factory(self, tiny_dataset, short_chain):
        """Create a move factory."""
        return MoveFactory(SamplerMoveArgs(data=tiny_dataset, config=short_chain))

    @pytest.mark.parametrize(
        "name, cls",
        [
            ("RESTAURANTS", RestaurantsMove),
            ("tables", TablesMove),
            ("Dishes", DishesMove),
            ("SIGMA2", Sigma2Move),
            ("ALPHAS", AlphasMove),
        ],
    )
    def test_get_move(self, factory, name, cls):
        """Test getting each move."""
        assert isinstance(factory.get_move(name), cls)

    def test_get_invalid_move(self, factory):
        """Test getting an unknown move."""
        with pytest.raises(SamplerException, match="not supported"):
            factory.get_move("GIBBS")

    def test_registry_without_move(self, tiny_dataset, short_chain):
        """Test a registry that lacks a move."""
        factory = MoveFactory(
            SamplerMoveArgs(data=tiny_dataset, config=short_chain),
            {MoveType.TABLES: TablesMove},
        )
        with pytest.raises(SamplerException, match="No move found"):
            factory.get_move("DISHES")

    def test_default_counts(self, factory, tiny_dataset):
        """Test the per-sweep counts."""
        assert factory.get_move("RESTAURANTS").n_per_sweep() == tiny_dataset.n_groups
        assert factory.get_move("TABLES").n_per_sweep() == 2
        assert factory.get_move("DISHES").n_per_sweep() == 10


class TestParameterMoves:
    """Tests for the sigma2 and concentration moves."""

    def test_sigma2_fixed_is_noop(self, tiny_dataset, short_chain, fixed_hp, rng):
        """Test that a fixed sigma2 is left alone."""
        chain = ChainState(state=CrfState.all_merged(tiny_dataset.group_of), hp=fixed_hp)
        move = Sigma2Move(SamplerMoveArgs(data=tiny_dataset, config=short_chain))
        assert not move.execute(chain, rng)
        assert chain.hp.sigma2 == fixed_hp.sigma2

    def test_sigma2_draw(self, tiny_dataset, short_chain, rng):
        """Test that sigma2 is redrawn when it has a prior."""
        hp = Hyperparams(sigma2_prior=InvGammaPrior(beta0=3.0, beta1=1.0))
        chain = ChainState(state=CrfState.all_merged(tiny_dataset.group_of), hp=hp)
        move = Sigma2Move(SamplerMoveArgs(data=tiny_dataset, config=short_chain))
        assert move.execute(chain, rng)
        assert chain.hp.sigma2 != hp.sigma2

    def test_frozen_restaurants_keep_alpha2(self, tiny_dataset, rng):
        """Test that alpha2 is not updated when restaurants are frozen."""
        prior = TruncatedNormalPrior(mean=2.0, sd=1.0)
        hp = Hyperparams(alpha_prior=(prior, prior, prior))
        config = ChainConfig(n_iter=2, burn_in=0, freeze_restaurants=True)
        chain = ChainState(state=CrfState.all_split(tiny_dataset.group_of), hp=hp)
        move = AlphasMove(SamplerMoveArgs(data=tiny_dataset, config=config))
        for _ in range(20):
            move.execute(chain, rng)
        assert chain.hp.alpha2 == 1.0
        assert "alpha2" not in chain.attempts
        assert chain.attempts["alpha0"] == 20


class TestChainConfig:
    """Tests for the chain configuration."""

    def test_retained(self):
        """Test the thinning rule."""
        config = ChainConfig(n_iter=30, burn_in=10, thin=2)
        kept = [i for i in range(1, 31) if config.is_retained(i)]
        assert kept == list(range(12, 31, 2))
        assert config.n_retained == len(kept)

    def test_burn_in_bound(self):
        """Test that the burn-in must leave draws."""
        with pytest.raises(ValidationError):
            ChainConfig(n_iter=10, burn_in=10)

    def test_temperatures(self):
        """Test the geometric ladder."""
        temps = TemperingConfig(n_rungs=3, max_temp=4.0).temperatures()
        assert temps == pytest.approx([4.0, 2.0, 1.0])


class TestRunChain:
    """Tests for the chain driver."""

    def test_build_sweep_skips_fixed_parameters(self, tiny_dataset, fixed_hp, short_chain):
        """Test that kernels without anything to update are left out."""
        sweep = describe_sweep(build_sweep(tiny_dataset, fixed_hp, short_chain))
        assert sweep == {"RESTAURANTS": 3, "TABLES": 2, "DISHES": 10}

    def test_frozen_restaurants(self, tiny_dataset, fixed_hp):
        """Test that frozen restaurants keep the initial low-resolution partition."""
        config = ChainConfig(n_iter=20, burn_in=5, n_chains=1, freeze_restaurants=True)
        initial = CrfState.all_split(tiny_dataset.group_of)
        samples = run_chain(tiny_dataset, fixed_hp, config, np.random.default_rng(1),
                            initial_state=initial)
        assert (samples.gamma_l == np.array([0, 1, 2])).all()

    def test_draw_count_and_determinism(self, medium_dataset, fixed_hp, short_chain):
        """Test the retained draws and that a seed fixes the run."""
        first = run_chain(medium_dataset, fixed_hp, short_chain, np.random.default_rng(3))
        second = run_chain(medium_dataset, fixed_hp, short_chain, np.random.default_rng(3))
        assert first.n_draws == short_chain.n_retained == 10
        assert first.gamma_h.shape == (10, medium_dataset.n_customers)
        assert np.array_equal(first.gamma_h, second.gamma_h)
        assert np.array_equal(first.log_posterior, second.log_posterior)
        assert first.iteration.tolist() == list(range(12, 31, 2))

    def test_recovers_separated_groups(self, medium_dataset, fixed_hp):
        """Test that a short run separates two well separated means."""
        config = ChainConfig(n_iter=60, burn_in=30, n_chains=1, seed=0)
        samples = run_chain(medium_dataset, fixed_hp, config, np.random.default_rng(0))
        last = samples.gamma_h[-1]
        assert set(last[:15]).isdisjoint(set(last[15:]))
        assert samples.gamma_h.max(axis=1)[-1] < 4

    def test_tempered_chain(self, tiny_dataset, fixed_hp):
        """Test that a tempered run reports swap acceptance."""
        config = ChainConfig(
            n_iter=20, burn_in=5, n_chains=1, tempering=TemperingConfig(n_rungs=3)
        )
        samples = run_chain(tiny_dataset, fixed_hp, config, np.random.default_rng(4))
        assert samples.n_draws == 15
        assert 0.0 <= samples.acceptance[0][SWAP] <= 1.0

    def test_invalid_initial_state(self, tiny_dataset, fixed_hp, short_chain, rng):
        """Test that the initial state must fit the dataset."""
        with pytest.raises(StateException):
            run_chain(tiny_dataset, fixed_hp, short_chain, rng,
                      initial_state=CrfState.all_merged(np.array([0, 1])))

    def test_run_chains_in_process(self, tiny_dataset, fixed_hp):
        """Test that chains are labeled and pooled."""
        config = ChainConfig(n_iter=10, burn_in=2, n_chains=2, seed=5)
        chains = run_chains(tiny_dataset, fixed_hp, config, n_workers=1)
        pooled = PosteriorSamples.pool(chains)
        assert pooled.n_draws == 16
        assert sorted(set(pooled.chain.tolist())) == [0, 1]
        assert set(pooled.acceptance) == {0, 1}

    @patch("nhdp.sampler.chain.ProcessPoolExecutor")
    def test_run_chains_uses_pool(self, mock_pool_cls, tiny_dataset, fixed_hp):
        """Test that several workers go through a process pool."""
        pool = MagicMock()
        pool.map.return_value = iter(["a", "b"])
        mock_pool_cls.return_value.__enter__.return_value = pool
        config = ChainConfig(n_iter=10, burn_in=2, n_chains=2)
        assert run_chains(tiny_dataset, fixed_hp, config) == ["a", "b"]
        mock_pool_cls.assert_called_once_with(max_workers=2)
        jobs = list(pool.map.call_args[0][1])
        assert [job[4] for job in jobs] == [0, 1]


class TestTempering:
    """Tests for replica exchange."""

    def test_swap_ratio(self):
        """Test the swap log ratio."""
        assert log_swap_ratio(0.5, 1.0, -10.0, -4.0) == pytest.approx(-3.0)
        assert log_swap_ratio(1.0, 1.0, -10.0, -4.0) == 0.0

    def test_swap_exchanges_states(self, tiny_dataset, fixed_hp, rng):
        """Test that a favourable swap moves the better state to the cold rung."""
        good = CrfState.all_split(tiny_dataset.group_of)
        hot = ChainState(state=good, hp=fixed_hp.with_sigma2(0.3), beta=0.25)
        cold = ChainState(state=CrfState.all_merged(tiny_dataset.group_of), hp=fixed_hp,
                          beta=1.0)
        with patch("nhdp.sampler.tempering.log_likelihood", side_effect=[0.0, -100.0]):
            tempered_swap([hot, cold], tiny_dataset, rng)
        assert cold.state is good
        assert cold.hp.sigma2 == 0.3
        assert hot.beta == 0.25
        assert cold.attempts[SWAP] == 1
        assert cold.accepts[SWAP] == 1

    def test_unsorted_rungs(self, tiny_dataset, fixed_hp, rng):
        """Test that rungs must be ordered hottest first."""
        state = CrfState.all_merged(tiny_dataset.group_of)
        rungs = [ChainState(state, fixed_hp, beta=1.0), ChainState(state, fixed_hp, beta=0.5)]
        with pytest.raises(SamplerException):
            tempered_swap(rungs, tiny_dataset, rng)
        with pytest.raises(SamplerException):
            tempered_swap(rungs[:1], tiny_dataset, rng)


@pytest.mark.slow
class TestMoveProperties:
    """Validity of the state after every structural move, accepted or rejected."""

    STRUCTURE_MOVES = ("RESTAURANTS", "TABLES", "DISHES")

    def test_states_stay_valid(self, fixed_hp, medium_dataset, random_state_factory):
        """Test mixed kernels from random starts on small and medium datasets."""
        rng = np.random.default_rng(47)
        datasets = PROPERTY_DATASETS + (medium_dataset,)
        config = ChainConfig(n_iter=2, burn_in=0, n_launch_scans=2)
        attempts = 0
        accepted = 0
        for start in range(500):
            data = datasets[start % len(datasets)]
            factory = MoveFactory(SamplerMoveArgs(data=data, config=config))
            beta = (0.0, 0.3, 1.0)[start % 3]
            chain = ChainState(state=random_state_factory(data, rng), hp=fixed_hp, beta=beta)
            for _ in range(20):
                name = self.STRUCTURE_MOVES[rng.integers(len(self.STRUCTURE_MOVES))]
                before = chain.state.key()
                if factory.get_move(name).execute(chain, rng):
                    accepted += 1
                else:
                    assert chain.state.key() == before, name
                assert validate(chain.state, data) == [], name
                attempts += 1
        assert attempts >= 10_000
        assert 0 < accepted < attempts
