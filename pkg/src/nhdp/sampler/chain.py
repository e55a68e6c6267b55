"""Sweep scheduling, chain driver and multi-chain execution."""

from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np

from nhdp.common.exceptions import SamplerException
from nhdp.common.models import Hyperparams
from nhdp.common.utils import child_rng, spawn_rngs
from nhdp.model.likelihood import log_likelihood
from nhdp.model.priors import log_joint_prior
from nhdp.sampler import logger
from nhdp.sampler.models import ChainConfig, ChainState, PosteriorSamples
from nhdp.sampler.moves import SamplerMove, SamplerMoveArgs
from nhdp.sampler.moves.move_factory import MoveFactory, MoveType
from nhdp.sampler.tempering import SWAP, tempered_swap
from nhdp.state.models import CrfState, TwoLevelDataset
from nhdp.state.operations import check_state, induced_partitions

Sweep = List[Tuple[str, SamplerMove, int]]


def build_sweep(data: TwoLevelDataset, hp: Hyperparams, cfg: ChainConfig) -> Sweep:
    """
    Resolve the configured kernels into (name, move, count) triples.

    Kernels with nothing to update are left out: restaurant moves when the
    restaurant partition is frozen, the sigma2 draw when sigma2 is fixed
    and the concentration step when no concentration has a prior.
    """
    factory = MoveFactory(SamplerMoveArgs(data=data, config=cfg))
    sweep: Sweep = []
    for name in cfg.moves:
        move = factory.get_move(name)
        kind = MoveType(name.upper())
        if kind is MoveType.SIGMA2 and hp.sigma2_prior is None:
            continue
        if kind is MoveType.ALPHAS and not hp.free_alphas:
            continue
        count = move.n_per_sweep()
        if count > 0:
            sweep.append((kind.value, move, count))
    return sweep


def describe_sweep(sweep: Sweep) -> Dict[str, int]:
    return {name: count for name, _, count in sweep}


def run_sweep(chain: ChainState, sweep: Sweep, rng: np.random.Generator) -> None:
    for name, move, count in sweep:
        for _ in range(count):
            chain.record(name, move.execute(chain, rng))


def log_posterior(state: CrfState, data: TwoLevelDataset, hp: Hyperparams) -> float:
    return log_joint_prior(state, hp, check=False) + log_likelihood(state, data, hp)


def _empty_trace(cfg: ChainConfig, data: TwoLevelDataset) -> Dict[str, np.ndarray]:
    n = cfg.n_retained
    return {
        "gamma_l": np.zeros((n, data.n_groups), dtype=np.int64),
        "gamma_h": np.zeros((n, data.n_customers), dtype=np.int64),
        "sigma2": np.zeros(n),
        "alpha0": np.zeros(n),
        "alpha1": np.zeros(n),
        "alpha2": np.zeros(n),
        "log_posterior": np.zeros(n),
        "iteration": np.zeros(n, dtype=np.int64),
        "chain": np.zeros(n, dtype=np.int64),
    }


def run_chain(
    data: TwoLevelDataset,
    hp: Hyperparams,
    cfg: ChainConfig,
    rng: np.random.Generator,
    chain_id: int = 0,
    initial_state: Optional[CrfState] = None,
) -> PosteriorSamples:
    """
    Run one chain and return its thinned post-burn-in draws.

    With tempering the chain is a ladder of rungs stepped in lockstep, one
    swap attempt per sweep, and draws are taken from the rung at
    temperature 1. prior_only drops the likelihood from every kernel.

    Args:
        data: Dataset
        hp: Initial hyperparameters
        cfg: Chain configuration
        rng: Random generator; the run is a deterministic function of it
        chain_id: Label stored with the draws
        initial_state: Starting state, all-merged when omitted

    Returns:
        The retained draws
    """
    if initial_state is None:
        initial_state = CrfState.all_merged(data.group_of)
    state = initial_state
    check_state(state, data)
    state = state.canonical()
    sweep = build_sweep(data, hp, cfg)
    if not sweep:
        raise SamplerException("the sweep has no kernels to run")

    if cfg.tempering is not None:
        temperatures = cfg.tempering.temperatures()
    else:
        temperatures = np.ones(1)
    rungs = [
        ChainState(state=state, hp=hp, beta=0.0 if cfg.prior_only else 1.0 / temp)
        for temp in temperatures
    ]
    rung_rngs = [child_rng(rng) for _ in rungs]
    cold = rungs[-1]

    trace = _empty_trace(cfg, data)
    d = 0
    for iteration in range(1, cfg.n_iter + 1):
        for rung, rung_rng in zip(rungs, rung_rngs):
            run_sweep(rung, sweep, rung_rng)
        if len(rungs) > 1 and not cfg.prior_only:
            tempered_swap(rungs, data, rng)

        if cfg.is_retained(iteration):
            pair = induced_partitions(cold.state)
            trace["gamma_l"][d] = pair.gamma_l
            trace["gamma_h"][d] = pair.gamma_h
            trace["sigma2"][d] = cold.hp.sigma2
            trace["alpha0"][d], trace["alpha1"][d], trace["alpha2"][d] = cold.hp.alphas
            trace["log_posterior"][d] = log_posterior(cold.state, data, cold.hp)
            trace["iteration"][d] = iteration
            trace["chain"][d] = chain_id
            d += 1

        if iteration % cfg.log_every == 0:
            rates = ", ".join(
                f"{k}={v:.3f}" for k, v in sorted(cold.acceptance_rates().items())
            )
            logger.info(
                f"Chain {chain_id} - Sweep {iteration}/{cfg.n_iter} - "
                f"restaurants={cold.state.n_restaurants} dishes={cold.state.n_dishes} "
                f"- acceptance {rates}"
            )

    acceptance = cold.acceptance_rates()
    if any(SWAP in r.attempts for r in rungs):
        acceptance[SWAP] = sum(r.accepts[SWAP] for r in rungs) / max(
            1, sum(r.attempts[SWAP] for r in rungs)
        )
    return PosteriorSamples(**trace, k0=hp.k0, acceptance={chain_id: acceptance})


def _run_chain_job(
    args: Tuple[TwoLevelDataset, Hyperparams, ChainConfig, np.random.Generator, int,
                Optional[CrfState]],
) -> PosteriorSamples:
    data, hp, cfg, rng, chain_id, initial_state = args
    return run_chain(data, hp, cfg, rng, chain_id=chain_id, initial_state=initial_state)


def run_chains(
    data: TwoLevelDataset,
    hp: Hyperparams,
    cfg: ChainConfig,
    n_workers: Optional[int] = None,
    initial_state: Optional[CrfState] = None,
) -> List[PosteriorSamples]:
    """
    Run cfg.n_chains independent chains, seeded from cfg.seed.

    Chains run in worker processes when n_workers is not 1; the result does
    not depend on the number of workers.
    """
    rngs = spawn_rngs(cfg.seed, cfg.n_chains)
    jobs = [(data, hp, cfg, rng, i, initial_state) for i, rng in enumerate(rngs)]
    if n_workers == 1 or cfg.n_chains == 1:
        return [_run_chain_job(job) for job in jobs]
    logger.info(f"Running {cfg.n_chains} chains on {n_workers or cfg.n_chains} workers")
    with ProcessPoolExecutor(max_workers=n_workers or cfg.n_chains) as pool:
        return list(pool.map(_run_chain_job, jobs))
