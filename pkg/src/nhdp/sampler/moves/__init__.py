from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from nhdp.common.models import Hyperparams
from nhdp.model.likelihood import log_likelihood
from nhdp.model.priors import log_joint_prior
from nhdp.sampler import logger
from nhdp.sampler.models import ChainConfig, ChainState, Proposal, ProposalKind
from nhdp.state.models import CrfState, TwoLevelDataset


class SamplerMove(ABC):
    @abstractmethod
    def execute(self, chain: ChainState, rng: np.random.Generator) -> bool:
        raise NotImplementedError(
            f"Class '{self.__class__.__name__}' must implement method 'execute'"
        )

    @abstractmethod
    def n_per_sweep(self) -> int:
        raise NotImplementedError(
            f"Class '{self.__class__.__name__}' must implement method 'n_per_sweep'"
        )


@dataclass(frozen=True)
class SamplerMoveArgs:
    data: TwoLevelDataset
    config: ChainConfig


def log_target(
    state: CrfState, data: TwoLevelDataset, hp: Hyperparams, beta: float = 1.0
) -> float:
    """Joint prior plus the likelihood weighted by beta."""
    value = log_joint_prior(state, hp, check=False)
    if beta > 0:
        value += beta * log_likelihood(state, data, hp)
    return value


def noop(state: CrfState) -> Proposal:
    return Proposal(state=state, kind=ProposalKind.NOOP)


def metropolis_accept(
    proposal: Proposal, current: CrfState, rng: np.random.Generator
) -> Tuple[CrfState, bool]:
    """Accept with probability min(1, exp(log_acceptance))."""
    if proposal.kind is ProposalKind.NOOP:
        logger.debug("Degenerate proposal counted as rejection")
        return current, False
    if np.log(rng.uniform()) < proposal.log_acceptance:
        return proposal.state, True
    return current, False
