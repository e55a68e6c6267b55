"""Configuration, chain state and posterior sample models of the sampler."""

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from nhdp.common.exceptions import SamplerException
from nhdp.common.models import Hyperparams, Level
from nhdp.state.models import CrfState, PartitionPair


class TemperingConfig(BaseModel):
    """Geometric temperature ladder ending at temperature 1."""

    model_config = ConfigDict(frozen=True)

    n_rungs: int = Field(default=4, ge=2)
    max_temp: float = Field(default=4.0, gt=1.0)

    def temperatures(self) -> np.ndarray:
        """Strictly decreasing temperatures, hottest first, coldest (1) last."""
        steps = np.arange(self.n_rungs - 1, -1, -1) / (self.n_rungs - 1)
        return self.max_temp**steps


class ChainConfig(BaseModel):
    """Run length, thinning and sweep composition of the MCMC chains."""

    model_config = ConfigDict(frozen=True)

    n_iter: int = Field(default=12000, ge=1)
    burn_in: int = Field(default=2000, ge=0)
    thin: int = Field(default=1, ge=1)
    n_chains: int = Field(default=2, ge=1)
    tempering: Optional[TemperingConfig] = None
    seed: int = 0
    moves: List[str] = ["RESTAURANTS", "TABLES", "DISHES", "SIGMA2", "ALPHAS"]
    # per-kernel counts; kernels left out use the size-based defaults
    moves_per_sweep: Dict[str, int] = {}
    prior_only: bool = False
    freeze_restaurants: bool = False
    n_launch_scans: int = Field(default=5, ge=0)
    table_merge_prob: float = Field(default=0.5, gt=0.0, lt=1.0)
    log_every: int = Field(default=1000, ge=1)

    @model_validator(mode="after")
    def check_burn_in(self) -> "ChainConfig":
        if self.burn_in >= self.n_iter:
            raise ValueError("burn_in must be smaller than n_iter")
        for name, count in self.moves_per_sweep.items():
            if count < 0:
                raise ValueError(f"move count of {name} must be non-negative")
        return self

    @property
    def n_retained(self) -> int:
        return (self.n_iter - self.burn_in) // self.thin

    def is_retained(self, iteration: int) -> bool:
        return iteration > self.burn_in and (iteration - self.burn_in) % self.thin == 0


class ProposalKind(str, enum.Enum):
    SPLIT = "split"
    MERGE = "merge"
    NOOP = "noop"


@dataclass(frozen=True, eq=False)
class Proposal:
    """
    A split or merge proposal with the terms of its acceptance ratio.

    log_target_diff is log pi(proposed) - log pi(current); the two q terms
    are the forward and reverse proposal log densities.
    """

    state: CrfState
    kind: ProposalKind
    log_target_diff: float = 0.0
    log_q_forward: float = 0.0
    log_q_reverse: float = 0.0

    @property
    def log_acceptance(self) -> float:
        return self.log_target_diff + self.log_q_reverse - self.log_q_forward


@dataclass
class ChainState:
    """Mutable state of one chain (or one tempering rung)."""

    state: CrfState
    hp: Hyperparams
    beta: float = 1.0
    attempts: Counter = field(default_factory=Counter)
    accepts: Counter = field(default_factory=Counter)

    @property
    def temperature(self) -> float:
        return 1.0 / self.beta if self.beta > 0 else float("inf")

    def record(self, move: str, accepted: bool) -> None:
        self.attempts[move] += 1
        if accepted:
            self.accepts[move] += 1

    def acceptance_rates(self) -> Dict[str, float]:
        return {
            move: self.accepts[move] / n for move, n in self.attempts.items() if n > 0
        }


@dataclass(eq=False)
class PosteriorSamples:
    """
    Retained draws of one or more chains.

    Row d of every array describes the d-th retained draw.
    """

    gamma_l: np.ndarray
    gamma_h: np.ndarray
    sigma2: np.ndarray
    alpha0: np.ndarray
    alpha1: np.ndarray
    alpha2: np.ndarray
    log_posterior: np.ndarray
    iteration: np.ndarray
    chain: np.ndarray
    k0: float
    acceptance: Dict[int, Dict[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.k0 < 0:
            raise SamplerException(f"k0 must be non-negative, got {self.k0}")
        n = self.gamma_l.shape[0]
        for name in ("gamma_h", "sigma2", "alpha0", "alpha1", "alpha2",
                     "log_posterior", "iteration", "chain"):
            if getattr(self, name).shape[0] != n:
                raise SamplerException(f"{name} has a different number of draws")

    @property
    def n_draws(self) -> int:
        return int(self.gamma_l.shape[0])

    def labels(self, level: Level) -> np.ndarray:
        return self.gamma_l if Level(level) is Level.LOW else self.gamma_h

    def pairs(self) -> Iterator[PartitionPair]:
        for gl, gh in zip(self.gamma_l, self.gamma_h):
            yield PartitionPair(gamma_l=gl, gamma_h=gh)

    @property
    def draws(self) -> List[Tuple[PartitionPair, float, Tuple[float, float, float]]]:
        return [
            (pair, float(s2), (float(a0), float(a1), float(a2)))
            for pair, s2, a0, a1, a2 in zip(
                self.pairs(), self.sigma2, self.alpha0, self.alpha1, self.alpha2
            )
        ]

    @classmethod
    def pool(cls, samples: Sequence["PosteriorSamples"]) -> "PosteriorSamples":
        """Concatenate the draws of several chains."""
        if not samples:
            raise SamplerException("nothing to pool")
        acceptance: Dict[int, Dict[str, float]] = {}
        for s in samples:
            acceptance.update(s.acceptance)
        return cls(
            **{
                name: np.concatenate([getattr(s, name) for s in samples])
                for name in ("gamma_l", "gamma_h", "sigma2", "alpha0", "alpha1",
                             "alpha2", "log_posterior", "iteration", "chain")
            },
            k0=samples[0].k0,
            acceptance=acceptance,
        )
