"""Common test fixtures for unit tests."""

import numpy as np
import pytest

from nhdp.common.models import Hyperparams
from nhdp.sampler.models import ChainConfig, PosteriorSamples
from nhdp.state.models import CrfState, TwoLevelDataset


@pytest.fixture
def rng():
    """Create a seeded random generator."""
    return np.random.default_rng(20240607)


@pytest.fixture
def tiny_dataset():
    """Five customers in three groups."""
    return TwoLevelDataset.from_arrays(
        [0.1, -0.2, 1.5, 1.4, -1.0], ["a", "a", "b", "b", "c"]
    )


@pytest.fixture
def two_group_dataset():
    """Two groups with two customers each."""
    return TwoLevelDataset.from_arrays([-0.5, -0.4, 0.6, 0.7], [0, 0, 1, 1])


@pytest.fixture
def medium_dataset(rng):
    """Six groups of five customers drawn around two well separated means."""
    groups = np.repeat(np.arange(6), 5)
    means = np.where(groups < 3, -2.0, 2.0)
    return TwoLevelDataset.from_arrays(rng.normal(means, 0.3), groups)


@pytest.fixture
def fixed_hp():
    """Hyperparameters with every parameter held fixed."""
    return Hyperparams(alpha0=1.0, alpha1=0.5, alpha2=1.0, sigma2=0.25, k0=0.5)


@pytest.fixture
def short_chain():
    """A short single-chain configuration."""
    return ChainConfig(n_iter=30, burn_in=10, thin=2, n_chains=1, seed=7, log_every=10)


def random_crf_state(data: TwoLevelDataset, rng: np.random.Generator) -> CrfState:
    """A random valid state: random restaurants, seatings and dishes."""
    r = rng.integers(0, data.n_groups, size=data.n_groups)
    restaurant = r[data.group_of]
    t = np.empty(data.n_customers, dtype=np.int64)
    offset = 0
    for s in np.unique(restaurant):
        members = np.flatnonzero(restaurant == s)
        tables = rng.integers(0, members.size, size=members.size)
        _, tables = np.unique(tables, return_inverse=True)
        t[members] = offset + tables
        offset += int(tables.max()) + 1
    k = rng.integers(0, offset, size=offset)
    return CrfState(group_of=data.group_of, r=r, t=t, k=k).canonical()


@pytest.fixture
def random_state_factory():
    """Factory of random valid states for property tests."""
    return random_crf_state


def make_samples(gamma_l, gamma_h, k0: float = 1.0) -> PosteriorSamples:
    """Posterior samples holding the given label rows."""
    gamma_l = np.asarray(gamma_l, dtype=np.int64)
    gamma_h = np.asarray(gamma_h, dtype=np.int64)
    n = gamma_l.shape[0]
    return PosteriorSamples(
        gamma_l=gamma_l,
        gamma_h=gamma_h,
        sigma2=np.full(n, 0.5),
        alpha0=np.ones(n),
        alpha1=np.ones(n),
        alpha2=np.ones(n),
        log_posterior=np.zeros(n),
        iteration=np.arange(n),
        chain=np.zeros(n, dtype=np.int64),
        k0=k0,
        acceptance={0: {"TABLES": 0.5}},
    )


@pytest.fixture
def samples_factory():
    """Factory of posterior samples with given labels."""
    return make_samples
