"""Updates of sigma2 and of the concentration parameters inside a sweep."""

import numpy as np

from nhdp.common.models import Concentration
from nhdp.model.likelihood import dish_stats
from nhdp.model.updates import gibbs_sigma2_draw, mh_alpha_update
from nhdp.sampler.models import ChainState
from nhdp.sampler.moves import SamplerMove, SamplerMoveArgs


class Sigma2Move(SamplerMove):
    """Gibbs draw of sigma2; a no-op when sigma2 is fixed."""

    def __init__(self, move_args: SamplerMoveArgs):
        self.data = move_args.data
        self.config = move_args.config

    def n_per_sweep(self) -> int:
        return self.config.moves_per_sweep.get("SIGMA2", 1)

    def execute(self, chain: ChainState, rng: np.random.Generator) -> bool:
        if chain.hp.sigma2_prior is None:
            return False
        stats = dish_stats(chain.state, self.data)
        sigma2 = gibbs_sigma2_draw(stats, chain.hp, rng, chain.beta)
        chain.hp = chain.hp.with_sigma2(sigma2)
        return True


class AlphasMove(SamplerMove):
    """One Metropolis-Hastings step for every concentration that has a prior."""

    def __init__(self, move_args: SamplerMoveArgs):
        self.config = move_args.config

    def n_per_sweep(self) -> int:
        return self.config.moves_per_sweep.get("ALPHAS", 1)

    def execute(self, chain: ChainState, rng: np.random.Generator) -> bool:
        accepted = False
        for which in chain.hp.free_alphas:
            if which is Concentration.ALPHA2 and self.config.freeze_restaurants:
                continue
            before = chain.hp.alpha(which)
            chain.hp = mh_alpha_update(which, chain.state, chain.hp, rng)
            moved = chain.hp.alpha(which) != before
            chain.record(which.value, moved)
            accepted = accepted or moved
        return accepted
