"""Restricted Gibbs scans used to build and score split proposals."""

from abc import ABC, abstractmethod
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from nhdp.model.likelihood import log_marginal_arrays

N_LAUNCH_SCANS = 5


class RestrictedGibbs(ABC):
    """
    Two-sided restricted Gibbs sampler over a fixed list of items.

    Subclasses keep side totals up to date through reset/remove/add and
    return the unnormalized log weights of placing an item on side 0 or 1.
    """

    n_items: int

    @abstractmethod
    def reset(self, z: np.ndarray) -> None:
        raise NotImplementedError(
            f"Class '{self.__class__.__name__}' must implement method 'reset'"
        )

    @abstractmethod
    def remove(self, i: int, side: int) -> None:
        raise NotImplementedError(
            f"Class '{self.__class__.__name__}' must implement method 'remove'"
        )

    @abstractmethod
    def add(self, i: int, side: int) -> None:
        raise NotImplementedError(
            f"Class '{self.__class__.__name__}' must implement method 'add'"
        )

    @abstractmethod
    def log_weights(self, i: int) -> np.ndarray:
        raise NotImplementedError(
            f"Class '{self.__class__.__name__}' must implement method 'log_weights'"
        )

    def scan(
        self,
        z: np.ndarray,
        rng: Optional[np.random.Generator] = None,
        target: Optional[np.ndarray] = None,
    ) -> float:
        """
        One in-order Gibbs scan, updating z in place.

        With a target the scan is forced onto it and only scored.

        Returns:
            Log probability of the transition from the incoming z to the outgoing z
        """
        self.reset(z)
        log_q = 0.0
        for i in range(self.n_items):
            self.remove(i, int(z[i]))
            log_w = self.log_weights(i)
            log_p = log_w - logsumexp(log_w)
            if target is None:
                side = int(rng.uniform() >= np.exp(log_p[0]))
            else:
                side = int(target[i])
            log_q += float(log_p[side])
            self.add(i, side)
            z[i] = side
        return log_q

    def launch(self, rng: np.random.Generator, n_scans: int = N_LAUNCH_SCANS) -> np.ndarray:
        """Uniform random sides followed by n_scans intermediate scans."""
        z = rng.integers(0, 2, size=self.n_items)
        for _ in range(n_scans):
            self.scan(z, rng)
        return z

    def propose(
        self, rng: np.random.Generator, n_scans: int = N_LAUNCH_SCANS
    ) -> tuple[np.ndarray, float]:
        """Sampled split and its log proposal probability from the launch state."""
        z = self.launch(rng, n_scans)
        log_q = self.scan(z, rng)
        return z, log_q

    def score(
        self, observed: np.ndarray, rng: np.random.Generator, n_scans: int = N_LAUNCH_SCANS
    ) -> float:
        """Log probability that a launch followed by one scan produces observed."""
        z = self.launch(rng, n_scans)
        return self.scan(z, target=np.asarray(observed))


class LikelihoodSplitGibbs(RestrictedGibbs):
    """
    Split of unit-count items between two anchored clusters.

    Each side's weight is its item count times the change in the conjugate
    marginal likelihood of the side's cluster statistics. Used for the
    customers of a split table and for the tables of a split dish.
    """

    def __init__(
        self,
        item_n: np.ndarray,
        item_s: np.ndarray,
        item_ss: np.ndarray,
        base_n: np.ndarray,
        base_s: np.ndarray,
        base_ss: np.ndarray,
        sigma2: float,
        k0: float,
        beta: float = 1.0,
        use_likelihood: bool = True,
    ):
        self.item_n = np.asarray(item_n, dtype=float)
        self.item_s = np.asarray(item_s, dtype=float)
        self.item_ss = np.asarray(item_ss, dtype=float)
        self.base_n = np.asarray(base_n, dtype=float)
        self.base_s = np.asarray(base_s, dtype=float)
        self.base_ss = np.asarray(base_ss, dtype=float)
        self.sigma2 = sigma2
        self.k0 = k0
        self.beta = beta
        self.use_likelihood = use_likelihood and beta > 0
        self.n_items = int(self.item_n.size)

    def reset(self, z: np.ndarray) -> None:
        self.count = np.ones(2)
        self.n = self.base_n.copy()
        self.s = self.base_s.copy()
        self.ss = self.base_ss.copy()
        for side in (0, 1):
            on = z == side
            self.count[side] += on.sum()
            self.n[side] += self.item_n[on].sum()
            self.s[side] += self.item_s[on].sum()
            self.ss[side] += self.item_ss[on].sum()

    def _shift(self, i: int, side: int, sign: float) -> None:
        self.count[side] += sign
        self.n[side] += sign * self.item_n[i]
        self.s[side] += sign * self.item_s[i]
        self.ss[side] += sign * self.item_ss[i]

    def remove(self, i: int, side: int) -> None:
        self._shift(i, side, -1.0)

    def add(self, i: int, side: int) -> None:
        self._shift(i, side, 1.0)

    def log_weights(self, i: int) -> np.ndarray:
        log_w = np.log(self.count)
        if self.use_likelihood:
            with_i = log_marginal_arrays(
                self.n + self.item_n[i],
                self.s + self.item_s[i],
                self.ss + self.item_ss[i],
                self.sigma2,
                self.k0,
            )
            without_i = log_marginal_arrays(self.n, self.s, self.ss, self.sigma2, self.k0)
            log_w = log_w + self.beta * (with_i - without_i)
        return log_w
