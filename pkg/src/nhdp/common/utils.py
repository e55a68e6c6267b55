"""Utility functions shared across the nhdp package."""

from typing import Iterator, List, Sequence

import numpy as np


def canonical_labels(labels: Sequence[int] | np.ndarray) -> np.ndarray:
    """Relabel so that labels appear as 0, 1, 2, ... in order of first appearance."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return np.zeros(0, dtype=np.int64)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[inverse.reshape(-1)]


def iter_set_partitions(n: int) -> Iterator[List[int]]:
    """Yield every partition of n elements once, as a restricted growth string."""
    if n == 0:
        yield []
        return
    labels = [0] * n
    maxima = [0] * n

    def _extend(i: int) -> Iterator[List[int]]:
        if i == n:
            yield list(labels)
            return
        for label in range(maxima[i - 1] + 2):
            labels[i] = label
            maxima[i] = max(maxima[i - 1], label)
            yield from _extend(i + 1)

    yield from _extend(1)


def child_rng(rng: np.random.Generator) -> np.random.Generator:
    """A generator seeded by one draw of rng."""
    return np.random.default_rng(int(rng.integers(2**63)))


def spawn_rngs(seed: int, n: int) -> List[np.random.Generator]:
    """n independent generators derived from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]
