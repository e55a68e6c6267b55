"""Generators of the two synthetic benchmark frameworks."""

from typing import List, Sequence, Tuple

import numpy as np

from nhdp.common.exceptions import SynthesisException
from nhdp.common.utils import canonical_labels
from nhdp.state.models import PartitionPair, TwoLevelDataset
from nhdp.synth import logger
from nhdp.synth.models import SynthTruth

SIGMA = 0.5
FRAMEWORK1_MEANS = np.array([-6.25, -3.75, -1.25, 1.25, 3.75, 6.25])
# row k holds the component weights of mixture F_k
FRAMEWORK1_WEIGHTS = np.array(
    [
        [0.0, 0.6, 0.3, 0.0, 0.1, 0.0],
        [0.4, 0.0, 0.1, 0.1, 0.4, 0.0],
        [0.1, 0.0, 0.0, 0.0, 0.3, 0.6],
        [0.0, 0.0, 0.5, 0.5, 0.0, 0.0],
        [0.2, 0.2, 0.0, 0.2, 0.2, 0.2],
        [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
    ]
)
MAX_REJECTION_ATTEMPTS = 100_000
NORMALIZATION_TOL = 1e-9


def tv_distance(p: Sequence[float], q: Sequence[float]) -> float:
    """
    Total variation distance 0.5 * sum |p_i - q_i| of two discrete distributions.

    Raises:
        SynthesisException: If the inputs differ in length or do not sum to 1
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise SynthesisException("distributions must share the same atoms")
    for dist in (p, q):
        if np.any(dist < 0) or abs(dist.sum() - 1.0) > NORMALIZATION_TOL:
            raise SynthesisException("distributions must be non-negative and sum to 1")
    return float(0.5 * np.abs(p - q).sum())


def _unit_ids(group_of: np.ndarray) -> List[str]:
    within = np.zeros(group_of.size, dtype=np.int64)
    for g in np.unique(group_of):
        members = np.flatnonzero(group_of == g)
        within[members] = np.arange(members.size)
    return [f"{g}-{h}" for g, h in zip(group_of, within)]


def _dataset(values: np.ndarray, group_of: np.ndarray) -> TwoLevelDataset:
    n_groups = int(group_of.max()) + 1
    return TwoLevelDataset(
        values=values,
        group_of=group_of,
        unit_ids=tuple(_unit_ids(group_of)),
        group_ids=tuple(str(g) for g in range(n_groups)),
    )


def gen_framework1(L: int, n_l: int, seed: int, sigma: float = SIGMA) -> SynthTruth:
    """
    Groups drawn from six fixed normal mixtures.

    Every group picks one of the six mixtures uniformly; that choice is the
    low-resolution truth. Every unit then picks a component from the
    mixture's weights; that choice is the high-resolution truth. The group
    draws use their own stream, so one seed gives the same low-resolution
    partition for every n_l.

    Args:
        L: Number of groups
        n_l: Units per group
        seed: Random seed
        sigma: Within-component standard deviation

    Returns:
        The dataset and its truth
    """
    if L < 1 or n_l < 1:
        raise SynthesisException("L and n_l must be at least 1")
    group_seq, unit_seq = np.random.SeedSequence(seed).spawn(2)
    group_rng = np.random.default_rng(group_seq)
    unit_rng = np.random.default_rng(unit_seq)

    mixture = group_rng.integers(FRAMEWORK1_WEIGHTS.shape[0], size=L)
    group_of = np.repeat(np.arange(L), n_l)
    component = np.concatenate(
        [
            unit_rng.choice(FRAMEWORK1_MEANS.size, size=n_l, p=FRAMEWORK1_WEIGHTS[m])
            for m in mixture
        ]
    )
    theta = FRAMEWORK1_MEANS[component]
    values = unit_rng.normal(theta, sigma)
    logger.info(f"Framework 1: {L} groups x {n_l} units, seed {seed}")
    return SynthTruth(
        dataset=_dataset(values, group_of),
        true_pair=PartitionPair(gamma_l=mixture, gamma_h=component),
        true_theta=theta,
        true_phi=FRAMEWORK1_WEIGHTS[mixture] @ FRAMEWORK1_MEANS,
        params={"framework": 1, "L": L, "n_l": n_l, "seed": seed, "sigma": sigma},
    )


def stick_breaking(alpha: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """GEM(alpha) weights truncated at size atoms, the last one closing the stick."""
    fractions = rng.beta(1.0, alpha, size=size - 1)
    weights = np.empty(size)
    remaining = np.concatenate([[1.0], np.cumprod(1.0 - fractions)])
    weights[:-1] = fractions * remaining[:-1]
    weights[-1] = 1.0 - weights[:-1].sum()
    return np.clip(weights, 0.0, None)


def hdp_atom(global_weights: np.ndarray, alpha1: float, rng: np.random.Generator) -> np.ndarray:
    """
    One group-level distribution of a truncated HDP over the shared atoms.

    pi'_k ~ Beta(alpha1 b_k, alpha1 (1 - sum_{l<=k} b_l)) and
    pi_k = pi'_k prod_{l<k} (1 - pi'_l), with the last weight closing the stick.
    """
    tail = np.clip(1.0 - np.cumsum(global_weights), 0.0, None)
    a = np.maximum(alpha1 * global_weights[:-1], 1e-12)
    b = np.maximum(alpha1 * tail[:-1], 1e-12)
    fractions = rng.beta(a, b)
    remaining = np.concatenate([[1.0], np.cumprod(1.0 - fractions)])
    weights = np.empty(global_weights.size)
    weights[:-1] = fractions * remaining[:-1]
    weights[-1] = max(0.0, 1.0 - weights[:-1].sum())
    return weights / weights.sum()


def theta_grid(n_atoms: int, kappa: float, sigma: float = SIGMA) -> np.ndarray:
    """Evenly spaced means kappa*sigma apart, centred at 0."""
    return (np.arange(n_atoms) - (n_atoms - 1) / 2.0) * kappa * sigma


def _distinct_atoms(
    n_atoms: int,
    global_weights: np.ndarray,
    alpha1: float,
    epsilon: float,
    rng: np.random.Generator,
    max_attempts: int,
) -> np.ndarray:
    atoms: List[np.ndarray] = []
    attempts = 0
    while len(atoms) < n_atoms:
        if attempts >= max_attempts:
            raise SynthesisException(
                f"no set of {n_atoms} distributions with pairwise TV > {epsilon} "
                f"found in {max_attempts} attempts"
            )
        attempts += 1
        candidate = hdp_atom(global_weights, alpha1, rng)
        if all(tv_distance(candidate, atom) > epsilon for atom in atoms):
            atoms.append(candidate)
    logger.debug(f"Drew {n_atoms} distinct atoms in {attempts} attempts")
    return np.stack(atoms)


def gen_framework2(
    L: int,
    n_l: int,
    alphas: Tuple[float, float, float],
    kappa: float,
    epsilon: float,
    seed: int,
    sigma: float = SIGMA,
    max_attempts: int = MAX_REJECTION_ATTEMPTS,
) -> SynthTruth:
    """
    Data drawn from a truncated realization of the nHDP itself.

    Groups are clustered by a stick-breaking Q truncated at L atoms. Each
    occupied cluster gets an HDP distribution over n shared atoms, redrawn
    until every pair of them is more than epsilon apart in total variation.
    Occupied high-resolution clusters get evenly spaced means kappa*sigma
    apart and centred at 0. A holdout set is drawn from the same truth.

    Args:
        L: Number of groups
        n_l: Units per group
        alphas: (alpha0, alpha1, alpha2) of the generating process
        kappa: Spacing of the cluster means in units of sigma
        epsilon: Minimum total variation between cluster distributions
        seed: Random seed
        sigma: Within-cluster standard deviation
        max_attempts: Cap on rejected candidate distributions

    Returns:
        The dataset, its truth and the holdout dataset

    Raises:
        SynthesisException: If the rejection cap is reached
    """
    if L < 1 or n_l < 1:
        raise SynthesisException("L and n_l must be at least 1")
    if not kappa > 0:
        raise SynthesisException("kappa must be positive")
    if not 0 < epsilon < 1:
        raise SynthesisException("epsilon must lie in (0, 1)")
    alpha0, alpha1, alpha2 = alphas
    rng = np.random.default_rng(seed)
    n = L * n_l

    q_weights = stick_breaking(alpha2, L, rng) if L > 1 else np.ones(1)
    cluster_of_group = rng.choice(L, size=L, p=q_weights / q_weights.sum())
    occupied = np.unique(cluster_of_group)
    global_weights = stick_breaking(alpha0, n, rng) if n > 1 else np.ones(1)
    atoms = _distinct_atoms(occupied.size, global_weights, alpha1, epsilon, rng, max_attempts)
    group_atom = np.searchsorted(occupied, cluster_of_group)

    group_of = np.repeat(np.arange(L), n_l)
    z = np.concatenate([rng.choice(n, size=n_l, p=atoms[a]) for a in group_atom])
    used = np.unique(z)
    grid = theta_grid(used.size, kappa, sigma)
    theta_of_atom = np.zeros(n)
    theta_of_atom[used] = grid
    theta = theta_of_atom[z]
    values = rng.normal(theta, sigma)
    holdout_values = rng.normal(theta, sigma)

    # group means: cluster distribution restricted to occupied atoms, renormalized
    restricted = atoms[:, used]
    mass = restricted.sum(axis=1, keepdims=True)
    restricted = restricted / np.where(mass > 0, mass, 1.0)
    phi = (restricted @ grid)[group_atom]

    logger.info(
        f"Framework 2: {L} groups x {n_l} units, {occupied.size} group clusters, "
        f"{used.size} unit clusters, seed {seed}"
    )
    return SynthTruth(
        dataset=_dataset(values, group_of),
        true_pair=PartitionPair(gamma_l=canonical_labels(cluster_of_group), gamma_h=z),
        true_theta=theta,
        true_phi=phi,
        holdout=_dataset(holdout_values, group_of),
        params={
            "framework": 2,
            "L": L,
            "n_l": n_l,
            "alphas": list(alphas),
            "kappa": kappa,
            "epsilon": epsilon,
            "seed": seed,
            "sigma": sigma,
        },
    )

