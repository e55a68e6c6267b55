"""Validation, induced partitions and restaurant split/merge derivations."""

from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from nhdp.common.exceptions import StateException
from nhdp.state.models import CrfState, PartitionPair, TwoLevelDataset


def _dense_gaps(labels: np.ndarray, size: Optional[int] = None) -> np.ndarray:
    size = int(labels.max()) + 1 if size is None else size
    return np.flatnonzero(np.bincount(labels, minlength=size) == 0)


def validate(state: CrfState, data: Optional[TwoLevelDataset] = None) -> List[str]:
    """
    Check every structural invariant of a franchise state.

    Args:
        state: The state to check
        data: Dataset the state should describe, when available

    Returns:
        A list of human readable violations, empty when the state is valid
    """
    violations: List[str] = []
    if data is not None:
        if state.n_groups != data.n_groups:
            violations.append(
                f"restaurant map covers {state.n_groups} groups, "
                f"dataset has {data.n_groups}"
            )
        if state.n_customers != data.n_customers or not np.array_equal(
            state.group_of, data.group_of
        ):
            violations.append("customer to group map differs from the dataset")
        if violations:
            return violations

    if state.group_of.size != state.n_customers:
        return ["customer to group map has the wrong length"]
    if state.n_customers == 0 or state.n_groups == 0:
        return ["state has no customers"]
    if min(state.r.min(), state.t.min()) < 0 or (state.k.size and state.k.min() < 0):
        return ["negative label"]
    if state.group_of.max() >= state.n_groups:
        return ["customer belongs to a group without a restaurant"]

    for s in _dense_gaps(state.r):
        violations.append(f"empty restaurant (restaurant {s})")

    if state.t.max() >= state.n_tables:
        violations.append("table without dish")
        return violations
    for h in _dense_gaps(state.t, state.n_tables):
        violations.append(f"empty table (table {h})")
    if state.k.size:
        for d in _dense_gaps(state.k):
            violations.append(f"empty dish (dish {d})")

    # tables never span restaurants
    pairs = np.unique(np.stack([state.t, state.customer_restaurant]), axis=1)
    tables, n_restaurants = np.unique(pairs[0], return_counts=True)
    for h in tables[n_restaurants > 1]:
        violations.append(f"table spans restaurants (table {h})")
    return violations


def check_state(state: CrfState, data: Optional[TwoLevelDataset] = None) -> None:
    """Raise StateException when validate reports a violation."""
    violations = validate(state, data)
    if violations:
        raise StateException("invalid state: " + "; ".join(violations))


def induced_partitions(state: CrfState) -> PartitionPair:
    """The low-resolution partition r and the high-resolution partition k o t."""
    check_state(state)
    return PartitionPair(gamma_l=state.r, gamma_h=state.customer_dish)


def derive_restaurant_split(
    state: CrfState, s: int, assignment: Mapping[int, int]
) -> Tuple[CrfState, List[Tuple[int, int]]]:
    """
    Split restaurant s into two, keeping every customer's dish.

    Groups assigned 0 stay in s, groups assigned 1 move to a fresh
    restaurant. A table whose customers land on both sides is cut into two
    sub-tables serving the same dish.

    Args:
        state: Current state
        s: Restaurant to split
        assignment: Side (0 or 1) for every group of restaurant s

    Returns:
        The split state, not canonicalized, and the (kept, new) table id
        pairs of every table that was cut

    Raises:
        StateException: If the assignment does not cover s or leaves a side empty
    """
    groups = np.flatnonzero(state.r == s)
    if groups.size == 0:
        raise StateException(f"restaurant {s} does not exist")
    if set(int(g) for g in assignment) != set(groups.tolist()):
        raise StateException(f"assignment must cover exactly the groups of restaurant {s}")
    group_side = np.full(state.n_groups, -1, dtype=np.int64)
    for g, side in assignment.items():
        if side not in (0, 1):
            raise StateException(f"side of group {g} must be 0 or 1, got {side}")
        group_side[int(g)] = side
    sides = group_side[groups]
    if not (sides == 0).any() or not (sides == 1).any():
        raise StateException("restaurant split leaves one side empty")

    r = state.r.copy()
    r[groups[sides == 1]] = int(state.r.max()) + 1

    customer_side = group_side[state.group_of]
    m = state.n_tables
    on0 = np.bincount(state.t[customer_side == 0], minlength=m) > 0
    on1 = np.bincount(state.t[customer_side == 1], minlength=m) > 0
    cut = np.flatnonzero(on0 & on1)

    t = state.t.copy()
    new_id = np.full(m, -1, dtype=np.int64)
    new_id[cut] = m + np.arange(cut.size)
    moved = (customer_side == 1) & (new_id[state.t] >= 0)
    t[moved] = new_id[state.t[moved]]
    k = np.concatenate([state.k, state.k[cut]])

    pairs = [(int(h), int(new_id[h])) for h in cut]
    return CrfState(group_of=state.group_of, r=r, t=t, k=k), pairs


def apply_restaurant_split(
    state: CrfState, s: int, assignment: Mapping[int, int]
) -> CrfState:
    """Canonical state after splitting restaurant s by assignment."""
    return derive_restaurant_split(state, s, assignment)[0].canonical()


def apply_restaurant_merge(
    state: CrfState,
    s1: int,
    s2: int,
    matching: Sequence[Tuple[int, int]],
    merge_flags: Sequence[bool],
) -> CrfState:
    """
    Merge restaurant s2 into s1, fusing the flagged table pairs.

    Args:
        state: Current state
        s1: Restaurant that absorbs s2
        s2: Restaurant that disappears
        matching: (table of s1, table of s2) pairs
        merge_flags: Whether each matched pair is fused into one table

    Returns:
        The merged state, canonicalized

    Raises:
        StateException: If a pair crosses dishes or restaurants, or a table is reused
    """
    if s1 == s2:
        raise StateException("cannot merge a restaurant with itself")
    if not (state.r == s1).any() or not (state.r == s2).any():
        raise StateException(f"restaurants {s1} and {s2} must both exist")
    if len(matching) != len(merge_flags):
        raise StateException("matching and merge_flags must have equal length")

    table_restaurant = state.table_restaurant
    used = set()
    t = state.t.copy()
    for (a, b), flag in zip(matching, merge_flags):
        if table_restaurant[a] != s1 or table_restaurant[b] != s2:
            raise StateException(f"pair ({a}, {b}) does not span restaurants {s1} x {s2}")
        if state.k[a] != state.k[b]:
            raise StateException(f"pair ({a}, {b}) crosses dishes")
        if a in used or b in used:
            raise StateException(f"table appears in more than one pair: ({a}, {b})")
        used.update((a, b))
        if flag:
            t[state.t == b] = a

    r = state.r.copy()
    r[r == s2] = s1
    return CrfState(group_of=state.group_of, r=r, t=t, k=state.k).canonical()
