"""Data and latent-state models of the Chinese restaurant franchise."""

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from nhdp.common.exceptions import DataException
from nhdp.common.utils import canonical_labels


@dataclass(frozen=True, eq=False)
class TwoLevelDataset:
    """
    Observations on high-resolution units nested in low-resolution units.

    Customers are high-resolution units, groups are low-resolution units.
    group_of maps each customer to a dense group index 0..L-1.
    """

    values: np.ndarray
    group_of: np.ndarray
    unit_ids: Tuple[str, ...]
    group_ids: Tuple[str, ...]
    areas: Optional[np.ndarray] = None
    counts: Optional[np.ndarray] = None
    # (mean, sd) when values are z-scores of raw densities
    transform: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        group_of = np.asarray(self.group_of, dtype=np.int64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "group_of", group_of)
        if values.ndim != 1 or values.shape != group_of.shape:
            raise DataException("values and group_of must be 1-d of equal length")
        if values.size == 0:
            raise DataException("dataset has no units")
        if not np.all(np.isfinite(values)):
            raise DataException("values must be finite")
        n_groups = len(self.group_ids)
        if group_of.min() < 0 or group_of.max() >= n_groups:
            raise DataException("group_of refers to an unknown group")
        if np.bincount(group_of, minlength=n_groups).min() == 0:
            raise DataException("every group must contain at least one unit")
        if len(self.unit_ids) != values.size:
            raise DataException("unit_ids must have one entry per unit")
        if len(set(self.unit_ids)) != len(self.unit_ids):
            raise DataException("unit_ids must be unique")

    @classmethod
    def from_arrays(
        cls,
        values: Sequence[float],
        groups: Sequence,
        unit_ids: Optional[Sequence[str]] = None,
        **kwargs,
    ) -> "TwoLevelDataset":
        """
        Build a dataset from per-unit values and parent labels.

        Groups are numbered in order of first appearance of their label.
        """
        groups = np.asarray(groups)
        if groups.size == 0:
            raise DataException("dataset has no units")
        group_of = canonical_labels(groups)
        first = np.unique(group_of, return_index=True)[1]
        group_ids = tuple(str(g) for g in groups[first])
        if unit_ids is None:
            unit_ids = [str(i) for i in range(groups.size)]
        return cls(
            values=np.asarray(values, dtype=float),
            group_of=group_of,
            unit_ids=tuple(str(u) for u in unit_ids),
            group_ids=group_ids,
            **kwargs,
        )

    @property
    def n_customers(self) -> int:
        return int(self.values.size)

    @property
    def n_groups(self) -> int:
        return len(self.group_ids)

    @property
    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.group_of, minlength=self.n_groups)


@dataclass(frozen=True, eq=False)
class CrfState:
    """
    Restaurant, table and dish assignments of a Chinese restaurant franchise.

    r maps groups to restaurants, t maps customers to global table ids and
    k maps tables to dishes. group_of is the fixed customer to group map, so
    the restaurant of a table is the restaurant of any of its customers.
    """

    group_of: np.ndarray
    r: np.ndarray
    t: np.ndarray
    k: np.ndarray
    _key: bytes = field(init=False, repr=False, compare=False, default=b"")

    def __post_init__(self):
        for name in ("group_of", "r", "t", "k"):
            object.__setattr__(
                self, name, np.asarray(getattr(self, name), dtype=np.int64)
            )

    @classmethod
    def all_merged(cls, group_of: np.ndarray) -> "CrfState":
        """One restaurant, one table and one dish holding everything."""
        group_of = np.asarray(group_of, dtype=np.int64)
        n_groups = int(group_of.max()) + 1
        return cls(
            group_of=group_of,
            r=np.zeros(n_groups, dtype=np.int64),
            t=np.zeros(group_of.size, dtype=np.int64),
            k=np.zeros(1, dtype=np.int64),
        )

    @classmethod
    def all_split(cls, group_of: np.ndarray) -> "CrfState":
        """Every group its own restaurant, every customer its own table and dish."""
        group_of = np.asarray(group_of, dtype=np.int64)
        n_groups = int(group_of.max()) + 1
        return cls(
            group_of=group_of,
            r=np.arange(n_groups),
            t=np.arange(group_of.size),
            k=np.arange(group_of.size),
        )

    @property
    def n_groups(self) -> int:
        return int(self.r.size)

    @property
    def n_customers(self) -> int:
        return int(self.t.size)

    @property
    def n_tables(self) -> int:
        return int(self.k.size)

    @property
    def n_dishes(self) -> int:
        return int(np.unique(self.k).size)

    @property
    def n_restaurants(self) -> int:
        return int(np.unique(self.r).size)

    @property
    def customer_dish(self) -> np.ndarray:
        return self.k[self.t]

    @property
    def customer_restaurant(self) -> np.ndarray:
        return self.r[self.group_of]

    @property
    def table_sizes(self) -> np.ndarray:
        return np.bincount(self.t, minlength=self.n_tables)

    @property
    def table_restaurant(self) -> np.ndarray:
        """Restaurant of each table, read off its first customer."""
        tables, first = np.unique(self.t, return_index=True)
        out = np.full(self.n_tables, -1, dtype=np.int64)
        out[tables] = self.customer_restaurant[first]
        return out

    def canonical(self) -> "CrfState":
        """Relabel restaurants, tables and dishes by first appearance."""
        r = canonical_labels(self.r)
        t = canonical_labels(self.t)
        # old table id of each new table id
        old_of_new = np.empty(int(t.max()) + 1 if t.size else 0, dtype=np.int64)
        old_of_new[t] = self.t
        k = canonical_labels(self.k[old_of_new])
        return CrfState(group_of=self.group_of, r=r, t=t, k=k)

    def key(self) -> bytes:
        """Hashable identity of the canonical labeling."""
        if not self._key:
            c = self.canonical()
            object.__setattr__(
                self, "_key", b"|".join(a.tobytes() for a in (c.r, c.t, c.k))
            )
        return self._key

    def same_partitions(self, other: "CrfState") -> bool:
        return self.key() == other.key()


@dataclass(frozen=True, eq=False)
class PartitionPair:
    """Flat low- and high-resolution partitions induced by a CrfState."""

    gamma_l: np.ndarray
    gamma_h: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gamma_l", canonical_labels(self.gamma_l))
        object.__setattr__(self, "gamma_h", canonical_labels(self.gamma_h))

    def key(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        return (tuple(self.gamma_l.tolist()), tuple(self.gamma_h.tolist()))

    @property
    def n_clusters_l(self) -> int:
        return int(self.gamma_l.max()) + 1 if self.gamma_l.size else 0

    @property
    def n_clusters_h(self) -> int:
        return int(self.gamma_h.max()) + 1 if self.gamma_h.size else 0
