from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from nhdp.common.exceptions import SynthesisException
from nhdp.state.models import PartitionPair, TwoLevelDataset


@dataclass(frozen=True, eq=False)
class SynthTruth:
    """A synthetic dataset with its generating partitions and means."""

    dataset: TwoLevelDataset
    true_pair: PartitionPair
    # mean of each unit's cluster
    true_theta: np.ndarray
    # mixture mean of each group
    true_phi: np.ndarray
    holdout: Optional[TwoLevelDataset] = None
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n, n_groups = self.dataset.n_customers, self.dataset.n_groups
        if self.true_pair.gamma_h.size != n or self.true_theta.size != n:
            raise SynthesisException("high-resolution truth does not match the dataset")
        if self.true_pair.gamma_l.size != n_groups or self.true_phi.size != n_groups:
            raise SynthesisException("low-resolution truth does not match the dataset")
