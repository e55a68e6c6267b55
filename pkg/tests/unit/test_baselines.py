"""Tests for the multilevel K-means baseline."""

import numpy as np
import pytest

from nhdp.baselines.kmeans import (
    cluster_proportions,
    default_k_max,
    kmeans_scan,
    multilevel_kmeans,
    point_samples,
    silhouette,
)
from nhdp.common.exceptions import BaselineException
from nhdp.state.models import PartitionPair, TwoLevelDataset


class TestSilhouette:
    """Tests for the silhouette wrapper."""

    def test_separated_clusters(self):
        """Test a clean two-cluster example."""
        score = silhouette(np.array([0.0, 0.1, 10.0, 10.1]), np.array([0, 0, 1, 1]))
        assert score > 0.95

    def test_coincident_points_score_zero(self):
        """Test that identical points in different clusters score 0."""
        assert silhouette(np.ones(4), np.array([0, 0, 1, 1])) == pytest.approx(0.0)

    def test_single_cluster(self):
        """Test that one cluster cannot be scored."""
        with pytest.raises(BaselineException):
            silhouette(np.array([0.0, 1.0, 2.0]), np.zeros(3, dtype=int))

    def test_all_singletons(self):
        """Test that n clusters of n points cannot be scored."""
        with pytest.raises(BaselineException):
            silhouette(np.array([0.0, 1.0, 2.0]), np.arange(3))


class TestKmeansScan:
    """Tests for the silhouette scan over K."""

    def test_chooses_true_k(self, rng):
        """Test that three separated blobs give K = 3."""
        points = np.concatenate([rng.normal(m, 0.1, 20) for m in (-5.0, 0.0, 5.0)])
        result = kmeans_scan(points, k_max=6, seed=0)
        assert result.chosen_k == 3
        assert set(result.silhouette_by_k) == {2, 3, 4, 5, 6}
        assert result.centers.shape == (3, 1)

    def test_caps_k_at_distinct_points(self):
        """Test that K never exceeds the number of distinct points."""
        result = kmeans_scan(np.array([0.0, 0.0, 1.0, 1.0, 5.0, 5.0]), k_max=10, seed=0)
        assert max(result.silhouette_by_k) == 3
        assert result.chosen_k == 3

    def test_fallback_without_scorable_k(self):
        """Test that two points become two clusters."""
        result = kmeans_scan(np.array([0.0, 1.0]), k_max=5, seed=0)
        assert result.labels.tolist() == [0, 1]
        assert result.silhouette_by_k == {}


class TestMultilevelKmeans:
    """Tests for the two-stage baseline."""

    def test_separates_groups(self, medium_dataset):
        """Test that the baseline recovers two separated group clusters."""
        pair = multilevel_kmeans(medium_dataset, seed=0)
        assert set(pair.gamma_l[:3]).isdisjoint(set(pair.gamma_l[3:]))
        assert set(pair.gamma_h[:15]).isdisjoint(set(pair.gamma_h[15:]))

    def test_proportions(self, tiny_dataset):
        """Test that each group's proportions sum to 1."""
        proportions = cluster_proportions(tiny_dataset, np.array([0, 1, 1, 1, 2]))
        assert proportions.sum(axis=1) == pytest.approx(np.ones(3))
        assert proportions[0].tolist() == [0.5, 0.5, 0.0]

    def test_two_units(self):
        """Test the smallest dataset that can be clustered."""
        data = TwoLevelDataset.from_arrays([0.0, 1.0], [0, 1])
        pair = multilevel_kmeans(data)
        assert pair.gamma_h.tolist() == [0, 1]
        assert pair.gamma_l.tolist() == [0, 1]

    def test_invalid(self, tiny_dataset):
        """Test the rejected inputs."""
        with pytest.raises(BaselineException, match="k_max"):
            multilevel_kmeans(tiny_dataset, k_max=1)
        constant = TwoLevelDataset.from_arrays([1.0, 1.0, 1.0], [0, 0, 1])
        with pytest.raises(BaselineException, match="distinct"):
            multilevel_kmeans(constant)

    def test_default_k_max(self):
        """Test the default K range."""
        assert default_k_max(250) == 20
        assert default_k_max(5) == 4
        assert default_k_max(2) == 2

    def test_point_samples(self):
        """Test the one-draw wrapper used for scoring."""
        samples = point_samples(PartitionPair(gamma_l=[0, 1], gamma_h=[0, 0, 1]))
        assert samples.n_draws == 1
        assert samples.k0 == 0.0
        assert samples.gamma_h.tolist() == [[0, 0, 1]]
