"""Tests for the partition metrics, point estimates and posterior summaries."""

import numpy as np
import pytest

from nhdp.common.exceptions import EvaluationException
from nhdp.common.models import Level
from nhdp.evaluation.metrics import (
    compute_psm,
    hierarchical_candidates,
    mean_vi,
    minvi_point_estimate,
    posterior_phi,
    posterior_theta,
    rmse_phi,
    rmse_theta,
    similarity_matrix,
    vi_distance,
)
from nhdp.evaluation.summary import cluster_means, score_against_truth, summarize
from nhdp.state.models import PartitionPair, TwoLevelDataset
from nhdp.synth.models import SynthTruth


@pytest.fixture
def hand_truth():
    """Two groups of two units with exact truth."""
    data = TwoLevelDataset.from_arrays([1.0, 3.0, 10.0, 12.0], [0, 0, 1, 1])
    return SynthTruth(
        dataset=data,
        true_pair=PartitionPair(gamma_l=[0, 1], gamma_h=[0, 0, 1, 1]),
        true_theta=np.array([2.0, 2.0, 11.0, 11.0]),
        true_phi=np.array([2.0, 11.0]),
    )


class TestVi:
    """Tests for the variation of information."""

    def test_values(self):
        """Test hand-computed distances."""
        assert vi_distance([0, 0], [0, 1]) == pytest.approx(np.log(2))
        assert vi_distance([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(2 * np.log(2))
        assert vi_distance([0, 1, 1], [5, 2, 2]) == pytest.approx(0.0, abs=1e-12)
        assert vi_distance([], []) == 0.0

    def test_metric_properties(self, rng):
        """Test symmetry, identity and the triangle inequality on random partitions."""
        for _ in range(1000):
            a, b, c = (rng.integers(0, rng.integers(1, 7), size=12) for _ in range(3))
            assert vi_distance(a, b) == pytest.approx(vi_distance(b, a))
            assert vi_distance(a, a) == pytest.approx(0.0, abs=1e-12)
            assert vi_distance(a, c) <= vi_distance(a, b) + vi_distance(b, c) + 1e-12
            assert vi_distance(a, b) <= 2 * np.log(12) + 1e-12

    def test_length_mismatch(self):
        """Test that partitions must cover the same items."""
        with pytest.raises(EvaluationException):
            vi_distance([0, 1], [0, 1, 2])


class TestPsm:
    """Tests for the posterior similarity matrix."""

    def test_frequencies(self):
        """Test co-clustering frequencies."""
        psm = similarity_matrix(np.array([[0, 0, 1], [0, 1, 1]]))
        expected = np.array([[1.0, 0.5, 0.0], [0.5, 1.0, 0.5], [0.0, 0.5, 1.0]])
        assert psm == pytest.approx(expected)

    def test_compute_psm(self, samples_factory):
        """Test the level selection."""
        samples = samples_factory([[0, 1]] * 2, [[0, 0, 1], [0, 1, 1]])
        psm = compute_psm(samples, Level.LOW)
        assert psm.level is Level.LOW
        assert psm.matrix == pytest.approx(np.eye(2))

    def test_candidates(self):
        """Test the tree cuts."""
        psm = similarity_matrix(np.array([[0, 0, 1, 1], [0, 0, 1, 1], [0, 1, 1, 1]]))
        cuts = hierarchical_candidates(psm, 2)
        assert cuts[0].tolist() == [0, 0, 0, 0]
        assert cuts[1].tolist() == [0, 0, 1, 1]
        assert hierarchical_candidates(np.ones((1, 1)), 3)[0].tolist() == [0]
        with pytest.raises(EvaluationException):
            hierarchical_candidates(psm, 2, method="ward-ish")


class TestMinVi:
    """Tests for the minVI point estimate."""

    def test_majority_partition(self, samples_factory):
        """Test that P, P, Q gives P."""
        p, q = [0, 0, 1, 1], [0, 1, 1, 1]
        samples = samples_factory([[0]] * 3, [p, p, q])
        assert minvi_point_estimate(samples, Level.HIGH).tolist() == p

    def test_single_draw(self, samples_factory):
        """Test that one draw is its own estimate."""
        samples = samples_factory([[0, 1, 1]], [[0, 1, 2]])
        assert minvi_point_estimate(samples, Level.LOW).tolist() == [0, 1, 1]

    def test_tie_prefers_fewer_clusters(self, samples_factory):
        """Test the tie rule on two equally weighted draws."""
        samples = samples_factory([[0]] * 2, [[0, 0], [0, 1]])
        assert minvi_point_estimate(samples, Level.HIGH).tolist() == [0, 0]

    def test_mean_vi(self):
        """Test the mean distance to draws."""
        draws = np.array([[0, 0], [0, 1]])
        assert mean_vi([0, 0], draws) == pytest.approx(np.log(2) / 2)

    def test_no_draws(self, samples_factory):
        """Test that an empty sample is rejected."""
        samples = samples_factory(np.zeros((0, 2)), np.zeros((0, 3)))
        with pytest.raises(EvaluationException):
            minvi_point_estimate(samples, Level.LOW)


class TestPosteriorMeans:
    """Tests for the posterior cluster means and their RMSE."""

    def test_posterior_theta(self, samples_factory):
        """Test the shrunken cluster mean."""
        samples = samples_factory([[0]], [[0, 0, 0]], k0=1.0)
        assert posterior_theta(samples, np.array([1.0, 2.0, 3.0])) == pytest.approx([1.5] * 3)

    def test_posterior_phi(self, samples_factory):
        """Test the averaged group cluster means."""
        samples = samples_factory([[0, 0], [0, 1]], [[0, 0, 0]] * 2)
        phi = posterior_phi(samples, np.array([1.0, 3.0, 8.0]), np.array([0, 0, 1]))
        # draw 1: both groups 5.0; draw 2: 2.0 and 8.0
        assert phi == pytest.approx([3.5, 6.5])

    def test_rmse_at_truth(self, hand_truth, samples_factory):
        """Test zero error when the draws are the truth and k0 is 0."""
        samples = samples_factory([[0, 1]], [[0, 0, 1, 1]], k0=0.0)
        assert rmse_theta(samples, hand_truth) == pytest.approx(0.0)
        assert rmse_phi(samples, hand_truth) == pytest.approx(0.0)

    def test_rmse_value(self, hand_truth, samples_factory):
        """Test a unit error on every unit."""
        samples = samples_factory([[0, 1]], [[0, 1, 2, 3]], k0=0.0)
        assert rmse_theta(samples, hand_truth) == pytest.approx(1.0)


class TestSummary:
    """Tests for the run summary."""

    def test_cluster_means(self):
        """Test broadcasting of cluster means."""
        means = cluster_means(np.array([1.0, 3.0, 10.0]), np.array([0, 0, 1]))
        assert means.tolist() == [2.0, 2.0, 10.0]

    def test_summarize_on_original_scale(self, samples_factory):
        """Test the point estimate and the destandardized means."""
        data = TwoLevelDataset.from_arrays(
            [-1.0, -1.0, 1.0, 1.0], [0, 0, 1, 1], transform=(10.0, 2.0)
        )
        samples = samples_factory([[0, 1]] * 3, [[0, 0, 1, 1]] * 3)
        summary = summarize(samples, data)
        assert summary.point.gamma_h.tolist() == [0, 0, 1, 1]
        assert summary.unit_cluster_mean.tolist() == [8.0, 8.0, 12.0, 12.0]
        assert summary.group_cluster_mean.tolist() == [8.0, 12.0]
        assert summary.metrics["n_draws"] == 3
        assert summary.metrics["mean_vi_h"] == pytest.approx(0.0, abs=1e-12)
        assert summary.metrics["posterior_mean_sigma2"] == 0.5
        assert summary.metrics["acceptance"] == {"0": {"TABLES": 0.5}}

    def test_summarize_dimension_mismatch(self, tiny_dataset, samples_factory):
        """Test draws of another dataset."""
        samples = samples_factory([[0, 1]], [[0, 0, 1, 1]])
        with pytest.raises(EvaluationException):
            summarize(samples, tiny_dataset)

    def test_score_against_truth(self, hand_truth, samples_factory):
        """Test the scores of a perfect point estimate."""
        samples = samples_factory([[0, 1]], [[0, 0, 1, 1]], k0=0.0)
        scores = score_against_truth(samples, hand_truth.true_pair, hand_truth)
        assert scores["vi_l"] == pytest.approx(0.0, abs=1e-12)
        assert scores["vi_h"] == pytest.approx(0.0, abs=1e-12)
        assert scores["rmse_theta"] == pytest.approx(0.0)
        assert scores["true_clusters_h"] == scores["n_clusters_h"] == 2
