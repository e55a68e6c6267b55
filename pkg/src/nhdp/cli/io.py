"""Readers and writers of run artifacts: CSV tables, label archives and JSON."""

import hashlib
import json
import zipfile
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pandas as pd

from nhdp import __version__
from nhdp.cli import logger
from nhdp.cli.ingest import dataset_frame, records_to_dataset, read_areal_table
from nhdp.cli.models import RunConfig
from nhdp.common.exceptions import DataException
from nhdp.evaluation.summary import PosteriorSummary, original_scale
from nhdp.sampler.models import PosteriorSamples
from nhdp.state.models import PartitionPair, TwoLevelDataset
from nhdp.synth.models import SynthTruth

DATA_FILE = "data.csv"
HOLDOUT_FILE = "holdout.csv"
TRUTH_UNITS_FILE = "truth_units.csv"
TRUTH_GROUPS_FILE = "truth_groups.csv"
SYNTH_PARAMS_FILE = "synth.json"
DRAWS_FILE = "draws.csv"
LABELS_FILE = "labels.npz"
PARTITION_H_FILE = "partition_h.csv"
PARTITION_L_FILE = "partition_l.csv"
CLUSTER_MEANS_H_FILE = "cluster_means_h.csv"
CLUSTER_MEANS_L_FILE = "cluster_means_l.csv"
METRICS_FILE = "metrics.json"
MANIFEST_FILE = "manifest.json"

SAMPLE_ARRAYS = (
    "gamma_l", "gamma_h", "sigma2", "alpha0", "alpha1", "alpha2",
    "log_posterior", "iteration", "chain",
)
ARCHIVE_DATE = (1980, 1, 1, 0, 0, 0)


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str))
    return path


def read_json(path: Path) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise DataException(f"cannot read JSON {path}: {exc}") from exc


def config_hash(config: RunConfig) -> str:
    """sha256 of the canonical JSON form of a run configuration, wherever it writes."""
    canonical = json.dumps(config.model_dump(mode="json", exclude={"output_dir"}), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_manifest(out_dir: Path, config: RunConfig, **extra: Any) -> Path:
    """Record what is needed to reproduce the run: config, its hash, seed and version."""
    payload = {
        "version": __version__,
        "mode": config.mode.value,
        "seed": config.chain.seed,
        "config_hash": config_hash(config),
        "config": config.model_dump(mode="json"),
        **extra,
    }
    return write_json(out_dir / MANIFEST_FILE, payload)


def write_dataset(path: Path, data: TwoLevelDataset) -> Path:
    """Areal table of a dataset on the density scale."""
    path.parent.mkdir(parents=True, exist_ok=True)
    dataset_frame(data, original_scale(data)).to_csv(path, index=False)
    return path


def read_dataset(path: Path, standardize: bool = False) -> TwoLevelDataset:
    return records_to_dataset(read_areal_table(path), standardize)


def write_truth(out_dir: Path, truth: SynthTruth) -> Path:
    """Data, holdout and true partitions of a synthetic dataset."""
    data = truth.dataset
    write_dataset(out_dir / DATA_FILE, data)
    if truth.holdout is not None:
        write_dataset(out_dir / HOLDOUT_FILE, truth.holdout)
    pd.DataFrame(
        {
            "unit_id": list(data.unit_ids),
            "parent_id": [data.group_ids[g] for g in data.group_of],
            "gamma_h": truth.true_pair.gamma_h,
            "theta": truth.true_theta,
        }
    ).to_csv(out_dir / TRUTH_UNITS_FILE, index=False)
    pd.DataFrame(
        {
            "parent_id": list(data.group_ids),
            "gamma_l": truth.true_pair.gamma_l,
            "phi": truth.true_phi,
        }
    ).to_csv(out_dir / TRUTH_GROUPS_FILE, index=False)
    write_json(out_dir / SYNTH_PARAMS_FILE, truth.params)
    return out_dir


def read_truth(in_dir: Path) -> SynthTruth:
    """Inverse of write_truth; the dataset is read unstandardized."""
    in_dir = Path(in_dir)
    data = read_dataset(in_dir / DATA_FILE)
    units = pd.read_csv(in_dir / TRUTH_UNITS_FILE, dtype={"unit_id": str, "parent_id": str})
    groups = pd.read_csv(in_dir / TRUTH_GROUPS_FILE, dtype={"parent_id": str})
    if list(units["unit_id"]) != list(data.unit_ids):
        raise DataException(f"truth units in {in_dir} do not match the data")
    if list(groups["parent_id"]) != list(data.group_ids):
        raise DataException(f"truth groups in {in_dir} do not match the data")
    holdout_path = in_dir / HOLDOUT_FILE
    return SynthTruth(
        dataset=data,
        true_pair=PartitionPair(
            gamma_l=groups["gamma_l"].to_numpy(), gamma_h=units["gamma_h"].to_numpy()
        ),
        true_theta=units["theta"].to_numpy(dtype=float),
        true_phi=groups["phi"].to_numpy(dtype=float),
        holdout=read_dataset(holdout_path) if holdout_path.exists() else None,
        params=read_json(in_dir / SYNTH_PARAMS_FILE),
    )


def write_archive(path: Path, arrays: Dict[str, np.ndarray]) -> Path:
    """
    Compressed .npz archive readable by np.load.

    Entries carry a fixed timestamp so equal arrays give byte-identical files.
    """
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as archive:
        for name, array in arrays.items():
            info = zipfile.ZipInfo(f"{name}.npy", date_time=ARCHIVE_DATE)
            info.compress_type = zipfile.ZIP_DEFLATED
            with archive.open(info, "w") as entry:
                np.lib.format.write_array(entry, np.asanyarray(array), allow_pickle=False)
    return path


def write_samples(out_dir: Path, samples: PosteriorSamples) -> Path:
    """Label matrices and traces to an archive, scalar traces to draws.csv."""
    out_dir.mkdir(parents=True, exist_ok=True)
    write_archive(
        out_dir / LABELS_FILE,
        {"k0": np.array(samples.k0), **{name: getattr(samples, name) for name in SAMPLE_ARRAYS}},
    )
    pd.DataFrame(
        {
            "draw": np.arange(samples.n_draws),
            "chain": samples.chain,
            "iteration": samples.iteration,
            "sigma2": samples.sigma2,
            "alpha0": samples.alpha0,
            "alpha1": samples.alpha1,
            "alpha2": samples.alpha2,
            "log_posterior": samples.log_posterior,
            "n_clusters_l": samples.gamma_l.max(axis=1) + 1,
            "n_clusters_h": samples.gamma_h.max(axis=1) + 1,
        }
    ).to_csv(out_dir / DRAWS_FILE, index=False)
    return out_dir


def read_samples(in_dir: Path) -> PosteriorSamples:
    path = Path(in_dir) / LABELS_FILE
    try:
        with np.load(path) as archive:
            arrays = {name: archive[name] for name in SAMPLE_ARRAYS}
            k0 = float(archive["k0"])
    except (OSError, KeyError, ValueError) as exc:
        raise DataException(f"cannot read draws from {path}: {exc}") from exc
    return PosteriorSamples(**arrays, k0=k0)


def write_partitions(out_dir: Path, data: TwoLevelDataset, pair: PartitionPair) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(
        {
            "unit_id": list(data.unit_ids),
            "parent_id": [data.group_ids[g] for g in data.group_of],
            "cluster": pair.gamma_h,
        }
    ).to_csv(out_dir / PARTITION_H_FILE, index=False)
    pd.DataFrame(
        {"parent_id": list(data.group_ids), "cluster": pair.gamma_l}
    ).to_csv(out_dir / PARTITION_L_FILE, index=False)
    return out_dir


def read_partitions(in_dir: Path) -> PartitionPair:
    in_dir = Path(in_dir)
    high = pd.read_csv(in_dir / PARTITION_H_FILE, dtype={"unit_id": str, "parent_id": str})
    low = pd.read_csv(in_dir / PARTITION_L_FILE, dtype={"parent_id": str})
    return PartitionPair(
        gamma_l=low["cluster"].to_numpy(), gamma_h=high["cluster"].to_numpy()
    )


def write_summary(out_dir: Path, data: TwoLevelDataset, summary: PosteriorSummary) -> Path:
    """Point partitions, choropleth-ready cluster means and metrics of a fitted run."""
    write_partitions(out_dir, data, summary.point)
    pd.DataFrame(
        {
            "unit_id": list(data.unit_ids),
            "cluster": summary.point.gamma_h,
            "cluster_mean": summary.unit_cluster_mean,
        }
    ).to_csv(out_dir / CLUSTER_MEANS_H_FILE, index=False)
    pd.DataFrame(
        {
            "unit_id": list(data.group_ids),
            "cluster": summary.point.gamma_l,
            "cluster_mean": summary.group_cluster_mean,
        }
    ).to_csv(out_dir / CLUSTER_MEANS_L_FILE, index=False)
    write_json(out_dir / METRICS_FILE, summary.metrics)
    logger.info(f"Wrote point estimate and cluster means to {out_dir}")
    return out_dir
