"""Execution of one command line run, mode by mode."""

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from nhdp.baselines.kmeans import multilevel_kmeans, point_samples
from nhdp.cli import logger
from nhdp.cli.exception_handlers import EXIT_OK, handle_exception
from nhdp.cli.geo import aggregate_points
from nhdp.cli.ingest import ingest_table, read_areal_table, records_frame, records_to_dataset
from nhdp.cli.io import (
    DATA_FILE,
    MANIFEST_FILE,
    METRICS_FILE,
    PARTITION_H_FILE,
    SYNTH_PARAMS_FILE,
    read_dataset,
    read_json,
    read_partitions,
    read_samples,
    read_truth,
    write_dataset,
    write_json,
    write_manifest,
    write_partitions,
    write_samples,
    write_summary,
    write_truth,
)
from nhdp.cli.models import RunConfig, RunMode
from nhdp.common.config import NhdpSettings
from nhdp.common.exceptions import ConfigException
from nhdp.common.logger import log_stage
from nhdp.common.models import Concentration, HyperparamPreset, Hyperparams, preset_hyperparams
from nhdp.common.utils import canonical_labels, iter_set_partitions
from nhdp.evaluation.summary import score_against_truth, summarize
from nhdp.model.priors import log_crp_partition
from nhdp.sampler.chain import build_sweep, describe_sweep, run_chains
from nhdp.sampler.models import ChainConfig, PosteriorSamples
from nhdp.state.models import TwoLevelDataset
from nhdp.synth.frameworks import gen_framework1, gen_framework2

AREAL_FILE = "areal.csv"
EVAL_FILE = "eval.json"
PRIOR_CHECK_FILE = "prior_check.json"
SEED_DIR_PREFIX = "seed-"

ModeRunner = Callable[[RunConfig, NhdpSettings, Path], Dict[str, Any]]


def synth_params(data_path: Path) -> Optional[Dict[str, Any]]:
    """Generating parameters stored beside a synth dataset, None for real data."""
    path = Path(data_path).parent / SYNTH_PARAMS_FILE
    return read_json(path) if path.exists() else None


def resolve_standardize(config: RunConfig, params: Optional[Dict[str, Any]]) -> bool:
    """Explicit setting, else standardize real data only."""
    if config.standardize is not None:
        return config.standardize
    return params is None


def resolve_hyperparams(
    config: RunConfig, params: Optional[Dict[str, Any]] = None
) -> Hyperparams:
    """
    Explicit hyperparameters, else the preset.

    A simulation fit of a framework 2 dataset uses the generating alphas.
    """
    if config.hyperparams is not None:
        return config.hyperparams
    hp = preset_hyperparams(config.preset)
    if (
        params is not None
        and params.get("framework") == 2
        and config.preset is HyperparamPreset.SIMULATION
    ):
        for which, value in zip(Concentration, params["alphas"]):
            hp = hp.with_alpha(which, value)
    return hp


def resolve_chain(config: RunConfig, settings: NhdpSettings) -> ChainConfig:
    """The configured chain, taking the kernel list from settings unless set explicitly."""
    chain = config.chain
    if "moves" not in chain.model_fields_set:
        chain = chain.model_copy(update={"moves": list(settings.moves)})
    return chain


def seed_dirs(path: Path) -> List[Path]:
    """Per-seed subdirectories written by a multi-seed synth run, sorted by name."""
    if not path.is_dir():
        return []
    return sorted(p for p in path.iterdir() if p.is_dir() and p.name.startswith(SEED_DIR_PREFIX))


def _fit_one(
    config: RunConfig, settings: NhdpSettings, data_path: Path, out_dir: Path
) -> Dict[str, Any]:
    params = synth_params(data_path)
    standardize = resolve_standardize(config, params)
    with log_stage(logger, f"ingest {data_path}"):
        data = ingest_table(data_path, standardize)
    hp = resolve_hyperparams(config, params)
    chain = resolve_chain(config, settings)
    sweep = describe_sweep(build_sweep(data, hp, chain))
    logger.info(f"Sweep: {sweep}")

    with log_stage(logger, "sample"):
        samples = PosteriorSamples.pool(
            run_chains(data, hp, chain, n_workers=settings.n_workers)
        )
    with log_stage(logger, "write draws"):
        write_dataset(out_dir / DATA_FILE, data)
        write_samples(out_dir, samples)
    with log_stage(logger, "summarize"):
        summary = summarize(samples, data, config.linkage)
        write_summary(out_dir, data, summary)
    resolved = config.model_copy(
        update={"chain": chain, "hyperparams": hp, "standardize": standardize}
    )
    write_manifest(
        out_dir,
        resolved,
        sweep=sweep,
        transform=list(data.transform) if data.transform else None,
        acceptance={str(c): r for c, r in samples.acceptance.items()},
    )
    return summary.metrics


def run_fit(config: RunConfig, settings: NhdpSettings, out_dir: Path) -> Dict[str, Any]:
    """Fit one dataset, or every seed-* dataset of a synth directory."""
    seeds = seed_dirs(config.input_path)
    if seeds:
        return {s.name: _fit_one(config, settings, s / DATA_FILE, out_dir / s.name) for s in seeds}
    data_path = config.input_path
    if data_path.is_dir():
        data_path = data_path / DATA_FILE
    return _fit_one(config, settings, data_path, out_dir)


def run_summarize(config: RunConfig, settings: NhdpSettings, out_dir: Path) -> Dict[str, Any]:
    """Recompute the point estimate of a fitted run, e.g. with another linkage."""
    manifest = read_json(config.run_dir / MANIFEST_FILE)
    standardize = manifest.get("config", {}).get("standardize")
    if standardize is None:
        standardize = resolve_standardize(config, None)
    with log_stage(logger, "load run"):
        data = read_dataset(config.run_dir / DATA_FILE, standardize)
        samples = read_samples(config.run_dir)
    with log_stage(logger, "summarize"):
        summary = summarize(samples, data, config.linkage)
        write_summary(out_dir, data, summary)
    return summary.metrics


def _score(run_dir: Path, truth_dir: Path, linkage: str) -> Dict[str, Any]:
    truth = read_truth(truth_dir)
    samples = read_samples(run_dir)
    if (run_dir / PARTITION_H_FILE).exists():
        point = read_partitions(run_dir)
    else:
        point = summarize(samples, truth.dataset, linkage).point
    return score_against_truth(samples, point, truth)


def _medians(scores: Dict[str, Dict[str, Any]]) -> Dict[str, float]:
    keys = next(iter(scores.values())).keys()
    return {k: float(np.median([s[k] for s in scores.values()])) for k in keys}


def run_eval(config: RunConfig, settings: NhdpSettings, out_dir: Path) -> Dict[str, Any]:
    """Score fitted runs against synthetic truth, per seed when both are seed directories."""
    runs = {d.name: d for d in seed_dirs(config.run_dir)}
    truths = {d.name: d for d in seed_dirs(config.truth_dir)}
    with log_stage(logger, "evaluate"):
        if runs or truths:
            if set(runs) != set(truths):
                raise ConfigException(
                    f"seed directories differ: runs {sorted(runs)}, truths {sorted(truths)}"
                )
            scores = {
                name: _score(runs[name], truths[name], config.linkage) for name in sorted(runs)
            }
            result: Dict[str, Any] = {"runs": scores, "median": _medians(scores)}
        else:
            result = _score(config.run_dir, config.truth_dir, config.linkage)
    write_json(out_dir / EVAL_FILE, result)
    return result


def run_synth(config: RunConfig, settings: NhdpSettings, out_dir: Path) -> Dict[str, Any]:
    """Generate one dataset per seed, in seed-* subdirectories when there are several."""
    synth = config.synth
    written = {}
    for seed in synth.seeds:
        with log_stage(logger, f"synth framework {synth.framework} seed {seed}"):
            if synth.framework == 1:
                truth = gen_framework1(synth.L, synth.n_l, seed)
            else:
                truth = gen_framework2(
                    synth.L, synth.n_l, synth.alphas, synth.kappa, synth.epsilon, seed
                )
            target = out_dir if len(synth.seeds) == 1 else out_dir / f"{SEED_DIR_PREFIX}{seed}"
            write_truth(target, truth)
            written[str(seed)] = {
                "path": str(target),
                "n_units": truth.dataset.n_customers,
                "n_groups": truth.dataset.n_groups,
            }
    write_manifest(out_dir, config, datasets=written)
    return written


def run_baseline(config: RunConfig, settings: NhdpSettings, out_dir: Path) -> Dict[str, Any]:
    """Multilevel K-means, scored against truth_dir when given."""
    data_path = config.input_path
    if data_path.is_dir():
        data_path = data_path / DATA_FILE
    standardize = resolve_standardize(config, synth_params(data_path))
    with log_stage(logger, "ingest"):
        data = ingest_table(data_path, standardize)
    with log_stage(logger, "kmeans"):
        pair = multilevel_kmeans(data, config.k_max, config.seed)
        write_partitions(out_dir, data, pair)
    metrics: Dict[str, Any] = {
        "n_clusters_l": pair.n_clusters_l,
        "n_clusters_h": pair.n_clusters_h,
    }
    if config.truth_dir is not None:
        with log_stage(logger, "evaluate"):
            truth = read_truth(config.truth_dir)
            metrics.update(score_against_truth(point_samples(pair), pair, truth))
    write_json(out_dir / METRICS_FILE, metrics)
    return metrics


def run_ingest(config: RunConfig, settings: NhdpSettings, out_dir: Path) -> Dict[str, Any]:
    """Aggregate points into units when polygons are given, else validate an areal table."""
    with log_stage(logger, "ingest"):
        if config.polygons_path is not None:
            records = aggregate_points(config.input_path, config.polygons_path)
        else:
            records = read_areal_table(config.input_path)
        data = records_to_dataset(records, resolve_standardize(config, None))
    out_dir.mkdir(parents=True, exist_ok=True)
    records_frame(records).to_csv(out_dir / AREAL_FILE, index=False)
    write_manifest(out_dir, config, transform=list(data.transform) if data.transform else None)
    return {"n_units": data.n_customers, "n_groups": data.n_groups}


def crp_partition_probs(n: int, alpha: float) -> Dict[tuple, float]:
    """Probability of every partition of n items under CRP(alpha)."""
    return {
        tuple(labels): float(np.exp(log_crp_partition(np.bincount(labels), alpha)))
        for labels in iter_set_partitions(n)
    }


def run_prior_check(config: RunConfig, settings: NhdpSettings, out_dir: Path) -> Dict[str, Any]:
    """
    Sample the prior and compare the group partition with CRP(alpha2).

    Reports the co-clustering frequency of the first two groups against
    1/(1 + alpha2) and the total variation to CRP(alpha2) over all group
    partitions.
    """
    check = config.prior_check
    groups = np.repeat(np.arange(check.n_groups), check.units_per_group)
    data = TwoLevelDataset.from_arrays(np.zeros(groups.size), groups)
    hp = preset_hyperparams(HyperparamPreset.PRIOR_CHECK).with_alpha(
        Concentration.ALPHA2, check.alpha2
    )
    chain = resolve_chain(config, settings).model_copy(
        update={"prior_only": True, "tempering": None}
    )
    with log_stage(logger, "sample prior"):
        samples = PosteriorSamples.pool(
            run_chains(data, hp, chain, n_workers=settings.n_workers)
        )

    frequency = float(np.mean(samples.gamma_l[:, 0] == samples.gamma_l[:, 1]))
    target = 1.0 / (1.0 + check.alpha2)
    exact = crp_partition_probs(check.n_groups, check.alpha2)
    empirical = dict.fromkeys(exact, 0.0)
    for labels in samples.gamma_l:
        empirical[tuple(canonical_labels(labels).tolist())] += 1.0 / samples.n_draws
    tv = 0.5 * sum(abs(empirical[k] - exact[k]) for k in exact)
    result = {
        "co_clustering_frequency": frequency,
        "target": target,
        "tv_to_crp": tv,
        "n_draws": samples.n_draws,
        "alpha2": check.alpha2,
    }
    logger.info(
        f"Co-clustering frequency {frequency:.4f}, target 1/(1+alpha2) = {target:.4f}, "
        f"TV to CRP(alpha2) = {tv:.4f}"
    )
    write_json(out_dir / PRIOR_CHECK_FILE, result)
    return result


MODE_REGISTRY: Dict[RunMode, ModeRunner] = {
    RunMode.INGEST: run_ingest,
    RunMode.SYNTH: run_synth,
    RunMode.FIT: run_fit,
    RunMode.SUMMARIZE: run_summarize,
    RunMode.EVAL: run_eval,
    RunMode.BASELINE: run_baseline,
    RunMode.PRIOR_CHECK: run_prior_check,
}


def output_dir_for(config: RunConfig, settings: NhdpSettings) -> Path:
    if config.output_dir is not None:
        return config.output_dir
    if config.mode is RunMode.SUMMARIZE:
        return config.run_dir
    return settings.output_dir


def run(config: RunConfig, settings: Optional[NhdpSettings] = None) -> int:
    """
    Execute one run and return its exit status.

    Args:
        config: Validated run configuration
        settings: Process settings, read from the environment when omitted

    Returns:
        0 on success, otherwise the code of the handler of the raised error
    """
    settings = settings or NhdpSettings()
    out_dir = output_dir_for(config, settings)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        MODE_REGISTRY[config.mode](config, settings, out_dir)
    except Exception as exc:
        return handle_exception(exc)
    logger.info(f"Mode {config.mode.value} finished, outputs in {out_dir}")
    return EXIT_OK
