"""Entry point of the nhdp command line."""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from nhdp import __version__
from nhdp.cli.exception_handlers import EXIT_USAGE, handle_exception
from nhdp.cli.io import read_json
from nhdp.cli.models import RunConfig, RunMode
from nhdp.cli.runner import run
from nhdp.common.config import NhdpSettings
from nhdp.common.exceptions import ConfigException
from nhdp.common.logger import set_level

# CLI flag -> dotted RunConfig field
OVERRIDES = {
    "input": "input_path",
    "polygons": "polygons_path",
    "run_dir": "run_dir",
    "truth_dir": "truth_dir",
    "output_dir": "output_dir",
    "preset": "preset",
    "linkage": "linkage",
    "k_max": "k_max",
    "baseline_seed": "seed",
    "seed": "chain.seed",
    "n_iter": "chain.n_iter",
    "burn_in": "chain.burn_in",
    "thin": "chain.thin",
    "n_chains": "chain.n_chains",
    "moves": "chain.moves",
    "framework": "synth.framework",
    "n_groups": "synth.L",
    "units_per_group": "synth.n_l",
    "alphas": "synth.alphas",
    "kappa": "synth.kappa",
    "epsilon": "synth.epsilon",
    "seeds": "synth.seeds",
    "alpha2": "prior_check.alpha2",
    "prior_groups": "prior_check.n_groups",
}


class NhdpArgumentParser(argparse.ArgumentParser):
    """Argument parser that exits with the usage code on bad arguments."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_chain_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("sampler")
    group.add_argument("--seed", type=int, help="chain seed")
    group.add_argument("--n-iter", type=int, help="sweeps per chain")
    group.add_argument("--burn-in", type=int, help="discarded sweeps")
    group.add_argument("--thin", type=int, help="keep one sweep in thin")
    group.add_argument("--n-chains", type=int, help="independent chains")
    group.add_argument("--tempering", type=int, metavar="RUNGS", help="tempered rungs")
    group.add_argument("--max-temp", type=float, help="temperature of the hottest rung")
    group.add_argument(
        "--moves", type=lambda s: [m.strip().upper() for m in s.split(",") if m.strip()],
        help="comma separated kernels of a sweep",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = NhdpArgumentParser(
        prog="nhdp", description="Nested HDP clustering of two-level areal data"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, help="JSON run configuration")
    parser.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--output-dir", type=Path, help="where outputs are written")
    subparsers = parser.add_subparsers(dest="mode", required=True)

    ingest = subparsers.add_parser("ingest", help="build an areal table")
    ingest.add_argument("input", type=Path, help="points CSV or areal CSV")
    ingest.add_argument("--polygons", type=Path, help="GeoJSON units to aggregate points into")
    ingest.add_argument("--no-standardize", action="store_true")

    synth = subparsers.add_parser("synth", help="generate synthetic datasets")
    synth.add_argument("--framework", type=int, choices=(1, 2))
    synth.add_argument("--n-groups", type=int, help="low-resolution units")
    synth.add_argument("--units-per-group", type=int, help="high-resolution units per group")
    synth.add_argument("--alphas", type=float, nargs=3, metavar=("A0", "A1", "A2"))
    synth.add_argument("--kappa", type=float)
    synth.add_argument("--epsilon", type=float)
    synth.add_argument("--seeds", type=int, nargs="+")

    fit = subparsers.add_parser("fit", help="run the sampler and summarize")
    fit.add_argument("input", type=Path, help="areal CSV or synth directory")
    fit.add_argument("--preset", choices=("application", "simulation"))
    fit.add_argument("--no-standardize", action="store_true")
    fit.add_argument("--linkage")
    _add_chain_args(fit)

    summarize = subparsers.add_parser("summarize", help="point estimate of a fitted run")
    summarize.add_argument("run_dir", type=Path)
    summarize.add_argument("--linkage")

    evaluate = subparsers.add_parser("eval", help="score fitted runs against truth")
    evaluate.add_argument("run_dir", type=Path)
    evaluate.add_argument("truth_dir", type=Path)
    evaluate.add_argument("--linkage")

    baseline = subparsers.add_parser("baseline", help="multilevel K-means")
    baseline.add_argument("input", type=Path, help="areal CSV or synth directory")
    baseline.add_argument("--truth-dir", type=Path)
    baseline.add_argument("--k-max", type=int)
    baseline.add_argument("--baseline-seed", type=int)
    baseline.add_argument("--no-standardize", action="store_true")

    prior = subparsers.add_parser("prior-check", help="sample the prior of the group partition")
    prior.add_argument("--alpha2", type=float)
    prior.add_argument("--prior-groups", type=int, help="number of groups")
    _add_chain_args(prior)
    return parser


def _set(payload: Dict[str, Any], dotted: str, value: Any) -> None:
    *parents, leaf = dotted.split(".")
    for key in parents:
        payload = payload.setdefault(key, {})
    payload[leaf] = value


def build_config(args: argparse.Namespace) -> RunConfig:
    """
    Merge the JSON config file with the command line; flags win.

    Raises:
        ConfigException: If the config file names another mode
    """
    payload: Dict[str, Any] = read_json(args.config) if args.config else {}
    mode = RunMode(args.mode)
    if payload.get("mode", mode.value) != mode.value:
        raise ConfigException(f"config file is for mode {payload['mode']}, not {mode.value}")
    payload["mode"] = mode.value
    for flag, field in OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            _set(payload, field, value)
    if getattr(args, "no_standardize", False):
        payload["standardize"] = False
    if getattr(args, "tempering", None):
        tempering = {"n_rungs": args.tempering}
        if args.max_temp is not None:
            tempering["max_temp"] = args.max_temp
        _set(payload, "chain.tempering", tempering)
    if mode is RunMode.FIT and "preset" not in payload and args.input.is_dir():
        # synth directories hold simulated data
        payload["preset"] = "simulation"
    return RunConfig.model_validate(payload)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the selected mode and return its exit code."""
    args = build_parser().parse_args(argv)
    settings = NhdpSettings()
    try:
        set_level(args.log_level or settings.log_level)
    except ValueError as exc:
        return handle_exception(ConfigException(str(exc)))
    try:
        config = build_config(args)
    except Exception as exc:
        return handle_exception(exc)
    return run(config, settings)


if __name__ == "__main__":
    sys.exit(main())
