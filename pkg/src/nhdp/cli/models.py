"""Models specific to the command line."""

import enum
import math
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from nhdp.common.models import HyperparamPreset, Hyperparams
from nhdp.sampler.models import ChainConfig

DENSITY_TOL = 1e-9


class RunMode(str, enum.Enum):
    """Subcommands of the nhdp command line."""

    INGEST = "ingest"
    SYNTH = "synth"
    FIT = "fit"
    SUMMARIZE = "summarize"
    EVAL = "eval"
    BASELINE = "baseline"
    PRIOR_CHECK = "prior-check"


class ArealRecord(BaseModel):
    """One high-resolution areal unit with its density."""

    unit_id: str
    parent_id: str
    # events per year
    count: Optional[float] = Field(default=None, ge=0)
    # km^2
    area: Optional[float] = Field(default=None, gt=0)
    density: Optional[float] = None

    @model_validator(mode="after")
    def check_density(self) -> "ArealRecord":
        if self.count is not None and self.area is not None:
            density = self.count / self.area
            if self.density is None:
                self.density = density
            elif not math.isclose(self.density, density, rel_tol=DENSITY_TOL, abs_tol=DENSITY_TOL):
                raise ValueError(
                    f"density of {self.unit_id} is {self.density}, count/area is {density}"
                )
        if self.density is None:
            raise ValueError(f"unit {self.unit_id} needs a density or a count and an area")
        if not math.isfinite(self.density):
            raise ValueError(f"density of {self.unit_id} is not finite")
        return self


class SynthConfig(BaseModel):
    """Parameters of the synthetic frameworks."""

    framework: Literal[1, 2] = 1
    L: int = Field(default=25, ge=1)
    n_l: int = Field(default=10, ge=1)
    alphas: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    kappa: float = Field(default=5.0, gt=0)
    epsilon: float = Field(default=0.8, gt=0, lt=1)
    seeds: List[int] = [0]


class PriorCheckConfig(BaseModel):
    """Size of the prior-only run that checks the group co-clustering rate."""

    n_groups: int = Field(default=2, ge=2)
    units_per_group: int = Field(default=1, ge=1)
    alpha2: float = Field(default=1.0, gt=0)


class RunConfig(BaseModel):
    """
    Everything one invocation of the command line needs.

    Paths are checked for existence; every mode requires its own inputs.
    """

    mode: RunMode
    input_path: Optional[Path] = None
    polygons_path: Optional[Path] = None
    run_dir: Optional[Path] = None
    truth_dir: Optional[Path] = None
    output_dir: Optional[Path] = None
    preset: HyperparamPreset = HyperparamPreset.APPLICATION
    hyperparams: Optional[Hyperparams] = None
    chain: ChainConfig = ChainConfig()
    # None: standardize real data, keep synth datasets on their generating scale
    standardize: Optional[bool] = None
    synth: SynthConfig = SynthConfig()
    prior_check: PriorCheckConfig = PriorCheckConfig()
    linkage: str = "average"
    k_max: Optional[int] = Field(default=None, ge=2)
    seed: int = 0

    @model_validator(mode="after")
    def check_inputs(self) -> "RunConfig":
        required = {
            RunMode.INGEST: ("input_path",),
            RunMode.FIT: ("input_path",),
            RunMode.BASELINE: ("input_path",),
            RunMode.SUMMARIZE: ("run_dir",),
            RunMode.EVAL: ("run_dir", "truth_dir"),
        }.get(self.mode, ())
        for name in required:
            if getattr(self, name) is None:
                raise ValueError(f"{self.mode.value} needs {name}")
        for name in ("input_path", "polygons_path", "run_dir", "truth_dir"):
            path = getattr(self, name)
            if path is not None and not path.exists():
                raise ValueError(f"{name} does not exist: {path}")
        return self
