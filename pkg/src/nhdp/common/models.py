"""Hyperparameter models shared by the model, sampler and command line."""

import enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy.stats import truncnorm


class Concentration(str, enum.Enum):
    """The three CRP concentration parameters of the nHDP."""

    ALPHA0 = "alpha0"  # dish level
    ALPHA1 = "alpha1"  # table level
    ALPHA2 = "alpha2"  # restaurant level

    @property
    def index(self) -> int:
        return int(self.value[-1])


class Level(str, enum.Enum):
    """Resolution level of a partition."""

    LOW = "L"
    HIGH = "H"


class TruncatedNormalPrior(BaseModel):
    """Normal(mean, sd) truncated to (lower, inf); lower is always 0."""

    model_config = ConfigDict(frozen=True)

    mean: float
    sd: float = Field(gt=0)
    lower: float = 0.0

    @field_validator("lower")
    @classmethod
    def lower_is_zero(cls, v: float) -> float:
        if v != 0.0:
            raise ValueError("truncation bound of a concentration prior must be 0")
        return v

    def _dist(self):
        a = (self.lower - self.mean) / self.sd
        return truncnorm(a, np.inf, loc=self.mean, scale=self.sd)

    def logpdf(self, x: float) -> float:
        return float(self._dist().logpdf(x))

    def mean_value(self) -> float:
        return float(self._dist().mean())


class InvGammaPrior(BaseModel):
    """Inv-Gamma(beta0, beta1) prior on sigma2, shape/scale parameterization."""

    model_config = ConfigDict(frozen=True)

    beta0: float = Field(gt=0)
    beta1: float = Field(gt=0)

    @classmethod
    def from_moments(cls, mean: float, var: float) -> "InvGammaPrior":
        """
        Match an Inv-Gamma prior to a prior mean and variance.

        Args:
            mean: Prior mean of sigma2
            var: Prior variance of sigma2

        Returns:
            The prior with mean = beta1/(beta0-1) and var = mean^2/(beta0-2)
        """
        if mean <= 0 or var <= 0:
            raise ValueError("mean and variance must be positive")
        beta0 = mean**2 / var + 2.0
        return cls(beta0=beta0, beta1=mean * (beta0 - 1.0))

    @property
    def mean(self) -> float:
        return self.beta1 / (self.beta0 - 1.0) if self.beta0 > 1 else float("inf")


class Hyperparams(BaseModel):
    """
    Concentrations, variance and base-measure precision of the nHDP mixture.

    alpha0 is the dish-level concentration, alpha1 the table-level one and
    alpha2 the restaurant-level one. A parameter with a prior is updated by
    the sampler, one without is held fixed.
    """

    model_config = ConfigDict(frozen=True)

    alpha0: float = Field(default=1.0, gt=0)
    alpha1: float = Field(default=1.0, gt=0)
    alpha2: float = Field(default=1.0, gt=0)
    alpha_prior: Optional[
        Tuple[
            Optional[TruncatedNormalPrior],
            Optional[TruncatedNormalPrior],
            Optional[TruncatedNormalPrior],
        ]
    ] = None
    sigma2: float = Field(default=1.0, gt=0)
    sigma2_prior: Optional[InvGammaPrior] = None
    k0: float = Field(default=1.0, gt=0)

    def alpha(self, which: Concentration) -> float:
        return getattr(self, Concentration(which).value)

    def prior_for(self, which: Concentration) -> Optional[TruncatedNormalPrior]:
        if self.alpha_prior is None:
            return None
        return self.alpha_prior[Concentration(which).index]

    def with_alpha(self, which: Concentration, value: float) -> "Hyperparams":
        return self.model_copy(update={Concentration(which).value: float(value)})

    def with_sigma2(self, value: float) -> "Hyperparams":
        return self.model_copy(update={"sigma2": float(value)})

    @property
    def alphas(self) -> Tuple[float, float, float]:
        return (self.alpha0, self.alpha1, self.alpha2)

    @property
    def free_alphas(self) -> Tuple[Concentration, ...]:
        return tuple(c for c in Concentration if self.prior_for(c) is not None)


class HyperparamPreset(str, enum.Enum):
    """Named hyperparameter regimes."""

    APPLICATION = "application"
    SIMULATION = "simulation"
    PRIOR_CHECK = "prior-check"


def preset_hyperparams(preset: HyperparamPreset) -> Hyperparams:
    """
    Build the hyperparameters of a named regime.

    application: sigma2 ~ Inv-Gamma matched to mean 0.25 and sd 0.1 (8.25, 1.8125),
    k0 = 0.1 and every alpha ~ TN(2, 1) truncated at 0.
    simulation and prior-check: sigma2 ~ Inv-Gamma(5, 1), k0 = 0.01 and
    fixed alphas (1, 0.5, 1). prior-check differs only in the chain config,
    which disables the likelihood.
    """
    preset = HyperparamPreset(preset)
    if preset is HyperparamPreset.APPLICATION:
        alpha_prior = TruncatedNormalPrior(mean=2.0, sd=1.0)
        return Hyperparams(
            alpha0=2.0,
            alpha1=2.0,
            alpha2=2.0,
            alpha_prior=(alpha_prior, alpha_prior, alpha_prior),
            sigma2=0.25,
            sigma2_prior=InvGammaPrior.from_moments(mean=0.25, var=0.01),
            k0=0.1,
        )
    return Hyperparams(
        alpha0=1.0,
        alpha1=0.5,
        alpha2=1.0,
        sigma2=0.25,
        sigma2_prior=InvGammaPrior(beta0=5.0, beta1=1.0),
        k0=0.01,
    )
