"""Common exceptions for the nhdp package."""

from typing import Optional


class NhdpException(Exception):
    """Base exception for all nhdp errors."""

    def __init__(self, message: str, stage: Optional[str] = None):
        self.message = message
        self.stage = stage
        super().__init__(self.message)


class ModelException(NhdpException):
    """Exception raised for invalid hyperparameters or sufficient statistics."""

    pass


class StandardizationException(ModelException):
    """Exception raised when values cannot be standardized."""

    pass


class StateException(NhdpException):
    """Exception raised for an invalid restaurant/table/dish configuration."""

    pass


class EnumerationLimitException(StateException):
    """Exception raised when exhaustive enumeration is requested on too many customers."""

    pass


class SamplerException(NhdpException):
    """Exception raised by the MCMC kernels or the chain driver."""

    pass


class SynthesisException(NhdpException):
    """Exception raised by the synthetic data generators."""

    pass


class EvaluationException(NhdpException):
    """Exception raised for invalid metric inputs."""

    pass


class BaselineException(NhdpException):
    """Exception raised by the multi-level K-means baseline."""

    pass


class DataException(NhdpException):
    """Exception raised when input data cannot be ingested."""

    pass


class ConfigException(NhdpException):
    """Exception raised for missing or inconsistent run configuration."""

    pass
