"""Split-merge MCMC sampler of the nHDP: kernels, chains and tempering."""

from nhdp.common.logger import config_logger

SERVICE_NAME = "nhdp.sampler"

logger = config_logger(service_name=SERVICE_NAME)
