"""Conjugate likelihood, partition priors and parameter updates of the nHDP."""

from nhdp.common.logger import config_logger

SERVICE_NAME = "nhdp.model"

logger = config_logger(service_name=SERVICE_NAME)
