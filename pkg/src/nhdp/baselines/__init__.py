"""Comparator methods scored with the same metrics as the sampler."""

from nhdp.common.logger import config_logger

SERVICE_NAME = "nhdp.baselines"

logger = config_logger(service_name=SERVICE_NAME)
