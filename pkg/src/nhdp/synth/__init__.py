"""Synthetic two-level datasets with known partitions."""

from nhdp.common.logger import config_logger

SERVICE_NAME = "nhdp.synth"

logger = config_logger(service_name=SERVICE_NAME)
