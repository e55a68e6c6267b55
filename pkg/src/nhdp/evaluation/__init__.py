"""Partition distances, posterior summaries and recovery metrics."""

from nhdp.common.logger import config_logger

SERVICE_NAME = "nhdp.evaluation"

logger = config_logger(service_name=SERVICE_NAME)
