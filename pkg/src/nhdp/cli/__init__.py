"""Command line: ingestion, run orchestration and output files."""

from nhdp.common.logger import config_logger

SERVICE_NAME = "nhdp.cli"

logger = config_logger(service_name=SERVICE_NAME)
