"""Chinese restaurant franchise state: datasets, latent assignments and operations."""

from nhdp.common.logger import config_logger

SERVICE_NAME = "nhdp.state"

logger = config_logger(service_name=SERVICE_NAME)
