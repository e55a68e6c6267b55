"""Common utilities and models shared by every nhdp subpackage."""
