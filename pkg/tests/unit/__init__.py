"""Unit tests, one module per subpackage."""
