"""Oracle and end-to-end tests, marked slow."""
