"""Tests for the nhdp package."""
