"""Tests for calm-probe."""
