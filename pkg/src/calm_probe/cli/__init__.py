"""Command-line interface for calm-probe."""
