"""calm-probe: partial calmness diagnostics for bilevel programs with linear lower levels."""

__version__ = "0.1.0"
