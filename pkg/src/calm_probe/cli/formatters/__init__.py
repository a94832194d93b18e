"""Rich renderers for calm-probe reports."""

from calm_probe.cli.formatters.certificate import CertificateRenderer
from calm_probe.cli.formatters.report import ReportRenderer
from calm_probe.cli.formatters.verdict import VerdictRenderer

__all__ = ["CertificateRenderer", "ReportRenderer", "VerdictRenderer"]
