"""Base class for analyses with checkable preconditions."""

from abc import ABC, abstractmethod
from typing import Generic, TypeVar

from calm_probe.core.config import DEFAULT_SETTINGS, DEFAULT_TOLERANCES, ProbeSettings, Tolerances
from calm_probe.core.exceptions import AnalysisError
from calm_probe.model.bilevel import BilevelModel

T = TypeVar("T")  # Analysis result type


class BaseProbe(ABC, Generic[T]):
    """
    Abstract base class for probes and falsifiers.

    Subclasses report precondition problems from `validate` and do the
    actual work in `analyze`. `run` ties the two together and raises
    `error_type` when validation produced errors.
    """

    error_type: type[AnalysisError] = AnalysisError

    def __init__(
        self,
        model: BilevelModel,
        tol: Tolerances = DEFAULT_TOLERANCES,
        settings: ProbeSettings = DEFAULT_SETTINGS,
    ):
        """
        Initialize the probe.

        Args:
            model: Bilevel model under study.
            tol: Numerical tolerances.
            settings: Sampling defaults.
        """
        self.model = model
        self.tol = tol
        self.settings = settings
        self._validation_errors: list[str] = []
        self._validation_warnings: list[str] = []

    @abstractmethod
    def analyze(self) -> T:
        """Compute the result. Only called after a successful `validate`."""
        pass

    @abstractmethod
    def validate(self) -> tuple[list[str], list[str]]:
        """
        Check preconditions.

        Returns:
            Tuple of (errors, warnings). If errors is non-empty,
            the analysis should not proceed.
        """
        pass

    def run(self) -> T:
        """
        Validate preconditions and run the analysis.

        Raises:
            AnalysisError: Of the subclass's `error_type`, if validation fails.
        """
        errors, warnings = self.validate()
        self._validation_errors = errors
        self._validation_warnings = warnings

        if errors:
            raise self.error_type(f"Validation failed: {'; '.join(errors)}")

        return self.analyze()

    @property
    def warnings(self) -> list[str]:
        """Validation warnings from the last run."""
        return self._validation_warnings
