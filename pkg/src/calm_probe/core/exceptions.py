"""Custom exceptions for calm-probe."""


class CalmProbeError(Exception):
    """Base exception for calm-probe errors."""

    pass


class ConfigError(CalmProbeError):
    """Raised for invalid tolerance overrides or run settings."""

    pass


class LpError(CalmProbeError):
    """Error raised by the dense LP kernel."""

    pass


class DimensionMismatchError(LpError):
    """Raised when matrix, vector and variable counts disagree."""

    pass


class NumericalBreakdownError(LpError):
    """Raised when pivoting cannot continue at the configured tolerances."""

    pass


class CombinatorialBlowupError(LpError):
    """Raised when vertex or subset enumeration would exceed its cap."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"Enumeration needs {count} candidates, cap is {cap}")


class ModelError(CalmProbeError):
    """Error related to model files and bilevel model data."""

    pass


class ModelSyntaxError(ModelError):
    """Raised when a model file or polynomial does not follow the grammar."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class DimensionError(ModelError):
    """Raised when model dimensions are missing or inconsistent."""

    pass


class NonPolynomialExpressionError(ModelError):
    """Raised when an expression leaves the polynomial fragment."""

    pass


class FormNotSupportedError(ModelError):
    """Raised when an operation needs a lower-level form the model does not have."""

    pass


class UnknownBuiltinError(ModelError):
    """Raised when a builtin model name cannot be found."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unknown builtin model: {name}")


class AnalysisError(CalmProbeError):
    """Error during a value-function, certificate or falsifier analysis."""

    pass


class PhiNotFiniteError(AnalysisError):
    """Raised when the lower-level optimal value is +inf or -inf where a finite one is needed."""

    pass


class CenterNotOptimalError(AnalysisError):
    """Raised when a probe center does not lie in the graph of the solution map."""

    pass


class AllSamplesSkippedError(AnalysisError):
    """Raised when no usable sample survives filtering."""

    pass


class PathInfeasibleEverywhereError(AnalysisError):
    """Raised when a witness path is infeasible at every scheduled t."""

    pass


class ReportError(CalmProbeError):
    """Raised for missing or corrupt report files."""

    pass
