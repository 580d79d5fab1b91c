"""
Error types shared across the lab.

Everything derives from LabError so callers can catch one family; LabError
is a ValueError because nearly every failure here is a bad input.
"""


class LabError(ValueError):
    """Base class for all lab errors."""


class DegenerateInputError(LabError):
    """Raised when an input has (near-)zero norm or lies outside an op's domain."""


class ShapeError(LabError):
    """Raised when operand shapes are inconsistent."""


class UnboundParameterError(LabError):
    """Raised when a graph is evaluated without a value for one of its parameters."""


class ConfigError(LabError):
    """Raised for configurations that validate field-by-field but cannot be honoured."""


class CohortFormatError(LabError):
    """Raised when a cohort file cannot be parsed."""

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class CheckpointFormatError(LabError):
    """Raised when a checkpoint file cannot be parsed."""


class IncompatibleInputsError(LabError):
    """Raised when a checkpoint and a cohort disagree on dimensions."""


class NumericalAbortError(LabError):
    """Raised when training produces a non-finite loss or gradient."""

    def __init__(self, step, parameter_norms):
        self.step = step
        self.parameter_norms = dict(parameter_norms)
        super().__init__(f"Non-finite loss or gradient at step {step}")

    def payload(self):
        """Diagnostic payload for the command-line report."""
        return {"step": self.step, "parameter_norms": self.parameter_norms}
