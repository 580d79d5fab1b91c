"""
Gradient Check - central finite differences against the reverse-mode engine
"""

import numpy as np

from config import FD_REL_ERROR_FLOOR, FD_STEP
from src.numeric.autodiff import GradReport, Tape


def relative_error(analytic, numeric, floor=FD_REL_ERROR_FLOOR):
    """|a - n| / max(floor, |a| + |n|)."""
    return abs(analytic - numeric) / max(floor, abs(analytic) + abs(numeric))


def validate_gradients(expr, bindings, step=FD_STEP, floor=FD_REL_ERROR_FLOOR):
    """
    Compare reverse-mode gradients with central differences on every coordinate.

    Numeric derivatives use the five-point stencil
    (8 (f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h.

    Args:
        expr (Node): Scalar expression
        bindings (dict): Parameter identifier -> array
        step (float): Finite-difference step, must be positive
        floor (float): Denominator floor of the relative error

    Returns:
        GradReport: Analytic gradients, numeric gradients and the worst coordinate
    """
    if step <= 0:
        raise ValueError(f"Finite-difference step must be positive, got {step}")

    tape = Tape(expr)
    base = {name: np.array(value, dtype=np.float64) for name, value in bindings.items()}
    tape.forward(base)
    analytic = tape.backward()

    def shifted(name, index, original, offset):
        base[name][index] = original + offset
        return tape.forward(base)

    report = GradReport(gradients=analytic, max_relative_error=0.0)
    for name in tape.parameter_names():
        numeric = np.zeros_like(analytic[name])
        for index in np.ndindex(*numeric.shape):
            original = base[name][index]
            near = shifted(name, index, original, step) - shifted(name, index, original, -step)
            far = shifted(name, index, original, 2.0 * step) - shifted(name, index, original, -2.0 * step)
            base[name][index] = original
            numeric[index] = (8.0 * near - far) / (12.0 * step)

            error = relative_error(float(analytic[name][index]), float(numeric[index]), floor)
            if error > report.max_relative_error:
                report.max_relative_error = error
                report.worst_parameter = name
                report.worst_index = tuple(int(i) for i in index)
        report.finite_differences[name] = numeric
    return report


def finite_difference_check(expr, bindings, step=FD_STEP):
    """Max relative error between reverse-mode and central-difference gradients."""
    return validate_gradients(expr, bindings, step=step).max_relative_error
