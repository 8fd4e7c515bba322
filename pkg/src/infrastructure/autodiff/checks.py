from __future__ import annotations

from collections.abc import Callable

import numpy as np

from domain.errors import NonFiniteError, ShapeError
from domain.models import FloatArray


def finite_difference_gradient(
    f: Callable[[FloatArray], float], x: FloatArray, step: float = 1e-5
) -> FloatArray:
    """Central-difference gradient of a scalar function; works for any array shape."""
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    point = np.array(x, dtype=np.float64)
    grad = np.zeros_like(point)
    flat_point = point.reshape(-1)
    flat_grad = grad.reshape(-1)
    for index in range(flat_point.size):
        original = flat_point[index]
        flat_point[index] = original + step
        upper = float(f(point))
        flat_point[index] = original - step
        lower = float(f(point))
        flat_point[index] = original
        if not (np.isfinite(upper) and np.isfinite(lower)):
            raise NonFiniteError(
                "function is not finite near the evaluation point",
                diagnostics={"coordinate": index, "upper": upper, "lower": lower},
            )
        flat_grad[index] = (upper - lower) / (2.0 * step)
    return grad


def finite_difference_check(
    f: Callable[[FloatArray], float],
    x: FloatArray,
    analytic_grad: FloatArray,
    step: float = 1e-5,
) -> float:
    """Max over coordinates of |fd_i - g_i| / (|g_i| + 1e-8)."""
    analytic = np.asarray(analytic_grad, dtype=np.float64)
    if analytic.shape != np.shape(x):
        raise ShapeError("finite_difference_check", [np.shape(x), analytic.shape])
    numeric = finite_difference_gradient(f, x, step)
    if numeric.size == 0:
        return 0.0
    return float(np.max(np.abs(numeric - analytic) / (np.abs(analytic) + 1e-8)))


__all__ = ["finite_difference_check", "finite_difference_gradient"]
