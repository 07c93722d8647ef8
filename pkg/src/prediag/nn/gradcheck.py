"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

__all__ = ["numeric_grad_check"]


def numeric_grad_check(
    fn: Callable[[np.ndarray], tuple[float, np.ndarray]],
    point: np.ndarray,
    step: float = 1e-4,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``fn`` maps a parameter array to (scalar value, analytic gradient of the
    same shape). Each coordinate is perturbed by ``step`` in both directions;
    the relative error denominator is max(|analytic|, |numeric|, 1e-8) so
    near-zero gradients do not blow the ratio up.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    point = np.array(point, dtype=np.float64)
    value, analytic = fn(point)
    if not np.isfinite(value) or not np.all(np.isfinite(analytic)):
        raise FloatingPointError("non-finite evaluation at the check point")
    if analytic.shape != point.shape:
        raise ValueError(
            f"analytic gradient shape {analytic.shape} does not match point {point.shape}"
        )
    numeric = np.zeros_like(point)
    flat_point = point.ravel()
    flat_numeric = numeric.ravel()
    for i in range(flat_point.size):
        orig = flat_point[i]
        flat_point[i] = orig + step
        plus, _ = fn(point)
        flat_point[i] = orig - step
        minus, _ = fn(point)
        flat_point[i] = orig
        if not (np.isfinite(plus) and np.isfinite(minus)):
            raise FloatingPointError(f"non-finite evaluation while perturbing index {i}")
        flat_numeric[i] = (plus - minus) / (2.0 * step)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))
