"""Orthonormal Hermite functions and the nodal <-> coefficient transforms.

A *spectral field* is a complex vector ``alpha`` of length M representing
``f = sum_k alpha_k h_k`` with ``h_k(x) = H_k(x) exp(-x^2/2)`` orthonormal in
L^2(R).  A *nodal field* holds the values ``f(x_m)`` at the M nodes of the
matching Gauss-Hermite rule.  Both are plain numpy arrays.
"""

from __future__ import annotations

import numpy as np

from .quadrature import MAX_DEGREE, PI_QUARTER, QuadratureRule

__all__ = [
    "MAX_ABS_POINT",
    "DimensionError",
    "EvaluationDomainError",
    "eval_hermite_functions",
    "analyze",
    "synthesize",
    "synthesize_at_nodes",
    "interpolate",
    "sigma_norm",
    "l2_norm",
]

MAX_ABS_POINT = 40.0


class DimensionError(ValueError):
    pass


class EvaluationDomainError(ValueError):
    pass


def eval_hermite_functions(points, M: int) -> np.ndarray:
    """Values of h_0..h_{M-1} at ``points``, shape (M, len(points)).

    Uses the weighted recurrence
    ``h_{m+1} = (x h_m - sqrt(m/2) h_{m-1}) / sqrt((m+1)/2)`` seeded with
    ``h_0 = pi^{-1/4} exp(-x^2/2)``, which never forms H_m(x) itself.
    """
    x = np.atleast_1d(np.asarray(points, dtype=float))
    if x.ndim != 1:
        raise EvaluationDomainError("points must be one-dimensional")
    if not (1 <= M <= MAX_DEGREE):
        raise EvaluationDomainError(f"M must lie in [1, {MAX_DEGREE}], got {M}")
    if not np.all(np.isfinite(x)) or np.any(np.abs(x) > MAX_ABS_POINT):
        raise EvaluationDomainError(f"points must be finite with |x| <= {MAX_ABS_POINT}")

    out = np.empty((M, x.size))
    out[0] = PI_QUARTER * np.exp(-0.5 * x * x)
    if M > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for m in range(1, M - 1):
        out[m + 1] = (x * out[m] - np.sqrt(m / 2.0) * out[m - 1]) / np.sqrt((m + 1) / 2.0)
    return out


def _check_size(arr: np.ndarray, M: int, what: str) -> None:
    if arr.shape[-1] != M:
        raise DimensionError(f"{what} has length {arr.shape[-1]}, expected {M}")


def analyze(values, rule: QuadratureRule) -> np.ndarray:
    """Hermite coefficients from nodal values: ``alpha_k = sum_m w^_m f(x_m) h_k(x_m)``.

    Exact (up to rounding) whenever f lies in the span of h_0..h_{M-1}.
    Accepts a trailing axis of length M, so several fields can be
    transformed at once.
    """
    values = np.asarray(values)
    _check_size(values, rule.M, "nodal field")
    return values @ rule.analysis_matrix.T


def synthesize_at_nodes(coeffs, rule: QuadratureRule) -> np.ndarray:
    coeffs = np.asarray(coeffs)
    _check_size(coeffs, rule.M, "spectral field")
    return coeffs @ rule.basis


def synthesize(coeffs, points) -> np.ndarray:
    """Evaluate ``sum_k alpha_k h_k`` at arbitrary points."""
    coeffs = np.asarray(coeffs)
    table = eval_hermite_functions(points, coeffs.shape[-1])
    return coeffs @ table


def interpolate(values, rule: QuadratureRule) -> np.ndarray:
    """The interpolant Q_M: the unique M-term expansion matching ``values`` at the nodes.

    Gauss-Hermite exactness makes this the same linear map as :func:`analyze`.
    """
    return analyze(values, rule)


def l2_norm(coeffs) -> float:
    return float(np.linalg.norm(coeffs))


def sigma_norm(coeffs, k: int) -> float:
    """Coefficient form of the weighted Sobolev norm Sigma^k.

    ``sqrt(sum_m (m + 1/2)^k |alpha_m|^2)``; this is the norm-equivalent
    expression, not the literal ``||f||_{H^k} + |||x|^k f||`` sum.
    """
    if k < 0 or k > 10:
        raise ValueError(f"k must lie in [0, 10], got {k}")
    coeffs = np.asarray(coeffs)
    if k == 0:
        return l2_norm(coeffs)
    lam = np.arange(coeffs.shape[-1]) + 0.5
    return float(np.sqrt(np.sum(lam**k * np.abs(coeffs) ** 2)))
