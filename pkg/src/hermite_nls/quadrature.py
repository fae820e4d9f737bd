"""Gauss-Hermite quadrature rules for the weight exp(-x^2).

Nodes come from the symmetric Jacobi matrix (Golub-Welsch) and are polished
with a Newton step on the orthonormal Hermite recurrence.  Besides the
ordinary weights the rule carries the Christoffel weights
``w_m * exp(x_m^2)``, which let the Hermite transform act directly on plain
function values.  They are computed from the reciprocal sum of squared
orthonormal Hermite functions, so no ``exp(x^2)`` factor is ever formed.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = ["MAX_DEGREE", "QuadratureRule", "gauss_hermite_rule", "InvalidDegreeError"]

#: Beyond this degree exp(-x^2/2) underflows at the outermost nodes.
MAX_DEGREE = 700

PI_QUARTER = np.pi ** -0.25


class InvalidDegreeError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """M-point Gauss-Hermite rule.

    Arrays are read-only so a rule can be shared freely.  ``basis`` is the
    M x M matrix ``B[k, m] = h_k(x_m)`` of orthonormal Hermite functions at the
    nodes; together with ``christoffel`` it defines the forward transform
    ``alpha = B @ (christoffel * f(x))`` and the inverse ``f(x) = B.T @ alpha``.
    """

    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    christoffel: np.ndarray
    basis: np.ndarray = field(repr=False)

    @property
    def M(self) -> int:
        return self.degree

    @functools.cached_property
    def analysis_matrix(self) -> np.ndarray:
        """``B @ diag(christoffel)``: nodal values -> Hermite coefficients."""
        mat = self.basis * self.christoffel[None, :]
        mat.setflags(write=False)
        return mat

    @functools.cached_property
    def synthesis_matrix(self) -> np.ndarray:
        """``B.T``: Hermite coefficients -> nodal values (C-contiguous copy)."""
        mat = np.ascontiguousarray(self.basis.T)
        mat.setflags(write=False)
        return mat


def _hermite_function_table(x: np.ndarray, n: int) -> np.ndarray:
    # Weighted three-term recurrence; kept local to avoid a circular import
    # with the basis module, which re-exports a checked version.
    table = np.empty((n, x.size))
    table[0] = PI_QUARTER * np.exp(-0.5 * x * x)
    if n > 1:
        table[1] = np.sqrt(2.0) * x * table[0]
    for m in range(1, n - 1):
        table[m + 1] = (x * table[m] - np.sqrt(m / 2.0) * table[m - 1]) / np.sqrt((m + 1) / 2.0)
    return table


@functools.lru_cache(maxsize=32)
def gauss_hermite_rule(M: int) -> QuadratureRule:
    """Return the M-point Gauss-Hermite rule (cached per degree).

    >>> rule = gauss_hermite_rule(2)
    >>> rule.nodes
    array([-0.70710678,  0.70710678])
    """
    if isinstance(M, bool) or not isinstance(M, (int, np.integer)):
        raise InvalidDegreeError(f"degree must be an integer, got {M!r}")
    M = int(M)
    if M < 1 or M > MAX_DEGREE:
        raise InvalidDegreeError(f"degree must lie in [1, {MAX_DEGREE}], got {M}")

    if M == 1:
        x = np.zeros(1)
    else:
        offdiag = np.sqrt(np.arange(1, M) / 2.0)
        x = eigh_tridiagonal(np.zeros(M), offdiag, eigvals_only=True)
        # One Newton step on h_M (h_M' = sqrt(2M) h_{M-1} at a root).
        for _ in range(2):
            table = _hermite_function_table(x, M + 1)
            with np.errstate(invalid="ignore", divide="ignore"):
                step = table[M] / (np.sqrt(2.0 * M) * table[M - 1])
            x = x - np.where(np.isfinite(step), step, 0.0)
        x = 0.5 * (x - x[::-1])
        if M % 2 == 1:
            x[M // 2] = 0.0

    basis = _hermite_function_table(x, M)
    christoffel = 1.0 / np.einsum("km,km->m", basis, basis)
    christoffel = 0.5 * (christoffel + christoffel[::-1])
    weights = christoffel * np.exp(-x * x)

    for arr in (x, weights, christoffel, basis):
        arr.setflags(write=False)
    return QuadratureRule(degree=M, nodes=x, weights=weights, christoffel=christoffel, basis=basis)
