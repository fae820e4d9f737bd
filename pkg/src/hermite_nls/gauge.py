"""Cumulative mass ``F(x) = int_{-inf}^x |f|^2`` and the gauge factor ``exp(i p delta F)``.

The primitive of ``|f|^2`` tends to ``||f||^2`` as x -> +inf, so inverting the
differentiation matrix on it directly is badly conditioned.  Subtracting
``Phi(x) ||f||^2`` with the Gaussian CDF ``Phi`` gives a decaying function
whose derivative differs from ``|f|^2`` only in mode 0, because
``Phi' = h_0 / sqrt(2 sqrt(pi))``.  The decaying primitive is then recovered
by backward recurrence on the two parity chains of the differentiation
matrix, seeded with zeros above the top mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .basis import DimensionError, analyze, synthesize_at_nodes
from .quadrature import QuadratureRule

__all__ = [
    "DegreeTooSmallError",
    "CumulativeMass",
    "smooth_step",
    "primitive_coefficients",
    "cumulative_mass",
    "gauge_factor",
]

_PHI_TO_H0 = 1.0 / np.sqrt(2.0 * np.sqrt(np.pi))


class DegreeTooSmallError(ValueError):
    pass


@dataclass(frozen=True)
class CumulativeMass:
    rule: QuadratureRule
    values: np.ndarray
    total_mass: float
    corrected_coeffs: np.ndarray

    @property
    def corrected(self) -> np.ndarray:
        """The decaying part ``F - Phi * mass`` at the nodes."""
        return self.values - smooth_step(self.rule.nodes) * self.total_mass


def smooth_step(x):
    """Standard normal CDF ``(1 + erf(x / sqrt(2))) / 2``."""
    return 0.5 * (1.0 + erf(np.asarray(x, dtype=float) / np.sqrt(2.0)))


def primitive_coefficients(rhs) -> np.ndarray:
    """Solve ``A_d eta = rhs`` for the decaying primitive.

    Row n of the differentiation matrix reads
    ``sqrt((n+1)/2) eta_{n+1} - sqrt(n/2) eta_{n-1} = rhs_n``; rows M-1..1 are
    swept downward with ``eta_M = eta_{M+1} = 0``.  Row 0 is left out: it is
    the zero-total-integral condition that the mass correction enforces.
    """
    rhs = np.asarray(rhs, dtype=float)
    M = rhs.shape[-1]
    eta = np.zeros(M + 2)
    for n in range(M - 1, 0, -1):
        eta[n - 1] = (np.sqrt((n + 1) / 2.0) * eta[n + 1] - rhs[n]) / np.sqrt(n / 2.0)
    return eta[:M]


def cumulative_mass(f, rule: QuadratureRule) -> CumulativeMass:
    f = np.asarray(f)
    if f.shape[-1] != rule.M:
        raise DimensionError(f"spectral field has length {f.shape[-1]}, expected {rule.M}")
    if rule.M < 4:
        raise DegreeTooSmallError(f"cumulative mass needs M >= 4, got {rule.M}")

    density = np.abs(synthesize_at_nodes(f, rule)) ** 2
    rho = analyze(density, rule)
    mass = float(np.dot(rule.christoffel, density))

    rho_corr = rho.copy()
    rho_corr[0] -= mass * _PHI_TO_H0
    eta = primitive_coefficients(rho_corr)
    values = synthesize_at_nodes(eta, rule) + smooth_step(rule.nodes) * mass
    return CumulativeMass(rule=rule, values=values, total_mass=mass, corrected_coeffs=eta)


def gauge_factor(u, delta: float, power: int, rule: QuadratureRule) -> np.ndarray:
    """Nodal values of ``exp(i * power * delta * F_u(x_m))``; unit modulus by construction."""
    if power not in (-2, -1, 1, 2):
        raise ValueError(f"power must be one of -2, -1, 1, 2, got {power}")
    phase = power * delta * cumulative_mass(u, rule).values
    return np.cos(phase) + 1j * np.sin(phase)
