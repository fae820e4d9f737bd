"""Exact coefficient-space operators and the free Schrodinger propagator.

All operators act on the last axis of a coefficient array, so stacked
fields (e.g. the ``(u, v)`` pair of the gauge-transformed system) go through
in one call.  Modes at or beyond M are dropped (plain truncation).

The Laplacian is the Galerkin matrix ``<h_m, h_n''>``: pentadiagonal with
zero +-1 bands, diagonal ``-(n + 1/2)`` and +-2 bands
``sqrt((n+1)(n+2))/2``.  Even and odd modes decouple into two symmetric
tridiagonal blocks, which is what :class:`LaplacianSpectrum` diagonalises.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .basis import DimensionError, analyze, synthesize_at_nodes
from .quadrature import MAX_DEGREE, QuadratureRule

__all__ = [
    "NumericError",
    "apply_position",
    "differentiate",
    "laplacian_apply",
    "laplacian_matrix",
    "differentiation_matrix",
    "laplacian_quadrature_form",
    "LaplacianSpectrum",
    "laplacian_spectrum",
    "Propagator",
    "build_free_propagator",
    "propagate",
]


class NumericError(RuntimeError):
    pass


def _ladder(M: int) -> np.ndarray:
    # sqrt(n/2) for n = 1..M-1: the coupling between modes n-1 and n.
    return np.sqrt(np.arange(1, M) / 2.0)


def apply_position(coeffs) -> np.ndarray:
    """Coefficients of ``x f``: ``g_n = sqrt(n/2) a_{n-1} + sqrt((n+1)/2) a_{n+1}``."""
    a = np.asarray(coeffs)
    s = _ladder(a.shape[-1])
    out = np.zeros_like(a, dtype=np.result_type(a, float))
    out[..., 1:] += s * a[..., :-1]
    out[..., :-1] += s * a[..., 1:]
    return out


def differentiate(coeffs) -> np.ndarray:
    """Coefficients of ``f'``: ``b_n = sqrt((n+1)/2) a_{n+1} - sqrt(n/2) a_{n-1}``.

    The matrix is skew-symmetric and tridiagonal.
    """
    a = np.asarray(coeffs)
    s = _ladder(a.shape[-1])
    out = np.zeros_like(a, dtype=np.result_type(a, float))
    out[..., :-1] += s * a[..., 1:]
    out[..., 1:] -= s * a[..., :-1]
    return out


def _laplacian_bands(M: int) -> tuple[np.ndarray, np.ndarray]:
    n = np.arange(M)
    diag = -(n + 0.5)
    off2 = np.sqrt((n[:-2] + 1.0) * (n[:-2] + 2.0)) / 2.0
    return diag, off2


def laplacian_apply(coeffs) -> np.ndarray:
    a = np.asarray(coeffs)
    diag, off2 = _laplacian_bands(a.shape[-1])
    out = diag * a
    out[..., :-2] += off2 * a[..., 2:]
    out[..., 2:] += off2 * a[..., :-2]
    return out


def laplacian_matrix(M: int) -> np.ndarray:
    diag, off2 = _laplacian_bands(M)
    return np.diag(diag) + np.diag(off2, 2) + np.diag(off2, -2)


def differentiation_matrix(M: int) -> np.ndarray:
    s = _ladder(M)
    return np.diag(s, 1) - np.diag(s, -1)


def laplacian_quadrature_form(coeffs, rule: QuadratureRule) -> np.ndarray:
    """``-D_lambda a + T diag(x^2) T^{-1} a`` with D_lambda = 2n + 1.

    Uses the harmonic-oscillator eigenvalues and a nodal round trip for the
    ``x^2`` factor.  Agrees with :func:`laplacian_apply` on fields supported
    below mode M-2; kept as an independent cross-check.
    """
    a = np.asarray(coeffs)
    if a.shape[-1] != rule.M:
        raise DimensionError(f"spectral field has length {a.shape[-1]}, expected {rule.M}")
    lam = 2.0 * np.arange(rule.M) + 1.0
    nodal = synthesize_at_nodes(a, rule)
    return -lam * a + analyze(rule.nodes**2 * nodal, rule)


@dataclass(frozen=True, eq=False)
class LaplacianSpectrum:
    """Eigendecompositions of the even- and odd-mode blocks of the truncated Laplacian."""

    M: int
    even_values: np.ndarray
    even_vectors: np.ndarray
    odd_values: np.ndarray
    odd_vectors: np.ndarray

    def matrix_function(self, fn) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``fn(Delta_M)`` restricted to the even and odd blocks."""
        blocks = []
        for vals, vecs in ((self.even_values, self.even_vectors), (self.odd_values, self.odd_vectors)):
            if vals.size == 0:
                blocks.append(np.zeros((0, 0), dtype=complex))
                continue
            blocks.append((vecs * fn(vals)) @ vecs.T)
        return blocks[0], blocks[1]


def _block_eigh(diag: np.ndarray, off: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if diag.size == 0:
        return np.zeros(0), np.zeros((0, 0))
    if diag.size == 1:
        return diag.copy(), np.ones((1, 1))
    try:
        return eigh_tridiagonal(diag, off, lapack_driver="stemr")
    except (LinAlgError, ValueError) as exc:
        raise NumericError(f"tridiagonal eigensolver failed: {exc}") from exc


@functools.lru_cache(maxsize=16)
def laplacian_spectrum(M: int) -> LaplacianSpectrum:
    if not (1 <= M <= MAX_DEGREE):
        raise ValueError(f"M must lie in [1, {MAX_DEGREE}], got {M}")
    diag, off2 = _laplacian_bands(M)
    ev_vals, ev_vecs = _block_eigh(diag[0::2], off2[0::2])
    od_vals, od_vecs = _block_eigh(diag[1::2], off2[1::2])
    for arr in (ev_vals, ev_vecs, od_vals, od_vecs):
        arr.setflags(write=False)
    return LaplacianSpectrum(M, ev_vals, ev_vecs, od_vals, od_vecs)


def apply_blocks(even: np.ndarray, odd: np.ndarray, coeffs) -> np.ndarray:
    """Apply a parity-block-diagonal operator given by its two dense blocks."""
    a = np.asarray(coeffs)
    out = np.empty(a.shape, dtype=np.result_type(a, even, odd))
    out[..., 0::2] = a[..., 0::2] @ even.T
    out[..., 1::2] = a[..., 1::2] @ odd.T
    return out


@dataclass(frozen=True, eq=False)
class Propagator:
    """``exp(i tau Delta_M)`` for fixed (M, tau), stored as two dense unitary blocks."""

    M: int
    tau: float
    even: np.ndarray
    odd: np.ndarray

    def __call__(self, coeffs) -> np.ndarray:
        return propagate(self, coeffs)


@functools.lru_cache(maxsize=32)
def build_free_propagator(M: int, tau: float) -> Propagator:
    tau = float(tau)
    if not np.isfinite(tau):
        raise ValueError("tau must be finite")
    spectrum = laplacian_spectrum(M)
    even, odd = spectrum.matrix_function(lambda lam: np.exp(1j * tau * lam))
    even.setflags(write=False)
    odd.setflags(write=False)
    return Propagator(M, tau, even, odd)


def propagate(p: Propagator, coeffs) -> np.ndarray:
    a = np.asarray(coeffs)
    if a.shape[-1] != p.M:
        raise DimensionError(f"spectral field has length {a.shape[-1]}, propagator expects {p.M}")
    return apply_blocks(p.even, p.odd, a)
