"""Time integrators for the cubic NLS and the derivative NLS.

Cubic NLS ``i psi_t = -psi_xx + mu |psi|^2 psi``: Lie and Strang splitting
of the free flow and the exactly solvable phase rotation.

Derivative NLS ``i psi_t + psi_xx - 2 i delta (|psi|^2 psi)_x = 0``, i.e.
``psi_t = i psi_xx + 2 delta (|psi|^2 psi)_x``:

* gauge-transformed Strang splitting.  With ``E = exp(-i delta F_psi)``,
  ``u = E^2 psi`` and ``v = E (E psi)_x`` obey
  ``u_t = i u_xx - 2 delta u^2 conj(v)``, ``v_t = i v_xx + 2 delta v^2 conj(u)``.
  The nonlinear part conserves ``u conj(v)`` pointwise and is solved exactly.
* RK4 on the method-of-lines system (reference solutions).
* a Crank-Nicolson baseline: Cayley transform of the truncated Laplacian with
  the derivative nonlinearity taken at the midpoint by two fixed-point sweeps.
  This is a representative CN discretisation, not a specific published one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .basis import DimensionError, analyze, synthesize_at_nodes
from .gauge import cumulative_mass, gauge_factor
from .operators import (
    Propagator,
    apply_blocks,
    differentiate,
    laplacian_apply,
    laplacian_spectrum,
)
from .quadrature import QuadratureRule, gauss_hermite_rule

__all__ = [
    "DIVERGENCE_THRESHOLD",
    "DivergenceError",
    "ResolutionWarning",
    "CubicParams",
    "DnlseParams",
    "DnlseState",
    "phase_kick",
    "lie_step_cubic",
    "strang_step_cubic",
    "coupled_nonlinear_flow",
    "dnlse_forward_transform",
    "dnlse_strang_step",
    "dnlse_reconstruct",
    "dnlse_rhs",
    "rk4_reference_step",
    "CrankNicolsonFactor",
    "build_cn_factor",
    "cn_baseline_step",
]

DIVERGENCE_THRESHOLD = 1e6


class DivergenceError(RuntimeError):
    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class ResolutionWarning(UserWarning):
    pass


def _positive_finite(name, value, allow_zero=False):
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class CubicParams:
    mu: float
    tau: float
    M: int

    def __post_init__(self):
        _positive_finite("tau", self.tau, allow_zero=True)
        _positive_finite("M", self.M)


@dataclass(frozen=True)
class DnlseParams:
    delta: float
    tau: float
    M: int

    def __post_init__(self):
        _positive_finite("tau", self.tau, allow_zero=True)
        _positive_finite("M", self.M)


@dataclass(frozen=True)
class DnlseState:
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if np.shape(self.u) != np.shape(self.v):
            raise DimensionError("u and v must have the same length")


def _rule_for(M: int, rule: QuadratureRule | None) -> QuadratureRule:
    if rule is None:
        return gauss_hermite_rule(M)
    if rule.M != M:
        raise DimensionError(f"rule has degree {rule.M}, field has length {M}")
    return rule


def _check_prop(prop: Propagator, M: int):
    if prop.M != M:
        raise DimensionError(f"propagator built for M={prop.M}, field has length {M}")


# -- cubic NLS ---------------------------------------------------------------


def phase_kick(values, tau_mu: float) -> np.ndarray:
    """Exact flow of ``i psi_t = mu |psi|^2 psi`` over time tau on nodal values."""
    values = np.asarray(values)
    phase = -tau_mu * (values.real**2 + values.imag**2)
    return (np.cos(phase) + 1j * np.sin(phase)) * values


def _kick_cubic(psi, mu, tau, rule):
    nodal = synthesize_at_nodes(psi, rule)
    return analyze(phase_kick(nodal, tau * mu), rule)


def lie_step_cubic(psi, p: CubicParams, prop: Propagator, rule: QuadratureRule | None = None):
    """``exp(i tau Delta) Q_M(exp(-i tau mu |psi|^2) psi)``."""
    psi = np.asarray(psi)
    rule = _rule_for(psi.shape[-1], rule)
    _check_prop(prop, psi.shape[-1])
    return prop(_kick_cubic(psi, p.mu, p.tau, rule))


def strang_step_cubic(psi, p: CubicParams, half_prop: Propagator, rule: QuadratureRule | None = None):
    """Half drift, full kick, half drift; ``half_prop`` must be built for tau/2."""
    psi = np.asarray(psi)
    rule = _rule_for(psi.shape[-1], rule)
    _check_prop(half_prop, psi.shape[-1])
    return half_prop(_kick_cubic(half_prop(psi), p.mu, p.tau, rule))


# -- gauge-transformed DNLS --------------------------------------------------


def coupled_nonlinear_flow(u_nodal, v_nodal, tau: float, coupling: float):
    """Exact solution of ``u_t = c u^2 conj(v)``, ``v_t = -c v^2 conj(u)`` after time tau.

    ``w = u conj(v)`` is constant along the flow, so
    ``u(tau) = exp(c tau w) u`` and ``v(tau) = exp(-c tau conj(w)) v``.
    The DNLS with coefficient delta uses ``c = -2 delta``.
    """
    u_nodal = np.asarray(u_nodal)
    v_nodal = np.asarray(v_nodal)
    w = u_nodal * np.conj(v_nodal)
    return np.exp(coupling * tau * w) * u_nodal, np.exp(-coupling * tau * np.conj(w)) * v_nodal


def _resolution_ok(coeffs, fraction=0.1, rel=1e-8) -> bool:
    mag = np.abs(coeffs)
    peak = mag.max(initial=0.0)
    if peak == 0.0:
        return True
    tail = mag[int(np.floor((1.0 - fraction) * mag.size)):]
    return bool(tail.max(initial=0.0) <= rel * peak)


def dnlse_forward_transform(psi0, delta: float, rule: QuadratureRule) -> DnlseState:
    """Map psi0 to the gauge variables ``u0 = E^2 psi0``, ``v0 = E (E psi0)_x``.

    Emits :class:`ResolutionWarning` if the trailing 10% of coefficients are
    not below 1e-8 of the largest one.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape[-1] != rule.M:
        raise DimensionError(f"spectral field has length {psi0.shape[-1]}, expected {rule.M}")
    if not _resolution_ok(psi0):
        warnings.warn("initial field is not resolved by the Hermite basis", ResolutionWarning, stacklevel=2)
    gauge = gauge_factor(psi0, -delta, 1, rule)
    nodal = synthesize_at_nodes(psi0, rule)
    u0 = analyze(gauge**2 * nodal, rule)
    d_gpsi = synthesize_at_nodes(differentiate(analyze(gauge * nodal, rule)), rule)
    v0 = analyze(gauge * d_gpsi, rule)
    return DnlseState(u0, v0, 0.0)


def dnlse_strang_step(s: DnlseState, p: DnlseParams, half_prop: Propagator, rule: QuadratureRule) -> DnlseState:
    _check_prop(half_prop, rule.M)
    uv = half_prop(np.stack([s.u, s.v]))
    nodal = synthesize_at_nodes(uv, rule)
    un, vn = coupled_nonlinear_flow(nodal[0], nodal[1], p.tau, -2.0 * p.delta)
    uv = half_prop(analyze(np.stack([un, vn]), rule))
    return DnlseState(uv[0], uv[1], s.t + p.tau)


def dnlse_reconstruct(s: DnlseState, delta: float, rule: QuadratureRule) -> np.ndarray:
    """``psi = Q_M(exp(2 i delta F_u) u)``; the nodal modulus of u is kept exactly."""
    u = np.asarray(s.u)
    if delta == 0:
        return u.copy()
    phase = 2.0 * delta * cumulative_mass(u, rule).values
    return analyze((np.cos(phase) + 1j * np.sin(phase)) * synthesize_at_nodes(u, rule), rule)


# -- direct discretisations --------------------------------------------------


def dnlse_rhs(psi, delta: float, rule: QuadratureRule) -> np.ndarray:
    """Method-of-lines right-hand side ``i Delta_M psi + 2 delta A_d Q_M(|psi|^2 psi)``."""
    out = 1j * laplacian_apply(psi)
    if delta != 0:
        nodal = synthesize_at_nodes(psi, rule)
        out += 2.0 * delta * differentiate(analyze((nodal.real**2 + nodal.imag**2) * nodal, rule))
    return out


def _check_blowup(psi, scheme: str):
    norm = np.linalg.norm(psi)
    if not np.isfinite(norm) or norm > DIVERGENCE_THRESHOLD:
        raise DivergenceError(f"{scheme} diverged (norm {norm:.3g})")


def rk4_reference_step(psi, p: DnlseParams, rule: QuadratureRule | None = None) -> np.ndarray:
    """Classical RK4 step; stable roughly for ``tau * 2M < 2.8``."""
    psi = np.asarray(psi, dtype=complex)
    rule = _rule_for(psi.shape[-1], rule)
    tau, delta = p.tau, p.delta
    k1 = dnlse_rhs(psi, delta, rule)
    k2 = dnlse_rhs(psi + 0.5 * tau * k1, delta, rule)
    k3 = dnlse_rhs(psi + 0.5 * tau * k2, delta, rule)
    k4 = dnlse_rhs(psi + tau * k3, delta, rule)
    out = psi + (tau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_blowup(out, "rk4")
    return out


@dataclass(frozen=True, eq=False)
class CrankNicolsonFactor:
    """Prefactored ``C = (I - i tau/2 L)^{-1}(I + i tau/2 L)`` and ``(I - i tau/2 L)^{-1}``, as parity blocks."""

    M: int
    tau: float
    cayley: tuple[np.ndarray, np.ndarray]
    solve: tuple[np.ndarray, np.ndarray]


def build_cn_factor(M: int, tau: float) -> CrankNicolsonFactor:
    spectrum = laplacian_spectrum(M)
    half = 0.5 * float(tau)
    cayley = spectrum.matrix_function(lambda lam: (1 + 1j * half * lam) / (1 - 1j * half * lam))
    solve = spectrum.matrix_function(lambda lam: 1.0 / (1 - 1j * half * lam))
    return CrankNicolsonFactor(M, float(tau), cayley, solve)


def cn_baseline_step(psi, p: DnlseParams, cache: CrankNicolsonFactor, rule: QuadratureRule | None = None,
                     sweeps: int = 2) -> np.ndarray:
    """One Crank-Nicolson step with midpoint derivative nonlinearity.

    Solves ``(I - i tau/2 L) psi' = (I + i tau/2 L) psi + tau N((psi + psi')/2)``
    by ``sweeps`` fixed-point iterations starting from ``psi' = psi``, with
    ``N(phi) = 2 delta A_d Q_M(|phi|^2 phi)``.
    """
    psi = np.asarray(psi, dtype=complex)
    rule = _rule_for(psi.shape[-1], rule)
    if cache.M != psi.shape[-1]:
        raise DimensionError(f"CN factor built for M={cache.M}, field has length {psi.shape[-1]}")
    linear = apply_blocks(*cache.cayley, psi)
    if p.delta == 0:
        _check_blowup(linear, "cn")
        return linear
    new = psi
    for _ in range(sweeps):
        mid = synthesize_at_nodes(0.5 * (psi + new), rule)
        nonlin = 2.0 * p.delta * differentiate(analyze((mid.real**2 + mid.imag**2) * mid, rule))
        new = linear + cache.tau * apply_blocks(*cache.solve, nonlin)
    _check_blowup(new, "cn")
    return new

