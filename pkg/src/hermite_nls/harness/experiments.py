"""Evolution runs, convergence studies and CPU-time benchmarks."""

from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .. import operators
from ..basis import analyze, eval_hermite_functions, sigma_norm, synthesize_at_nodes
from ..operators import build_free_propagator
from ..quadrature import QuadratureRule, gauss_hermite_rule
from ..schemes import (
    DIVERGENCE_THRESHOLD,
    CubicParams,
    DivergenceError,
    DnlseParams,
    DnlseState,
    build_cn_factor,
    cn_baseline_step,
    coupled_nonlinear_flow,
    dnlse_forward_transform,
    dnlse_reconstruct,
    lie_step_cubic,
    phase_kick,
    rk4_reference_step,
)
from . import cache
from .config import DEFAULT_INITIAL, RunConfig, format_config
from .csvio import write_coefficients, write_nodal_snapshot, write_table
from .presets import initial_preset

__all__ = [
    "ErrorRecord",
    "RunResult",
    "Reference",
    "StudyResult",
    "make_integrator",
    "run_evolution",
    "nodal_l2_error",
    "final_error",
    "clear_operator_caches",
    "default_reference_config",
    "reference_solution",
    "fit_slope",
    "convergence_study",
    "benchmark",
    "RECORD_HEADER",
    "STUDY_HEADER",
    "BENCH_HEADER",
]

log = logging.getLogger(__name__)

RECORD_HEADER = ["t", "l2_error", "mass", "sigma1", "cpu_seconds"]
STUDY_HEADER = ["tau", "l2_error", "cpu_seconds", "slope"]
BENCH_HEADER = ["scheme", "tau", "M", "final_error", "cpu_seconds"]


@dataclass(frozen=True)
class ErrorRecord:
    t: float
    l2_error: float
    mass: float
    sigma1: float
    cpu_seconds: float

    def row(self):
        return [self.t, self.l2_error, self.mass, self.sigma1, self.cpu_seconds]


@dataclass
class RunResult:
    config: RunConfig
    records: list
    final: np.ndarray
    final_time: float
    cpu_seconds: float
    rule: QuadratureRule = field(repr=False)


# -- integrators -------------------------------------------------------------
#
# Each integrator owns its state and advances by whole steps; ``psi()`` returns
# the current solution as Hermite coefficients.  Strang integrators merge the
# trailing half drift of one step with the leading half drift of the next.


class _Integrator:
    scheme = ""

    def __init__(self, cfg: RunConfig, psi0: np.ndarray, rule: QuadratureRule):
        self.cfg = cfg
        self.rule = rule
        self.steps_done = 0

    def advance(self, n: int) -> None:
        try:
            # blow-up is caught by the norm guard; silence the overflow noise on the way there
            with np.errstate(over="ignore", invalid="ignore"):
                self._advance(n)
        except DivergenceError as exc:
            step = self.steps_done + (exc.step or 1)
            raise DivergenceError(f"{self.scheme} diverged at step {step}", step=step) from None
        self.steps_done += n

    def _guard(self, arr, offset):
        norm = np.linalg.norm(arr)
        if not np.isfinite(norm) or norm > DIVERGENCE_THRESHOLD:
            raise DivergenceError(f"{self.scheme} diverged", step=offset)


class _CubicLie(_Integrator):
    scheme = "lie"

    def __init__(self, cfg, psi0, rule):
        super().__init__(cfg, psi0, rule)
        self.params = CubicParams(cfg.mu, cfg.tau, cfg.M)
        self.prop = build_free_propagator(cfg.M, cfg.tau)
        self.state = psi0

    def _advance(self, n):
        for k in range(n):
            self.state = lie_step_cubic(self.state, self.params, self.prop, self.rule)
            self._guard(self.state, k + 1)

    def psi(self):
        return self.state


class _CubicStrang(_Integrator):
    scheme = "strang"

    def __init__(self, cfg, psi0, rule):
        super().__init__(cfg, psi0, rule)
        self.half = build_free_propagator(cfg.M, cfg.tau / 2)
        self.full = build_free_propagator(cfg.M, cfg.tau)
        self.state = psi0

    def _kick(self, a):
        nodal = synthesize_at_nodes(a, self.rule)
        return analyze(phase_kick(nodal, self.cfg.tau * self.cfg.mu), self.rule)

    def _advance(self, n):
        if n == 0:
            return
        a = self.half(self.state)
        for k in range(n - 1):
            a = self.full(self._kick(a))
            self._guard(a, k + 1)
        self.state = self.half(self._kick(a))
        self._guard(self.state, n)

    def psi(self):
        return self.state


class _RTransformStrang(_Integrator):
    scheme = "rtransform_strang"

    def __init__(self, cfg, psi0, rule):
        super().__init__(cfg, psi0, rule)
        s = dnlse_forward_transform(psi0, cfg.delta, rule)
        self.uv = np.stack([s.u, s.v])
        self.half = build_free_propagator(cfg.M, cfg.tau / 2)
        self.full = build_free_propagator(cfg.M, cfg.tau)

    def _kick(self, uv):
        nodal = synthesize_at_nodes(uv, self.rule)
        un, vn = coupled_nonlinear_flow(nodal[0], nodal[1], self.cfg.tau, -2.0 * self.cfg.delta)
        return analyze(np.stack([un, vn]), self.rule)

    def _advance(self, n):
        if n == 0:
            return
        uv = self.half(self.uv)
        for k in range(n - 1):
            uv = self.full(self._kick(uv))
            self._guard(uv, k + 1)
        self.uv = self.half(self._kick(uv))
        self._guard(self.uv, n)

    def state(self) -> DnlseState:
        return DnlseState(self.uv[0], self.uv[1], self.steps_done * self.cfg.tau)

    def psi(self):
        return dnlse_reconstruct(self.state(), self.cfg.delta, self.rule)


class _RK4(_Integrator):
    scheme = "rk4"

    def __init__(self, cfg, psi0, rule):
        super().__init__(cfg, psi0, rule)
        self.params = DnlseParams(cfg.delta, cfg.tau, cfg.M)
        self.state = np.asarray(psi0, dtype=complex)

    def _advance(self, n):
        for k in range(n):
            try:
                self.state = rk4_reference_step(self.state, self.params, self.rule)
            except DivergenceError:
                raise DivergenceError("rk4 diverged", step=k + 1) from None

    def psi(self):
        return self.state


class _CrankNicolson(_RK4):
    scheme = "cn"

    def __init__(self, cfg, psi0, rule):
        super().__init__(cfg, psi0, rule)
        self.factor = build_cn_factor(cfg.M, cfg.tau)

    def _advance(self, n):
        for k in range(n):
            try:
                self.state = cn_baseline_step(self.state, self.params, self.factor, self.rule)
            except DivergenceError:
                raise DivergenceError("cn diverged", step=k + 1) from None


_INTEGRATORS = {
    "lie": _CubicLie,
    "strang": _CubicStrang,
    "rtransform_strang": _RTransformStrang,
    "rk4": _RK4,
    "cn": _CrankNicolson,
}


def make_integrator(cfg: RunConfig, psi0=None, rule=None):
    rule = rule or gauss_hermite_rule(cfg.M)
    if psi0 is None:
        psi0 = initial_preset(cfg.initial or DEFAULT_INITIAL[cfg.equation], cfg.M, rule)
    return _INTEGRATORS[cfg.scheme](cfg, np.asarray(psi0, dtype=complex), rule)


# -- errors and references ---------------------------------------------------


def nodal_l2_error(psi, reference_coeffs, rule: QuadratureRule) -> float:
    """Christoffel-weighted nodal L^2 distance to a reference of any length."""
    ref = np.asarray(reference_coeffs)
    ref_nodal = ref @ eval_hermite_functions(rule.nodes, ref.shape[-1])
    diff = synthesize_at_nodes(psi, rule) - ref_nodal
    return float(np.sqrt(np.dot(rule.christoffel, diff.real**2 + diff.imag**2)))


def _mass(psi, rule):
    nodal = synthesize_at_nodes(psi, rule)
    return float(np.dot(rule.christoffel, nodal.real**2 + nodal.imag**2))


@dataclass(frozen=True)
class Reference:
    times: np.ndarray
    coeffs: np.ndarray

    def at(self, t: float) -> np.ndarray:
        idx = np.flatnonzero(np.abs(self.times - t) <= 1e-9 * max(1.0, abs(t)))
        if idx.size == 0:
            raise KeyError(f"reference has no snapshot at t={t!r}")
        return self.coeffs[idx[0]]


def default_reference_config(cfg: RunConfig) -> RunConfig:
    """RK4 with M_ref = max(400, M), tau_ref = 1e-4 for DNLS; fine-step Strang for cubic NLS."""
    base = cfg.with_(output="", snapshot="", coeffs="")
    if cfg.equation == "dnlse":
        return base.with_(scheme="rk4", M=max(400, cfg.M), tau=1e-4)
    return base.with_(scheme="strang", tau=1e-5)


def reference_solution(ref_cfg: RunConfig, times, use_cache: bool = True) -> Reference:
    """Run ``ref_cfg`` and keep snapshots at ``times`` (each must be a multiple of its tau)."""
    times = np.array(sorted(set(float(t) for t in times)))
    steps = np.rint(times / ref_cfg.tau).astype(int)
    off_grid = np.abs(steps * ref_cfg.tau - times) > 1e-9 * np.maximum(1.0, times)
    if np.any(off_grid):
        raise ValueError(f"times {times[off_grid].tolist()} are not multiples of tau_ref={ref_cfg.tau}")

    key = cache.cache_key(format_config(ref_cfg, include_outputs=False), repr(steps.tolist()))
    if use_cache:
        stored = cache.load_array(key)
        if stored is not None and stored.shape == (times.size, ref_cfg.M):
            return Reference(times, stored)

    log.info("computing reference %s for %d snapshot(s)", ref_cfg.scheme, times.size)
    integ = make_integrator(ref_cfg)
    snaps = np.empty((times.size, ref_cfg.M), dtype=complex)
    done = 0
    for i, target in enumerate(steps):
        integ.advance(int(target - done))
        done = int(target)
        snaps[i] = integ.psi()
    if use_cache:
        cache.store_array(key, snaps)
    return Reference(times, snaps)


# -- runs ----------------------------------------------------------------------


def run_evolution(cfg: RunConfig, reference: Reference | None = None, psi0=None,
                  write_outputs: bool = True) -> RunResult:
    """Step ``cfg.scheme`` from 0 to ``n_steps * tau``, recording diagnostics.

    Records are taken at step 0, every ``record_interval`` steps and at the
    final step.  ``l2_error`` is NaN where no reference snapshot exists.
    """
    start = time.perf_counter()
    rule = gauss_hermite_rule(cfg.M)
    integ = make_integrator(cfg, psi0, rule)
    n_total = cfg.n_steps
    if abs(n_total * cfg.tau - cfg.T) > 1e-9 * max(1.0, cfg.T):
        log.warning("T/tau is not an integer; running %d steps to t=%r", n_total, n_total * cfg.tau)

    records = []

    def record(psi, step):
        t = step * cfg.tau
        err = math.nan
        if reference is not None:
            try:
                err = nodal_l2_error(psi, reference.at(t), rule)
            except KeyError:
                pass
        records.append(ErrorRecord(t, err, _mass(psi, rule), sigma_norm(psi, 1), time.perf_counter() - start))

    psi = integ.psi()
    record(psi, 0)
    step = 0
    while step < n_total:
        chunk = min(cfg.record_interval, n_total - step)
        integ.advance(chunk)
        step += chunk
        psi = integ.psi()
        record(psi, step)

    result = RunResult(cfg, records, psi, n_total * cfg.tau, time.perf_counter() - start, rule)
    if write_outputs:
        write_run_outputs(result)
    return result


def write_run_outputs(result: RunResult) -> None:
    cfg = result.config
    if cfg.output:
        write_table(cfg.output, RECORD_HEADER, (r.row() for r in result.records))
    if cfg.snapshot:
        write_nodal_snapshot(cfg.snapshot, result.rule.nodes, synthesize_at_nodes(result.final, result.rule))
    if cfg.coeffs:
        write_coefficients(cfg.coeffs, result.final)


def final_error(cfg: RunConfig, reference: Reference):
    """Run without intermediate records and return (final error, wall seconds)."""
    start = time.perf_counter()
    rule = gauss_hermite_rule(cfg.M)
    integ = make_integrator(cfg, None, rule)
    integ.advance(cfg.n_steps)
    psi = integ.psi()
    elapsed = time.perf_counter() - start
    return nodal_l2_error(psi, reference.at(cfg.final_time), rule), elapsed


def clear_operator_caches() -> None:
    operators.build_free_propagator.cache_clear()
    operators.laplacian_spectrum.cache_clear()


# -- studies -------------------------------------------------------------------


def fit_slope(taus, errors) -> float:
    """Least-squares slope of log(error) against log(tau) over finite, positive errors."""
    taus = np.asarray(taus, dtype=float)
    errors = np.asarray(errors, dtype=float)
    ok = np.isfinite(errors) & (errors > 0)
    if np.count_nonzero(ok) < 2:
        return math.nan
    return float(np.polyfit(np.log(taus[ok]), np.log(errors[ok]), 1)[0])


@dataclass
class StudyResult:
    taus: list
    errors: list
    cpu_seconds: list
    slope: float

    def rows(self):
        return [[t, e, c, self.slope] for t, e, c in zip(self.taus, self.errors, self.cpu_seconds)]


def convergence_study(base: RunConfig, taus, ref_cfg: RunConfig, strict: bool = True,
                      use_cache: bool = True, output: str | None = None) -> StudyResult:
    """Final-time errors of ``base`` over a tau ladder, plus the fitted log-log slope.

    With ``strict`` the reference step must be at least 10x below min(taus).
    Diverged runs get error = inf and are left out of the fit.
    """
    taus = [float(t) for t in taus]
    if not taus:
        raise ValueError("empty tau list")
    if strict and ref_cfg.tau * 10 > min(taus) * (1 + 1e-12):
        raise ValueError(f"reference tau {ref_cfg.tau} must be at least 10x smaller than min tau {min(taus)}")

    cfgs = [base.with_(tau=t) for t in taus]
    references = {}
    if strict:
        ref = reference_solution(ref_cfg, sorted({c.final_time for c in cfgs}), use_cache=use_cache)
    errors, cpu = [], []
    for c in cfgs:
        if strict:
            reference = ref
        else:
            key = (c.tau, c.final_time)
            if key not in references:
                references[key] = reference_solution(ref_cfg.with_(tau=c.tau), [c.final_time], use_cache=use_cache)
            reference = references[key]
        try:
            err, secs = final_error(c, reference)
        except DivergenceError as exc:
            warnings.warn(f"tau={c.tau}: {exc}; excluded from the fit", RuntimeWarning, stacklevel=2)
            err, secs = math.inf, math.nan
        errors.append(err)
        cpu.append(secs)
    result = StudyResult(taus, errors, cpu, fit_slope(taus, errors))
    if output:
        write_table(output, STUDY_HEADER, result.rows())
    return result


def benchmark(cfgs, reference_cfg: RunConfig | None = None, repeats: int = 1,
              use_cache: bool = True, output: str | None = None):
    """Rows ``(scheme, tau, M, final_error, cpu_seconds)`` for each config.

    The timing of each run includes building its propagator or CN factor;
    operator caches are cleared first.  With ``repeats > 1`` the smallest
    time is kept (errors are identical across repeats).
    """
    cfgs = list(cfgs)
    if len(cfgs) < 2:
        raise ValueError(f"need ≥ 2 configs, got {len(cfgs)}")
    refs = {}
    rows = []
    for c in cfgs:
        rc = reference_cfg or default_reference_config(c)
        key = (format_config(rc, include_outputs=False), c.final_time)
        if key not in refs:
            refs[key] = reference_solution(rc, [c.final_time], use_cache=use_cache)
        best, err = math.inf, math.nan
        for _ in range(max(1, repeats)):
            clear_operator_caches()
            try:
                err, secs = final_error(c, refs[key])
            except DivergenceError:
                err, secs = math.inf, math.nan
                break
            best = min(best, secs)
        rows.append([c.scheme, c.tau, c.M, err, best if math.isfinite(best) else math.nan])
    if output:
        write_table(output, BENCH_HEADER, rows)
    return rows
