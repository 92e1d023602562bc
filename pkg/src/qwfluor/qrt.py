"""Steady-state two-time correlators by quantum regression.

For tau >= 0 the regression rule turns a two-time average into propagation of
an operator-modified steady state under the same Liouvillian:

    <A^dag(0) A(tau)>  =  Tr[ A  e^{L tau} (rho_ss A^dag) ]
    <A(tau) A(0)>      =  Tr[ A  e^{L tau} (A rho_ss) ]

Both are computed with a single precomputed step propagator e^{L d_tau}
applied repeatedly, which is exact for the uniform grids used here.  Each
trace is split into its non-decaying part (the product of steady one-point
moments) and the decaying fluctuation part; the split is done analytically so
no tail fitting ever enters.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import GridError, StabilityError
from .fock import expectation, trace_dual, vectorize, unvectorize
from .model import PhysParams

__all__ = ["CorrelationTrace", "default_tau_grid", "step_propagator",
           "evolve_operator", "correlator_adag_a", "correlator_a_a",
           "both_correlators", "write_correlation_csv"]

#: fluctuations must have decayed to this fraction of their peak at the grid end
DECAY_TOL = 1e-8


@dataclass(frozen=True)
class CorrelationTrace:
    """Two-time correlator on a uniform tau >= 0 grid.

    values[0] is the equal-time moment; asymptote is the factorized
    long-time limit; fluct = values - asymptote decays to zero.
    Negative tau follows from conjugation symmetry and is never stored.
    """

    kind: str  # 'adag_a' or 'a_a'
    tau_grid: np.ndarray
    values: np.ndarray
    asymptote: complex
    fluct: np.ndarray

    @property
    def dtau(self) -> float:
        return float(self.tau_grid[1] - self.tau_grid[0])


def default_tau_grid(p: PhysParams, omega_span: float, *,
                     tau_max_factor: float = 40.0,
                     dtau_cap_factor: float = 0.05,
                     oversample: float = 40.0) -> np.ndarray:
    """Uniform tau grid long enough for decay and fine enough for the
    spectral window of width omega_span (meV)."""
    if omega_span <= 0:
        raise ValueError(f"omega_span must be positive, got {omega_span}")
    dtau = min(dtau_cap_factor / p.gamma, 2.0 * np.pi / (oversample * omega_span))
    tau_max = tau_max_factor / p.gamma
    n_steps = int(np.ceil(tau_max / dtau - 1e-12))
    return dtau * np.arange(n_steps + 1)


def _check_grid(tau_grid: np.ndarray) -> float:
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.ndim != 1 or tau_grid.size < 2:
        raise ValueError("tau grid must be 1-D with at least two points")
    if abs(tau_grid[0]) > 1e-15:
        raise ValueError("tau grid must start at 0")
    steps = np.diff(tau_grid)
    dtau = steps[0]
    if dtau <= 0 or np.max(np.abs(steps - dtau)) > 1e-9 * dtau:
        raise ValueError("tau grid must be uniform and increasing")
    return float(dtau)


def step_propagator(liouvillian: np.ndarray, dtau: float, *,
                    norm_cap: float = 10.0) -> np.ndarray:
    """e^{L dtau} by scaling and squaring, with a growth guard.

    A dissipative generator keeps the induced 1-norm of the step near one; a
    grossly larger norm means the generator (or dtau) is wrong.
    """
    if dtau <= 0:
        raise ValueError(f"dtau must be positive, got {dtau}")
    prop = expm(liouvillian * dtau)
    norm = np.linalg.norm(prop, 1)
    if not np.isfinite(norm) or norm > norm_cap:
        raise StabilityError(
            f"step propagator 1-norm {norm:.3e} exceeds {norm_cap}; generator is not dissipative")
    return prop


def evolve_operator(liouvillian: np.ndarray, x0: np.ndarray,
                    tau_grid: np.ndarray) -> np.ndarray:
    """e^{L tau} applied to vec(x0) at every grid point, as (M, d, d) matrices."""
    dtau = _check_grid(tau_grid)
    prop = step_propagator(liouvillian, dtau)
    d = x0.shape[0]
    out = np.empty((len(tau_grid), d, d), dtype=complex)
    vec = vectorize(x0).astype(complex)
    for j in range(len(tau_grid)):
        out[j] = unvectorize(vec)
        if j < len(tau_grid) - 1:
            vec = prop @ vec
    return out


def _propagate_traces(prop: np.ndarray, x0_columns: np.ndarray,
                      dual: np.ndarray, n_points: int,
                      growth_cap: float) -> np.ndarray:
    """Record dual @ x for every step of x -> prop @ x.  x0_columns is
    (d^2, k); returns (n_points, k)."""
    x = x0_columns.astype(complex)
    out = np.empty((n_points, x.shape[1]), dtype=complex)
    scale = max(np.max(np.abs(dual @ x)), 1.0)
    for j in range(n_points):
        out[j] = dual @ x
        if np.max(np.abs(out[j])) > growth_cap * scale:
            raise StabilityError(
                f"correlator grew to {np.max(np.abs(out[j])):.3e} at step {j}; propagation unstable")
        if j < n_points - 1:
            x = prop @ x
    return out


def _finish_trace(kind: str, tau_grid: np.ndarray, values: np.ndarray,
                  asymptote: complex, equal_time: complex) -> CorrelationTrace:
    if abs(values[0] - equal_time) > 1e-10 * max(1.0, abs(equal_time)):
        raise StabilityError(
            f"equal-time value {values[0]} disagrees with steady-state moment {equal_time}")
    fluct = values - asymptote
    peak = np.max(np.abs(fluct))
    # fluctuations at the solver-noise level never decay further; skip them
    floor = 1e-9 * (abs(values[0]) + abs(asymptote)) + 1e-300
    if abs(fluct[-1]) > max(DECAY_TOL * peak, floor):
        raise GridError(
            f"fluctuations not decayed at tau_max={tau_grid[-1]:.3g} "
            f"(|fluct| end/peak = {abs(fluct[-1]) / peak:.2e}); increase tau_max")
    return CorrelationTrace(kind=kind, tau_grid=np.asarray(tau_grid, dtype=float),
                            values=values, asymptote=complex(asymptote), fluct=fluct)


def correlator_adag_a(liouvillian: np.ndarray, rho_ss: np.ndarray,
                      a_op: np.ndarray, tau_grid: np.ndarray, *,
                      propagator: np.ndarray | None = None) -> CorrelationTrace:
    """<A^dag(0) A(tau)> with its coherent asymptote <A^dag><A> split off."""
    dtau = _check_grid(tau_grid)
    prop = propagator if propagator is not None else step_propagator(liouvillian, dtau)
    mean = expectation(rho_ss, a_op)
    ad = a_op.conj().T
    x0 = vectorize(rho_ss @ ad)[:, None]
    values = _propagate_traces(prop, x0, trace_dual(a_op), len(tau_grid), 10.0)[:, 0]
    return _finish_trace("adag_a", tau_grid, values, np.conj(mean) * mean,
                         expectation(rho_ss, ad @ a_op))


def correlator_a_a(liouvillian: np.ndarray, rho_ss: np.ndarray,
                   a_op: np.ndarray, tau_grid: np.ndarray, *,
                   propagator: np.ndarray | None = None) -> CorrelationTrace:
    """<A(tau) A(0)> (later time leftmost) with asymptote <A>^2 split off."""
    dtau = _check_grid(tau_grid)
    prop = propagator if propagator is not None else step_propagator(liouvillian, dtau)
    mean = expectation(rho_ss, a_op)
    x0 = vectorize(a_op @ rho_ss)[:, None]
    values = _propagate_traces(prop, x0, trace_dual(a_op), len(tau_grid), 10.0)[:, 0]
    return _finish_trace("a_a", tau_grid, values, mean * mean,
                         expectation(rho_ss, a_op @ a_op))


def both_correlators(liouvillian: np.ndarray, rho_ss: np.ndarray,
                     a_op: np.ndarray, tau_grid: np.ndarray
                     ) -> tuple[CorrelationTrace, CorrelationTrace]:
    """Both correlators in one propagation sweep with a shared step propagator."""
    dtau = _check_grid(tau_grid)
    prop = step_propagator(liouvillian, dtau)
    mean = expectation(rho_ss, a_op)
    ad = a_op.conj().T
    x0 = np.stack([vectorize(rho_ss @ ad), vectorize(a_op @ rho_ss)], axis=1)
    values = _propagate_traces(prop, x0, trace_dual(a_op), len(tau_grid), 10.0)
    c1 = _finish_trace("adag_a", tau_grid, values[:, 0], np.conj(mean) * mean,
                       expectation(rho_ss, ad @ a_op))
    c2 = _finish_trace("a_a", tau_grid, values[:, 1], mean * mean,
                       expectation(rho_ss, a_op @ a_op))
    return c1, c2


def write_correlation_csv(path, trace: CorrelationTrace) -> None:
    """Debug dump: tau, Re/Im of the correlator and of its fluctuation part."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau", "re", "im", "re_fluct", "im_fluct"])
        for t, v, fl in zip(trace.tau_grid, trace.values, trace.fluct):
            writer.writerow([f"{t:.16e}", f"{v.real:.16e}", f"{v.imag:.16e}",
                             f"{fl.real:.16e}", f"{fl.imag:.16e}"])
