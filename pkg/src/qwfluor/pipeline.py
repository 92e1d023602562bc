"""End-to-end evaluation of one parameter point and of power sweeps.

A point run is: pick (or accept) a Fock truncation, solve the steady state,
propagate both two-time correlators with one shared step propagator, build
the moment-window spectrum, filter the three second-order moments through the
absorption model, and derive the observables.  Sweeps fix one truncation for
all points (the maximum the anchors require) so curves are not jagged from a
changing basis, and run points in a thread pool: the heavy work is BLAS, which
releases the GIL, and every stage is a pure function of immutable inputs.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import bisect

from .fock import annihilation, build_liouvillian, choose_truncation, expectation, steady_state
from .filtering import MomentSet, anomalous_moment_q, coherent_moment_q, intensity_q
from .model import ParamTable, PhysParams, interpolate_params
from .observables import (ObservableRow, anomalous_nonclassicality,
                          degree_of_coherence, phase_report, squeezing_variance)
from .qrt import CorrelationTrace, both_correlators, default_tau_grid
from .spectra import (AbsorptionModel, Spectrum, absorption, detector_convolve,
                      emission_spectrum, figure_omega_grid, moment_omega_grid,
                      qw_spectrum)

__all__ = ["Numerics", "AbsorptionSpec", "PointResult", "compute_point",
           "sweep_truncation", "run_sweep_points", "find_zero_crossings",
           "evaluate_claims"]


@dataclass(frozen=True)
class Numerics:
    """Grid and truncation controls; defaults are production settings."""

    truncation_tol: float = 1e-10
    truncation: int | None = None          # fixed n_max override
    max_truncation: int = 64
    tau_max_factor: float = 40.0           # tau_max = factor / gamma
    dtau_cap_factor: float = 0.05          # dtau <= cap / gamma
    nyquist_oversample: float = 40.0       # dtau = 2 pi / (oversample * span)
    figure_halfwidth: float = 12.0         # half window in units of gamma
    figure_points: int = 2 ** 14
    moment_intervals: int = 8192
    moment_window: float | None = None     # half width (meV); None -> Nyquist period
    detector_width: float = 0.0107
    detector_shape: str = "lorentzian"
    enforce_normalization: bool = True
    norm_rtol: float = 1e-4

    def __post_init__(self):
        if self.truncation is not None and self.truncation < 1:
            raise ValueError(f"truncation must be >= 1, got {self.truncation}")
        for name in ("truncation_tol", "tau_max_factor", "dtau_cap_factor",
                     "nyquist_oversample", "figure_halfwidth", "detector_width",
                     "norm_rtol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.figure_points < 16:
            raise ValueError(f"figure_points must be >= 16, got {self.figure_points}")
        if self.moment_intervals < 2 or self.moment_intervals % 2:
            raise ValueError(f"moment_intervals must be even >= 2, got {self.moment_intervals}")
        if self.detector_shape not in ("lorentzian", "gaussian"):
            raise ValueError(f"unknown detector shape {self.detector_shape!r}")
        if self.moment_window is not None and self.moment_window <= 0:
            raise ValueError(f"moment_window must be positive, got {self.moment_window}")


@dataclass(frozen=True)
class AbsorptionSpec:
    """Absorption-model choice before it is bound to a parameter set."""

    mode: str = "thin_sheet"
    kappa: float | None = None    # thin_sheet; None -> gamma/(4 f)
    a_peak: float = 0.5           # lorentzian
    value: float = 1.0            # constant

    def bind(self, p: PhysParams) -> AbsorptionModel:
        if self.mode == "thin_sheet":
            return AbsorptionModel.thin_sheet(p, kappa=self.kappa)
        if self.mode == "lorentzian":
            return AbsorptionModel.lorentzian(p, a_peak=self.a_peak)
        if self.mode == "constant":
            return AbsorptionModel.constant(self.value)
        raise ValueError(f"unknown absorption mode {self.mode!r}")


@dataclass(frozen=True)
class PointResult:
    """Everything the CLI and the tests need from one parameter point."""

    params: PhysParams
    n_max: int
    top_populations: tuple[float, float]
    moments: MomentSet
    row: ObservableRow
    absorption_model: AbsorptionModel
    dtau: float
    tau_points: int
    moment_window: float
    c1: CorrelationTrace | None = None
    c2: CorrelationTrace | None = None
    spectra: dict = field(default_factory=dict)


def _omega_span(p: PhysParams, numerics: Numerics) -> float:
    return 2.0 * numerics.figure_halfwidth * p.gamma


def compute_point(p: PhysParams, absorption_spec: AbsorptionSpec,
                  numerics: Numerics = Numerics(), *,
                  n_max: int | None = None,
                  with_spectra: bool = False,
                  keep_traces: bool = False) -> PointResult:
    """Full pipeline for one parameter set."""
    if n_max is None:
        n_max = numerics.truncation
    if n_max is None:
        trunc = choose_truncation(p, numerics.truncation_tol, cap=numerics.max_truncation)
        n_max, top = trunc.n_max, trunc.top_populations
    else:
        top = (float("nan"), float("nan"))

    a_op = annihilation(n_max)
    ad = a_op.conj().T
    liouv = build_liouvillian(p, n_max)
    rho = steady_state(liouv)
    if np.isnan(top[0]):
        pops = np.diag(rho).real
        top = (float(pops[-2]), float(pops[-1]))

    mean_x = expectation(rho, a_op)
    intensity_x = expectation(rho, ad @ a_op).real
    anom_x = expectation(rho, a_op @ a_op)

    tau_grid = default_tau_grid(
        p, _omega_span(p, numerics),
        tau_max_factor=numerics.tau_max_factor,
        dtau_cap_factor=numerics.dtau_cap_factor,
        oversample=numerics.nyquist_oversample)
    c1, c2 = both_correlators(liouv, rho, a_op, tau_grid)
    dtau = c1.dtau

    nyquist = np.pi / dtau
    if numerics.moment_window is None:
        omega_mom = moment_omega_grid(dtau, numerics.moment_intervals)
        window = nyquist
    else:
        window = min(numerics.moment_window, nyquist)
        omega_mom = np.linspace(-window, window, numerics.moment_intervals + 1)

    model = absorption_spec.bind(p)
    s_x_mom = emission_spectrum(c1, omega_mom,
                                require_normalized=numerics.enforce_normalization,
                                norm_rtol=numerics.norm_rtol)
    mean_q = coherent_moment_q(mean_x, model)
    int_q = intensity_q(s_x_mom, model)
    anom_q = anomalous_moment_q(c2, model, omega_mom)

    moments = MomentSet(mean_x=mean_x, mean_q=mean_q,
                        intensity_x=intensity_x, intensity_q=int_q,
                        anom_x=anom_x, anom_q=anom_q)
    phases = phase_report(mean_x, anom_x, anom_q)
    var_x = squeezing_variance(mean_x, intensity_x, anom_x)
    var_q = squeezing_variance(mean_q, int_q, anom_q)
    # variance is bounded below by dropping every positive term
    for var, inten, tag in ((var_x, intensity_x, "x"), (var_q, int_q, "q")):
        if var < -2.0 * inten - 1e-10:
            raise ValueError(f"var_{tag} = {var:.6e} below its -2*intensity bound")
    row = ObservableRow(
        power=p.power if p.power is not None else float("nan"),
        var_x=var_x, var_q=var_q,
        ncl_x=anomalous_nonclassicality(intensity_x, anom_x),
        ncl_q=anomalous_nonclassicality(int_q, anom_q),
        dcoh_x=degree_of_coherence(mean_x, intensity_x),
        dcoh_q=degree_of_coherence(mean_q, int_q),
        phase_mean_sq=phases.mean_sq, phase_anom_x=phases.anom_x,
        phase_anom_q=phases.anom_q, gap_x=phases.gap_x, gap_q=phases.gap_q)

    spectra: dict = {}
    if with_spectra:
        omega_fig = figure_omega_grid(p, numerics.figure_halfwidth, numerics.figure_points)
        s_x_fig = emission_spectrum(c1, omega_fig, require_normalized=False)
        s_q_fig = qw_spectrum(s_x_fig, model)
        spectra["x"] = s_x_fig
        spectra["q"] = s_q_fig
        spectra["absorption"] = Spectrum(omega=omega_fig,
                                         density=absorption(omega_fig, model),
                                         delta_weight=0.0)
        spectra["x_detected"] = detector_convolve(s_x_fig, numerics.detector_width,
                                                  numerics.detector_shape)
        spectra["q_detected"] = detector_convolve(s_q_fig, numerics.detector_width,
                                                  numerics.detector_shape)

    return PointResult(params=p, n_max=n_max, top_populations=top,
                       moments=moments, row=row, absorption_model=model,
                       dtau=dtau, tau_points=len(tau_grid), moment_window=window,
                       c1=c1 if keep_traces else None,
                       c2=c2 if keep_traces else None,
                       spectra=spectra)


def sweep_truncation(table: ParamTable, powers: np.ndarray,
                     numerics: Numerics) -> int:
    """One truncation for a whole sweep: the maximum over the anchors inside
    the range and both range endpoints."""
    if numerics.truncation is not None:
        return numerics.truncation
    lo, hi = float(np.min(powers)), float(np.max(powers))
    probes = [lo, hi] + [float(r.power) for r in table.rows if lo <= r.power <= hi]
    best = 0
    for power in sorted(set(probes)):
        p = interpolate_params(table, power)
        best = max(best, choose_truncation(p, numerics.truncation_tol,
                                           cap=numerics.max_truncation).n_max)
    return best


def run_sweep_points(table: ParamTable, powers: np.ndarray,
                     absorption_spec: AbsorptionSpec,
                     numerics: Numerics = Numerics(), *,
                     workers: int = 4) -> list[PointResult]:
    """Pipeline at every power, in input order, with one shared truncation."""
    powers = np.asarray(powers, dtype=float)
    n_max = sweep_truncation(table, powers, numerics)

    def one(power: float) -> PointResult:
        return compute_point(interpolate_params(table, power), absorption_spec,
                             numerics, n_max=n_max)

    if workers <= 1:
        return [one(pw) for pw in powers]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, powers))


def find_zero_crossings(powers: np.ndarray, values: np.ndarray, *,
                        xtol: float = 0.01) -> list[float]:
    """Zero crossings of a sweep curve, located by bisection on its natural
    cubic spline (resolution well below 0.1 uW)."""
    powers = np.asarray(powers, dtype=float)
    values = np.asarray(values, dtype=float)
    spline = CubicSpline(powers, values, bc_type="natural")
    crossings = []
    for lo, hi in zip(powers[:-1], powers[1:]):
        flo, fhi = spline(lo), spline(hi)
        if flo == 0.0:
            crossings.append(float(lo))
        elif flo * fhi < 0.0:
            crossings.append(float(bisect(spline, lo, hi, xtol=xtol)))
    if values[-1] == 0.0:
        crossings.append(float(powers[-1]))
    return crossings


def evaluate_claims(results: list[PointResult]) -> dict:
    """Boolean verdicts of the sweep-wide ordering claims plus crossings."""
    rows = [r.row for r in results]
    powers = np.array([r.power for r in rows])
    var_x = np.array([r.var_x for r in rows])
    var_q = np.array([r.var_q for r in rows])
    ncl_x = np.array([r.ncl_x for r in rows])
    ncl_q = np.array([r.ncl_q for r in rows])
    int_x = np.array([r.moments.intensity_x for r in results])
    int_q = np.array([r.moments.intensity_q for r in results])

    slopes_q = np.diff(int_q) / np.diff(powers)
    saturates = bool(np.any(slopes_q <= 0.0) or slopes_q.min() < 0.05 * slopes_q[0])
    corr = float(np.corrcoef(powers, int_x)[0, 1])

    return {
        "variance_reduced_everywhere": bool(np.all(var_q < var_x - 1e-10)),
        "dcoh_increased_everywhere": bool(np.all(
            np.array([r.dcoh_q for r in rows]) > np.array([r.dcoh_x for r in rows]))),
        "phase_gap_smaller_everywhere": bool(np.all(
            np.array([r.gap_q for r in rows]) < np.array([r.gap_x for r in rows]))),
        "ncl_q_negative_interval": bool(np.any((ncl_q < 0.0) & (ncl_x > 0.0))),
        "intensity_q_saturates": saturates,
        "intensity_x_power_correlation": corr,
        "crossings_var_x": find_zero_crossings(powers, var_x),
        "crossings_var_q": find_zero_crossings(powers, var_q),
    }
