"""Susceptibility, absorption line, and emission spectra.

Frequencies are rotating-frame: omega = 0 is the laser, the exciton resonance
sits at omega = delta.  The emission spectrum splits into an exact delta
weight at omega = 0 (coherent Rayleigh scattering, weight |<A>|^2) and a
smooth fluctuation density

    S(omega) = (1/pi) Re  int_0^inf  dtau  e^{+i omega tau} fluct(tau),

the sign chosen so that an emitter detuned by +delta radiates at positive
rotating-frame frequencies.  The half-line transform is evaluated by a
chirp-z (zoom) FFT of the trapezoid-weighted fluctuation trace directly on
the requested frequency grid, so no interpolation between FFT bins occurs.

When the frequency grid spans exactly one Nyquist period of the tau grid,
the discrete transform and the trapezoid quadrature satisfy a Parseval
identity that makes  integral(S) + delta_weight  reproduce the equal-time
moment at floating-point accuracy; `moment_omega_grid` constructs that grid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import czt, fftconvolve

from .errors import GridError, ModelError, SpectralLeakageError
from .model import PhysParams
from .qrt import CorrelationTrace

__all__ = ["Spectrum", "AbsorptionModel", "susceptibility", "absorption",
           "emission_spectrum", "qw_spectrum", "detector_convolve",
           "moment_omega_grid", "figure_omega_grid", "halfline_fourier",
           "write_spectrum_csv"]

#: density below this (meV^-1) triggers a clipped-negative warning
NEGATIVE_DENSITY_TOL = -1e-10


def susceptibility(omega, p: PhysParams):
    """Single-oscillator susceptibility f / (omega - delta - i gamma/2)."""
    omega = np.asarray(omega, dtype=float)
    chi = p.f / (omega - p.delta - 0.5j * p.gamma)
    return chi if chi.ndim else complex(chi)


@dataclass(frozen=True)
class AbsorptionModel:
    """Absorbed fraction a(omega) in [0, 1].

    thin_sheet: a radiating sheet with reflection r = i kappa chi and
    transmission t = 1 + r, giving a Lorentzian line capped at peak 1/2;
    lorentzian: a Lorentzian with free peak height; constant: flat filter
    (the transparent-medium and scaling-law limit).
    """

    mode: str
    delta: float = 0.0
    gamma: float = 1.0
    f: float = 1.0
    kappa: float | None = None
    a_peak: float | None = None
    value: float | None = None

    def __post_init__(self):
        if self.mode == "thin_sheet":
            if self.kappa is None or self.kappa <= 0:
                raise ModelError(f"thin_sheet needs kappa > 0, got {self.kappa}")
            if self.kappa * self.f >= self.gamma / 2.0:
                raise ModelError(
                    f"thin_sheet needs kappa*f < gamma/2 for nonnegative absorption "
                    f"(kappa*f = {self.kappa * self.f:.4g}, gamma/2 = {self.gamma / 2.0:.4g})")
        elif self.mode == "lorentzian":
            if self.a_peak is None or not (0.0 < self.a_peak <= 1.0):
                raise ModelError(f"lorentzian needs a_peak in (0, 1], got {self.a_peak}")
        elif self.mode == "constant":
            if self.value is None or not (0.0 <= self.value <= 1.0):
                raise ModelError(f"constant needs value in [0, 1], got {self.value}")
        else:
            raise ModelError(f"unknown absorption mode {self.mode!r}")

    @classmethod
    def thin_sheet(cls, p: PhysParams, kappa: float | None = None) -> "AbsorptionModel":
        """Default kappa = gamma/(4 f) puts the peak at its maximum 1/2."""
        if kappa is None:
            kappa = p.gamma / (4.0 * p.f)
        return cls(mode="thin_sheet", delta=p.delta, gamma=p.gamma, f=p.f, kappa=kappa)

    @classmethod
    def lorentzian(cls, p: PhysParams, a_peak: float) -> "AbsorptionModel":
        return cls(mode="lorentzian", delta=p.delta, gamma=p.gamma, f=p.f, a_peak=a_peak)

    @classmethod
    def constant(cls, value: float) -> "AbsorptionModel":
        return cls(mode="constant", value=value)


def absorption(omega, model: AbsorptionModel):
    """a(omega), evaluated analytically (vectorized)."""
    omega = np.asarray(omega, dtype=float)
    if model.mode == "constant":
        a = np.full(omega.shape, model.value, dtype=float)
    elif model.mode == "thin_sheet":
        kf = model.kappa * model.f
        a = kf * (model.gamma - 2.0 * kf) / ((omega - model.delta) ** 2 + model.gamma ** 2 / 4.0)
    else:  # lorentzian
        hw = model.gamma / 2.0
        a = model.a_peak * hw ** 2 / ((omega - model.delta) ** 2 + hw ** 2)
    return a if a.ndim else float(a)


def halfline_fourier(values: np.ndarray, dtau: float, omega_grid: np.ndarray) -> np.ndarray:
    """Trapezoid approximation of int_0^T e^{+i omega tau} v(tau) dtau
    on a uniform omega grid, via a chirp-z transform."""
    omega_grid = np.asarray(omega_grid, dtype=float)
    if omega_grid.ndim != 1 or omega_grid.size < 2:
        raise ValueError("omega grid must be 1-D with at least two points")
    dom = omega_grid[1] - omega_grid[0]
    if dom <= 0 or np.max(np.abs(np.diff(omega_grid) - dom)) > 1e-9 * dom:
        raise ValueError("omega grid must be uniform and increasing")
    g = np.asarray(values, dtype=complex).copy()
    g[0] *= 0.5
    g[-1] *= 0.5
    return dtau * czt(g, m=omega_grid.size,
                      w=np.exp(1j * dom * dtau),
                      a=np.exp(-1j * omega_grid[0] * dtau))


def moment_omega_grid(dtau: float, n_intervals: int = 8192) -> np.ndarray:
    """Symmetric grid spanning exactly one Nyquist period [-pi/dtau, pi/dtau].

    Over this window the discrete transform obeys a Parseval identity, so
    spectral moments close exactly against equal-time moments.  Even interval
    count keeps omega = 0 on the grid.
    """
    if n_intervals < 2 or n_intervals % 2:
        raise ValueError(f"n_intervals must be even and >= 2, got {n_intervals}")
    w = np.pi / dtau
    return np.linspace(-w, w, n_intervals + 1)


def figure_omega_grid(p: PhysParams, halfwidth_gammas: float = 12.0,
                      n_points: int = 2 ** 14) -> np.ndarray:
    """Plot window centered on the exciton line."""
    hw = halfwidth_gammas * p.gamma
    return np.linspace(p.delta - hw, p.delta + hw, n_points)


@dataclass(frozen=True)
class Spectrum:
    """Real spectral density on a uniform grid plus an exact coherent
    delta weight at omega = 0."""

    omega: np.ndarray
    density: np.ndarray
    delta_weight: float

    def integral(self) -> float:
        """Trapezoid integral of the density plus the delta weight."""
        return float(np.trapezoid(self.density, self.omega) + self.delta_weight)

    @property
    def spacing(self) -> float:
        return float(self.omega[1] - self.omega[0])


def emission_spectrum(c1: CorrelationTrace, omega_grid: np.ndarray, *,
                      require_normalized: bool = True,
                      norm_rtol: float = 1e-4) -> Spectrum:
    """Fluctuation density plus Rayleigh delta weight from <A^dag(0) A(tau)>.

    With require_normalized the total power is checked against the equal-time
    moment; failure means the window or tau range leaks spectral weight.
    """
    if c1.kind != "adag_a":
        raise ValueError(f"emission spectrum needs an adag_a trace, got {c1.kind!r}")
    if abs(c1.asymptote.imag) > 1e-10 * max(1.0, abs(c1.asymptote)):
        raise ValueError(f"coherent weight must be real, got {c1.asymptote}")
    transform = halfline_fourier(c1.fluct, c1.dtau, omega_grid)
    density = transform.real / np.pi
    low = density.min()
    if low < NEGATIVE_DENSITY_TOL:
        warnings.warn(f"clipping spectral density minimum {low:.3e} to zero",
                      RuntimeWarning, stacklevel=2)
    density = np.maximum(density, 0.0)
    spec = Spectrum(omega=np.asarray(omega_grid, dtype=float),
                    density=density, delta_weight=float(c1.asymptote.real))
    total = c1.values[0].real
    defect = abs(spec.integral() - total) / max(abs(total), 1e-300)
    if require_normalized and defect > norm_rtol:
        raise SpectralLeakageError(
            f"spectrum holds {spec.integral():.6e} of the equal-time moment {total:.6e} "
            f"(relative defect {defect:.2e} > {norm_rtol:.0e}); widen the omega window "
            "toward the tau-grid Nyquist period or increase tau_max")
    return spec


def qw_spectrum(s_x: Spectrum, model: AbsorptionModel) -> Spectrum:
    """Detected spectrum: absorption times source density, delta weight
    scaled by the absorption at the laser frequency."""
    a = absorption(s_x.omega, model)
    return Spectrum(omega=s_x.omega, density=a * s_x.density,
                    delta_weight=float(absorption(0.0, model)) * s_x.delta_weight)


def _detector_kernel(lags: np.ndarray, width: float, shape: str) -> np.ndarray:
    hw = width / 2.0
    if shape == "lorentzian":
        k = (hw / np.pi) / (lags ** 2 + hw ** 2)
    elif shape == "gaussian":
        sigma = hw / np.sqrt(2.0 * np.log(2.0))
        k = np.exp(-0.5 * (lags / sigma) ** 2) / (sigma * np.sqrt(2.0 * np.pi))
    else:
        raise ValueError(f"unknown detector shape {shape!r}")
    return k


def detector_convolve(s: Spectrum, width: float, shape: str = "lorentzian") -> Spectrum:
    """Smear with a unit-area line of HWHM width/2 and fold the delta weight
    into the density.  Rendering only; never feed the result to moments.

    Kernel mass falling outside the window is compensated per source point,
    so the windowed power is conserved even for wide Lorentzian tails.
    """
    if width <= 0:
        raise ValueError(f"detector width must be positive, got {width}")
    dom = s.spacing
    if dom >= width / 4.0:
        raise GridError(
            f"grid spacing {dom:.3e} meV too coarse for detector width {width:.3e} meV "
            "(need spacing < width/4)")
    n = s.omega.size
    lags = dom * np.arange(-(n - 1), n)
    kernel = _detector_kernel(lags, width, shape)
    kernel /= kernel.sum() * dom
    in_window = fftconvolve(np.ones(n), kernel, mode="same") * dom
    smeared = fftconvolve(s.density / in_window, kernel, mode="same") * dom
    if s.delta_weight != 0.0:
        line = _detector_kernel(s.omega - 0.0, width, shape)
        smeared = smeared + s.delta_weight * line / (line.sum() * dom)
    return Spectrum(omega=s.omega, density=np.maximum(smeared, 0.0), delta_weight=0.0)


def write_spectrum_csv(path, s: Spectrum, *, kind: str = "density") -> None:
    """CSV with grid metadata in comment lines; 17 significant digits."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# delta_weight = {s.delta_weight:.16e}\n")
        fh.write(f"# omega_min = {s.omega[0]:.16e}, omega_max = {s.omega[-1]:.16e}, "
                 f"points = {s.omega.size}\n")
        fh.write(f"omega_meV,{kind}\n")
        for w, v in zip(s.omega, s.density):
            fh.write(f"{w:.16e},{v:.16e}\n")
