"""Absorption-filtered field moments.

The detected (quantum-well) field is the source field weighted by
sqrt(a(omega)) per frequency component.  For steady-state moments of total
operator order m+n <= 2 this reduces to three closed expressions:

    <A>_q      = sqrt(a(0)) <A>_x
    <A^dag A>_q = int a(omega) S_x(omega) domega   (delta part: a(0) |<A>_x|^2)
    <A^2>_q    = a(0) <A>_x^2
                 + (1/pi) int domega sqrt(a(omega) a(-omega))
                           int_0^inf dtau cos(omega tau) fluct_2(tau)

The coherent (constant-in-tau) pieces are integrated analytically before any
transform, so the delta-function algebra is exact; only decaying fluctuations
meet the quadrature grid.  Higher orders are out of scope and rejected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedOrderError
from .qrt import CorrelationTrace
from .spectra import AbsorptionModel, Spectrum, absorption, halfline_fourier

__all__ = ["MomentSet", "coherent_moment_q", "intensity_q",
           "anomalous_moment_q", "filtered_moment"]


@dataclass(frozen=True)
class MomentSet:
    """Steady-state moments of the bare (x) and filtered (q) fields."""

    mean_x: complex
    mean_q: complex
    intensity_x: float
    intensity_q: float
    anom_x: complex
    anom_q: complex

    def __post_init__(self):
        for tag in ("x", "q"):
            mean = getattr(self, f"mean_{tag}")
            inten = getattr(self, f"intensity_{tag}")
            if inten < abs(mean) ** 2 - 1e-10:
                raise ValueError(
                    f"intensity_{tag} = {inten:.6e} below coherent part {abs(mean) ** 2:.6e}")
        if self.intensity_q > self.intensity_x + 1e-10:
            raise ValueError(
                f"filtered intensity {self.intensity_q:.6e} exceeds source "
                f"intensity {self.intensity_x:.6e}")


def coherent_moment_q(mean_x: complex, model: AbsorptionModel) -> complex:
    """sqrt(a(0)) <A>_x; the phase is untouched by filtering."""
    return complex(np.sqrt(absorption(0.0, model)) * mean_x)


def intensity_q(s_x: Spectrum, model: AbsorptionModel) -> float:
    """Absorption-weighted spectral power plus the filtered Rayleigh weight."""
    a = absorption(s_x.omega, model)
    fluct_part = float(np.trapezoid(a * s_x.density, s_x.omega))
    return fluct_part + float(absorption(0.0, model)) * s_x.delta_weight


def _symmetric_cosine_transform(c2: CorrelationTrace, omega_grid: np.ndarray) -> np.ndarray:
    """int_0^inf cos(omega tau) fluct(tau) dtau on a symmetric grid."""
    omega_grid = np.asarray(omega_grid, dtype=float)
    if np.max(np.abs(omega_grid + omega_grid[::-1])) > 1e-9 * max(abs(omega_grid[-1]), 1.0):
        raise ValueError("anomalous filtering needs an omega grid symmetric about 0")
    transform = halfline_fourier(c2.fluct, c2.dtau, omega_grid)
    return 0.5 * (transform + transform[::-1])


def anomalous_moment_q(c2: CorrelationTrace, model: AbsorptionModel,
                       omega_grid: np.ndarray) -> complex:
    """Filtered <A^2>: frequencies enter pairwise symmetric about the laser."""
    if c2.kind != "a_a":
        raise ValueError(f"anomalous moment needs an a_a trace, got {c2.kind!r}")
    if model.mode != "constant":
        needed = abs(model.delta) + 2.0 * model.gamma
        if -omega_grid[0] < needed or omega_grid[-1] < needed:
            raise ValueError(
                f"omega grid must cover both absorption lobes out to |omega| ~ {needed:.3g} meV")
    cosine = _symmetric_cosine_transform(c2, np.asarray(omega_grid, dtype=float))
    weight = np.sqrt(absorption(omega_grid, model) * absorption(-np.asarray(omega_grid), model))
    fluct_part = np.trapezoid(weight * cosine, omega_grid) / np.pi
    coherent_part = float(absorption(0.0, model)) * c2.asymptote
    return complex(coherent_part + fluct_part)


def filtered_moment(kind: str, *, model: AbsorptionModel,
                    mean_x: complex | None = None,
                    s_x: Spectrum | None = None,
                    c2: CorrelationTrace | None = None,
                    omega_grid: np.ndarray | None = None) -> complex:
    """Single entry point for the filtered moments of order m+n <= 2."""
    if kind == "mean":
        if mean_x is None:
            raise ValueError("mean needs mean_x")
        return coherent_moment_q(mean_x, model)
    if kind == "intensity":
        if s_x is None:
            raise ValueError("intensity needs the source spectrum s_x")
        return complex(intensity_q(s_x, model))
    if kind == "anom":
        if c2 is None or omega_grid is None:
            raise ValueError("anom needs the a_a trace and an omega grid")
        return anomalous_moment_q(c2, model, omega_grid)
    raise UnsupportedOrderError(
        f"filtered moment {kind!r} not implemented: only total operator order "
        "m+n <= 2 (mean, intensity, anom) is supported")
