"""Squeezing variances, nonclassicality witnesses, and phase diagnostics.

The phase-optimized normally-ordered field variance, in units of the squared
source coupling, is

    var = 2 ( <A^dag A> - |<A>|^2 - |<A>^2 - <A^2>| );

negative values certify squeezing.  A second witness, intensity minus the
modulus of the anomalous moment, goes negative only for nonclassical light.
Both formulas apply identically to bare and filtered moment triples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import UndefinedPhaseError

__all__ = ["squeezing_variance", "anomalous_nonclassicality",
           "degree_of_coherence", "wrap_phase", "phase_report",
           "PhaseReport", "ObservableRow"]


def squeezing_variance(mean: complex, intensity: float, anom: complex) -> float:
    """2(intensity - |mean|^2 - |mean^2 - anom|); negative certifies squeezing."""
    return 2.0 * (intensity - abs(mean) ** 2 - abs(mean ** 2 - anom))


def anomalous_nonclassicality(intensity: float, anom: complex) -> float:
    """intensity - |anom|; negative certifies nonclassicality."""
    return intensity - abs(anom)


def degree_of_coherence(mean: complex, intensity: float) -> float:
    """Coherent fraction |<A>|^2 / <A^dag A>, defined as 1 for the vacuum."""
    if intensity < 0.0:
        raise ValueError(f"intensity must be nonnegative, got {intensity}")
    coherent = abs(mean) ** 2
    if intensity == 0.0:
        if coherent == 0.0:
            return 1.0
        raise ValueError("zero intensity with nonzero mean is inconsistent")
    ratio = coherent / intensity
    if ratio > 1.0 + 1e-10:
        raise ValueError(
            f"degree of coherence {ratio:.12f} exceeds 1; moments are inconsistent")
    return min(ratio, 1.0)


def wrap_phase(angle: float) -> float:
    """Wrap to the principal branch (-pi, pi]."""
    wrapped = (angle + math.pi) % (2.0 * math.pi) - math.pi
    if wrapped == -math.pi:
        wrapped = math.pi
    return wrapped


@dataclass(frozen=True)
class PhaseReport:
    """Raw phases of <A>^2 and both anomalous moments, plus shortest-arc gaps."""

    mean_sq: float
    anom_x: float
    anom_q: float
    gap_x: float
    gap_q: float


def phase_report(mean: complex, anom_x: complex, anom_q: complex) -> PhaseReport:
    """Principal-branch phases and their distances to the coherent phase."""
    for name, z in (("mean", mean), ("anom_x", anom_x), ("anom_q", anom_q)):
        if abs(z) < 1e-12:
            raise UndefinedPhaseError(f"phase of {name} undefined: modulus {abs(z):.3e} < 1e-12")
    mean_sq = math.atan2((mean ** 2).imag, (mean ** 2).real)
    ph_x = math.atan2(anom_x.imag, anom_x.real)
    ph_q = math.atan2(anom_q.imag, anom_q.real)
    return PhaseReport(
        mean_sq=mean_sq, anom_x=ph_x, anom_q=ph_q,
        gap_x=abs(wrap_phase(ph_x - mean_sq)),
        gap_q=abs(wrap_phase(ph_q - mean_sq)),
    )


@dataclass(frozen=True)
class ObservableRow:
    """Derived observables of one parameter point (one row of a power sweep)."""

    power: float
    var_x: float
    var_q: float
    ncl_x: float
    ncl_q: float
    dcoh_x: float
    dcoh_q: float
    phase_mean_sq: float
    phase_anom_x: float
    phase_anom_q: float
    gap_x: float
    gap_q: float
