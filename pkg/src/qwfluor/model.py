"""Physical parameter sets and their interpolation against pump power.

Five quantities characterize one measurement: the exciton-exciton coupling G,
the collective Rabi frequency omega_r, the laser-exciton detuning delta
(exciton resonance sits at laser frequency + delta), the spontaneous emission
rate gamma, and the oscillator strength f of the absorption line.  All are in
meV with hbar = 1; the pump power is metadata in microwatts and never enters
the dynamics directly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = ["PhysParams", "ParamTable", "builtin_table", "demo_params",
           "interpolate_params", "table_from_rows"]


@dataclass(frozen=True)
class PhysParams:
    """One parameter set of the driven Kerr mode, energies in meV."""

    G: float
    omega_r: float
    delta: float
    gamma: float
    f: float
    power: float | None = None  # pump power in uW, metadata only

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.omega_r < 0.0:
            raise ValueError(f"omega_r must be >= 0, got {self.omega_r}")
        if not self.f > 0.0:
            raise ValueError(f"f must be positive, got {self.f}")
        if self.G < 0.0:
            raise ValueError(f"G must be >= 0, got {self.G}")
        for name in ("G", "omega_r", "delta", "gamma", "f"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")


@dataclass(frozen=True)
class ParamTable:
    """Ordered anchor rows (power, params) for interpolation.

    Powers must be strictly increasing and every row must carry one.
    """

    rows: tuple[PhysParams, ...]

    def __post_init__(self):
        if len(self.rows) < 2:
            raise ValueError("a parameter table needs at least 2 rows")
        powers = [r.power for r in self.rows]
        if any(p is None for p in powers):
            raise ValueError("every table row must have a power value")
        if not all(a < b for a, b in zip(powers, powers[1:])):
            raise ValueError(f"table powers must be strictly increasing, got {powers}")

    @property
    def powers(self) -> np.ndarray:
        return np.array([r.power for r in self.rows], dtype=float)

    @property
    def power_range(self) -> tuple[float, float]:
        return float(self.rows[0].power), float(self.rows[-1].power)


_FIELDS = ("G", "omega_r", "delta", "gamma", "f")


def builtin_table() -> ParamTable:
    """The three measured anchor rows at 100, 150 and 310 uW."""
    return ParamTable(rows=(
        PhysParams(G=0.10, omega_r=0.045, delta=0.08, gamma=0.15, f=1.0, power=100.0),
        PhysParams(G=0.205, omega_r=0.075, delta=0.08, gamma=0.20, f=1.0, power=150.0),
        PhysParams(G=0.45, omega_r=0.16, delta=0.09, gamma=0.22, f=0.9, power=310.0),
    ))


def demo_params() -> PhysParams:
    """Standalone demonstration parameter set used for single-spectrum runs.

    Not an anchor of the builtin table; matches no measured power.
    """
    return PhysParams(G=0.15, omega_r=0.1, delta=0.1, gamma=0.2, f=1.0, power=None)


def interpolate_params(table: ParamTable, power: float) -> PhysParams:
    """Interpolate each parameter by a natural cubic spline through all anchors.

    No extrapolation: power must lie inside the table's range.
    """
    lo, hi = table.power_range
    if not (lo <= power <= hi):
        raise ValueError(
            f"power {power} uW outside table range [{lo}, {hi}] uW (no extrapolation)")
    x = table.powers
    values = {}
    for name in _FIELDS:
        y = np.array([getattr(r, name) for r in table.rows], dtype=float)
        spline = CubicSpline(x, y, bc_type="natural")
        values[name] = float(spline(power))
    return PhysParams(power=float(power), **values)


def table_from_rows(rows: list[dict]) -> ParamTable:
    """Build a table from parsed config rows (keys: power, G, omega_r, delta, gamma, f)."""
    built = []
    for i, row in enumerate(rows):
        try:
            built.append(PhysParams(
                G=float(row["G"]), omega_r=float(row["omega_r"]),
                delta=float(row["delta"]), gamma=float(row["gamma"]),
                f=float(row["f"]), power=float(row["power"])))
        except KeyError as exc:
            raise ValueError(f"table row {i} is missing key {exc}") from exc
    return ParamTable(rows=tuple(built))


def without_kerr(p: PhysParams) -> PhysParams:
    """Same parameters with the Kerr coupling switched off (coherent-state limit)."""
    return replace(p, G=0.0)
