"""Shared fixtures: expensive pipeline runs are computed once per session."""

import numpy as np
import pytest

from qwfluor import (AbsorptionSpec, Numerics, builtin_table, compute_point,
                     demo_params, run_sweep_points)
from qwfluor.model import without_kerr


@pytest.fixture(scope="session")
def numerics():
    return Numerics()


@pytest.fixture(scope="session")
def thin_sheet_spec():
    return AbsorptionSpec(mode="thin_sheet")


@pytest.fixture(scope="session")
def demo_point(numerics, thin_sheet_spec):
    """Demonstration parameter set, full pipeline with spectra and traces."""
    return compute_point(demo_params(), thin_sheet_spec, numerics,
                         with_spectra=True, keep_traces=True)


@pytest.fixture(scope="session")
def coherent_point(numerics, thin_sheet_spec):
    """Kerr coupling off: the steady state is an exact coherent state."""
    return compute_point(without_kerr(demo_params()), thin_sheet_spec, numerics,
                         with_spectra=True, keep_traces=True, n_max=20)


@pytest.fixture(scope="session")
def anchor_points(numerics, thin_sheet_spec):
    """Pipeline results at the three measured anchor rows, keyed by power."""
    return {int(row.power): compute_point(row, thin_sheet_spec, numerics,
                                          keep_traces=True)
            for row in builtin_table().rows}


@pytest.fixture(scope="session")
def sweep_results(numerics, thin_sheet_spec):
    """Default full sweep: 100..310 uW in 2.5 uW steps (85 points)."""
    powers = 100.0 + 2.5 * np.arange(85)
    return run_sweep_points(builtin_table(), powers, thin_sheet_spec, numerics,
                            workers=4)
