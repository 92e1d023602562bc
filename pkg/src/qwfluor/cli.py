"""Command-line interface: `spectrum`, `sweep`, and `selftest`.

Configuration is a flat set of dotted keys with defaults below; a JSON file
(nested or flat) supplies overrides and `--set key=value` flags override the
file.  The output directory can also come from the QWFLUOR_OUTDIR environment
variable (flags still win).  All outputs are deterministic: fixed grids, no
randomness, no timestamps, 17-significant-digit CSV numbers.

Exit codes: 0 success, 2 configuration error, 3 numerical error,
4 sweep claim-verdict failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, QwfluorError
from .fock import annihilation, build_liouvillian, expectation, steady_state
from .filtering import coherent_moment_q, intensity_q, anomalous_moment_q
from .model import ParamTable, PhysParams, builtin_table, demo_params, interpolate_params, table_from_rows
from .observables import squeezing_variance
from .pipeline import (AbsorptionSpec, Numerics, PointResult, compute_point,
                       evaluate_claims, run_sweep_points)
from .qrt import both_correlators, default_tau_grid, evolve_operator
from .spectra import emission_spectrum, moment_omega_grid, write_spectrum_csv

DEFAULTS: dict[str, object] = {
    "model.source": None,            # None -> demo for spectrum, table for sweep
    "model.table": "builtin",        # or path to a JSON table file
    "model.power": None,             # spectrum at interpolated table params
    "model.power_min": 100.0,
    "model.power_max": 310.0,
    "model.power_step": 2.5,
    "model.G": 0.15,                 # explicit-params mode (demo defaults)
    "model.omega_r": 0.1,
    "model.delta": 0.1,
    "model.gamma": 0.2,
    "model.f": 1.0,
    "absorption.mode": "thin_sheet",
    "absorption.kappa": None,
    "absorption.a_peak": 0.5,
    "absorption.value": 1.0,
    "fock.truncation_tol": 1e-10,
    "fock.truncation": None,
    "fock.max_truncation": 64,
    "qrt.tau_max_factor": 40.0,
    "qrt.dtau_cap_factor": 0.05,
    "qrt.nyquist_oversample": 40.0,
    "spectra.figure_halfwidth": 12.0,
    "spectra.figure_points": 2 ** 14,
    "spectra.moment_intervals": 8192,
    "spectra.moment_window": None,
    "spectra.detector_width": 0.0107,
    "spectra.detector_shape": "lorentzian",
    "spectra.enforce_normalization": True,
    "output.directory": ".",
    "output.formats": ["csv", "json"],
    "sweep.workers": 4,
}

_EXIT_CONFIG = 2
_EXIT_NUMERIC = 3
_EXIT_CLAIMS = 4


def _flatten(prefix: str, obj, out: dict) -> None:
    if isinstance(obj, dict) and not (prefix.startswith("model.table") and "rows" in obj):
        for key, val in obj.items():
            _flatten(f"{prefix}.{key}" if prefix else key, val, out)
    else:
        out[prefix] = obj


def _parse_set_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config(path: str | None, overrides: list[str]) -> dict:
    """Defaults, then file, then --set overrides; unknown keys are rejected."""
    cfg = dict(DEFAULTS)
    if path is not None:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        flat: dict = {}
        _flatten("", raw, flat)
        for key, val in flat.items():
            if key not in cfg:
                raise ConfigError(f"unknown config key {key!r} in {path}")
            cfg[key] = val
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, text = item.partition("=")
        key = key.strip()
        if key not in cfg:
            raise ConfigError(f"unknown config key {key!r}")
        cfg[key] = _parse_set_value(text.strip())
    return cfg


@dataclass(frozen=True)
class RunConfig:
    command: str
    cfg: dict
    params: PhysParams | None          # spectrum command
    table: ParamTable | None
    powers: np.ndarray | None          # sweep command
    absorption: AbsorptionSpec
    numerics: Numerics
    outdir: str
    formats: tuple[str, ...]
    workers: int


def _float_or_none(cfg: dict, key: str):
    v = cfg[key]
    if v is None:
        return None
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a number, got {v!r}")


def _require(cond: bool, key: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{key}: {message}")


def build_run_config(command: str, cfg: dict, outdir_flag: str | None) -> RunConfig:
    """Validate every value against the owning module's preconditions."""
    try:
        numerics = Numerics(
            truncation_tol=float(cfg["fock.truncation_tol"]),
            truncation=None if cfg["fock.truncation"] is None else int(cfg["fock.truncation"]),
            max_truncation=int(cfg["fock.max_truncation"]),
            tau_max_factor=float(cfg["qrt.tau_max_factor"]),
            dtau_cap_factor=float(cfg["qrt.dtau_cap_factor"]),
            nyquist_oversample=float(cfg["qrt.nyquist_oversample"]),
            figure_halfwidth=float(cfg["spectra.figure_halfwidth"]),
            figure_points=int(cfg["spectra.figure_points"]),
            moment_intervals=int(cfg["spectra.moment_intervals"]),
            moment_window=_float_or_none(cfg, "spectra.moment_window"),
            detector_width=float(cfg["spectra.detector_width"]),
            detector_shape=str(cfg["spectra.detector_shape"]),
            enforce_normalization=bool(cfg["spectra.enforce_normalization"]),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"numerics: {exc}") from exc

    mode = str(cfg["absorption.mode"])
    _require(mode in ("thin_sheet", "lorentzian", "constant"), "absorption.mode",
             f"must be thin_sheet, lorentzian or constant, got {mode!r}")
    a_peak = float(cfg["absorption.a_peak"])
    _require(0.0 < a_peak <= 1.0, "absorption.a_peak", f"must be in (0, 1], got {a_peak}")
    value = float(cfg["absorption.value"])
    _require(0.0 <= value <= 1.0, "absorption.value", f"must be in [0, 1], got {value}")
    kappa = _float_or_none(cfg, "absorption.kappa")
    if kappa is not None:
        _require(kappa > 0.0, "absorption.kappa", f"must be positive, got {kappa}")
    absorption_spec = AbsorptionSpec(mode=mode, kappa=kappa, a_peak=a_peak, value=value)

    table = None
    if cfg["model.table"] == "builtin":
        table = builtin_table()
    elif cfg["model.table"] is not None:
        try:
            with open(str(cfg["model.table"])) as fh:
                raw = json.load(fh)
            table = table_from_rows(raw["rows"])
        except (OSError, KeyError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"model.table: cannot load table: {exc}") from exc

    params = None
    powers = None
    source = cfg["model.source"]
    if command == "spectrum":
        if source is None:
            source = "table" if cfg["model.power"] is not None else "demo"
        if source == "demo":
            params = demo_params()
        elif source == "explicit":
            try:
                params = PhysParams(G=float(cfg["model.G"]), omega_r=float(cfg["model.omega_r"]),
                                    delta=float(cfg["model.delta"]), gamma=float(cfg["model.gamma"]),
                                    f=float(cfg["model.f"]))
            except ValueError as exc:
                raise ConfigError(f"model: {exc}") from exc
        elif source == "table":
            power = _float_or_none(cfg, "model.power")
            _require(power is not None, "model.power", "required when model.source = table")
            _require(table is not None, "model.table", "required when model.source = table")
            try:
                params = interpolate_params(table, power)
            except ValueError as exc:
                raise ConfigError(f"model.power: {exc}") from exc
        else:
            raise ConfigError(f"model.source: unknown source {source!r}")
    elif command == "sweep":
        _require(table is not None, "model.table", "a sweep needs a parameter table")
        pmin = float(cfg["model.power_min"])
        pmax = float(cfg["model.power_max"])
        step = float(cfg["model.power_step"])
        _require(step > 0, "model.power_step", f"must be positive, got {step}")
        _require(pmax > pmin, "model.power_max", f"must exceed power_min, got [{pmin}, {pmax}]")
        lo, hi = table.power_range
        _require(lo <= pmin and pmax <= hi, "model.power_min",
                 f"sweep range [{pmin}, {pmax}] outside table range [{lo}, {hi}]")
        n_steps = int(round((pmax - pmin) / step))
        powers = pmin + step * np.arange(n_steps + 1)
        powers = powers[powers <= pmax + 1e-9]

    outdir = str(cfg["output.directory"])
    env_dir = os.environ.get("QWFLUOR_OUTDIR")
    if env_dir:
        outdir = env_dir
    if outdir_flag is not None:
        outdir = outdir_flag

    formats = tuple(cfg["output.formats"])
    for fmt in formats:
        _require(fmt in ("csv", "json"), "output.formats", f"unknown format {fmt!r}")
    workers = int(cfg["sweep.workers"])
    _require(workers >= 1, "sweep.workers", f"must be >= 1, got {workers}")

    return RunConfig(command=command, cfg=cfg, params=params, table=table,
                     powers=powers, absorption=absorption_spec, numerics=numerics,
                     outdir=outdir, formats=formats, workers=workers)


def effective_config_json(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, indent=2) + "\n"


def _config_hash(cfg: dict) -> str:
    return hashlib.sha256(effective_config_json(cfg).encode()).hexdigest()


def _complex_json(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def _moments_json(result: PointResult) -> dict:
    m = result.moments
    return {
        "mean_x": _complex_json(m.mean_x), "mean_q": _complex_json(m.mean_q),
        "intensity_x": m.intensity_x, "intensity_q": m.intensity_q,
        "anom_x": _complex_json(m.anom_x), "anom_q": _complex_json(m.anom_q),
    }


def _row_json(result: PointResult) -> dict:
    r = result.row
    return {k: getattr(r, k) for k in (
        "power", "var_x", "var_q", "ncl_x", "ncl_q", "dcoh_x", "dcoh_q",
        "phase_mean_sq", "phase_anom_x", "phase_anom_q", "gap_x", "gap_q")}


def _point_meta(result: PointResult) -> dict:
    return {
        "truncation": result.n_max,
        "top_populations": list(result.top_populations),
        "dtau": result.dtau,
        "tau_points": result.tau_points,
        "moment_window": result.moment_window,
    }


def _write_report(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


_SWEEP_COLUMNS = (
    "power", "mean_x_re", "mean_x_im", "mean_q_re", "mean_q_im",
    "coh_x", "coh_q", "intensity_x", "intensity_q",
    "anom_x_re", "anom_x_im", "anom_q_re", "anom_q_im",
    "anom_x_abs", "anom_q_abs",
    "var_x", "var_q", "ncl_x", "ncl_q", "dcoh_x", "dcoh_q",
    "phase_mean_sq", "phase_anom_x", "phase_anom_q", "gap_x", "gap_q")


def _sweep_row_values(result: PointResult) -> list[float]:
    m, r = result.moments, result.row
    return [r.power, m.mean_x.real, m.mean_x.imag, m.mean_q.real, m.mean_q.imag,
            abs(m.mean_x) ** 2, abs(m.mean_q) ** 2, m.intensity_x, m.intensity_q,
            m.anom_x.real, m.anom_x.imag, m.anom_q.real, m.anom_q.imag,
            abs(m.anom_x), abs(m.anom_q),
            r.var_x, r.var_q, r.ncl_x, r.ncl_q, r.dcoh_x, r.dcoh_q,
            r.phase_mean_sq, r.phase_anom_x, r.phase_anom_q, r.gap_x, r.gap_q]


def run_spectrum(run: RunConfig) -> int:
    result = compute_point(run.params, run.absorption, run.numerics, with_spectra=True)
    os.makedirs(run.outdir, exist_ok=True)
    if "csv" in run.formats:
        write_spectrum_csv(os.path.join(run.outdir, "spectrum_x.csv"),
                           result.spectra["x_detected"])
        write_spectrum_csv(os.path.join(run.outdir, "spectrum_q.csv"),
                           result.spectra["q_detected"])
        write_spectrum_csv(os.path.join(run.outdir, "absorption.csv"),
                           result.spectra["absorption"], kind="absorption")
    if "json" in run.formats:
        payload = {
            "command": "spectrum",
            "config_sha256": _config_hash(run.cfg),
            "config": run.cfg,
            "grids": _point_meta(result),
            "moments": _moments_json(result),
            "observables": _row_json(result),
        }
        _write_report(os.path.join(run.outdir, "report.json"), payload)
    return 0


def run_sweep(run: RunConfig) -> int:
    results = run_sweep_points(run.table, run.powers, run.absorption,
                               run.numerics, workers=run.workers)
    claims = evaluate_claims(results)
    os.makedirs(run.outdir, exist_ok=True)
    if "csv" in run.formats:
        with open(os.path.join(run.outdir, "sweep.csv"), "w", newline="") as fh:
            fh.write(",".join(_SWEEP_COLUMNS) + "\n")
            for result in results:
                fh.write(",".join(f"{v:.16e}" for v in _sweep_row_values(result)) + "\n")
    if "json" in run.formats:
        payload = {
            "command": "sweep",
            "config_sha256": _config_hash(run.cfg),
            "config": run.cfg,
            "grids": _point_meta(results[0]),
            "claims": claims,
            "rows": [dict(_row_json(r), **_moments_json(r)) for r in results],
        }
        _write_report(os.path.join(run.outdir, "report.json"), payload)

    verdict_keys = ("variance_reduced_everywhere", "dcoh_increased_everywhere",
                    "phase_gap_smaller_everywhere", "ncl_q_negative_interval",
                    "intensity_q_saturates")
    failed = [k for k in verdict_keys if not claims[k]]
    for key in verdict_keys:
        print(f"claim {key}: {'PASS' if claims[key] else 'FAIL'}")
    print(f"var_x zero crossings (uW): {claims['crossings_var_x']}")
    print(f"var_q zero crossings (uW): {claims['crossings_var_q']}")
    if failed:
        print(f"claim verdicts failed: {', '.join(failed)}", file=sys.stderr)
        return _EXIT_CLAIMS
    return 0


def _selftest_checks(run: RunConfig):
    """Analytic-oracle suite; yields (name, passed, detail)."""
    # coherent fixed point: no Kerr -> exact coherent state, zero variances
    p = PhysParams(G=0.0, omega_r=0.1, delta=0.1, gamma=0.2, f=1.0)
    res = compute_point(p, run.absorption, run.numerics, n_max=20)
    alpha = -p.omega_r / (p.delta - 0.5j * p.gamma)
    err_mean = abs(res.moments.mean_x - alpha)
    yield ("coherent_mean", err_mean < 1e-8, f"|<A> - alpha| = {err_mean:.2e}")
    yield ("coherent_var_x", abs(res.row.var_x) < 1e-8, f"|var_x| = {abs(res.row.var_x):.2e}")
    yield ("coherent_var_q", abs(res.row.var_q) < 1e-8, f"|var_q| = {abs(res.row.var_q):.2e}")

    # constant-filter scaling: moments scale with c^{(m+n)/2}
    demo = demo_params()
    base = compute_point(demo, AbsorptionSpec(mode="constant", value=1.0),
                         run.numerics, n_max=16)
    worst = 0.0
    for c in (0.1, 0.5):
        scaled = compute_point(demo, AbsorptionSpec(mode="constant", value=c),
                               run.numerics, n_max=16)
        worst = max(
            worst,
            abs(scaled.moments.mean_q - np.sqrt(c) * base.moments.mean_q),
            abs(scaled.moments.intensity_q - c * base.moments.intensity_q),
            abs(scaled.moments.anom_q - c * base.moments.anom_q),
            abs(scaled.row.var_q - c * base.row.var_q))
    yield ("constant_filter_scaling", worst < 1e-8, f"worst deviation = {worst:.2e}")

    # transparent filter reproduces the exact steady-state moments
    err_int = abs(base.moments.intensity_q - base.moments.intensity_x)
    err_anom = abs(base.moments.anom_q - base.moments.anom_x)
    yield ("transparent_filter_identity", max(err_int, err_anom) < 1e-8,
           f"max moment deviation = {max(err_int, err_anom):.2e}")

    # stepped propagator vs dense matrix exponential at small dimension
    from scipy.linalg import expm  # local: oracle only
    rng = np.random.default_rng(20240901)
    worst_qrt = 0.0
    for _ in range(3):
        pr = PhysParams(G=float(rng.uniform(0.05, 0.4)), omega_r=float(rng.uniform(0.02, 0.15)),
                        delta=float(rng.uniform(-0.1, 0.1)), gamma=float(rng.uniform(0.1, 0.3)),
                        f=1.0)
        liouv = build_liouvillian(pr, 3)
        rho = steady_state(liouv)
        a_op = annihilation(3)
        grid = default_tau_grid(pr, 2.0, tau_max_factor=8.0)[:40]
        seq = evolve_operator(liouv, rho @ a_op.conj().T, grid)
        stepped = np.array([np.trace(a_op @ m) for m in seq])
        direct = np.array([np.trace(a_op @ (
            expm(liouv * t) @ (rho @ a_op.conj().T).reshape(-1, order="F")
        ).reshape((4, 4), order="F")) for t in grid])
        worst_qrt = max(worst_qrt, float(np.max(np.abs(stepped - direct))))
    yield ("qrt_propagator_oracle", worst_qrt < 1e-9, f"max deviation = {worst_qrt:.2e}")

    # spectrum normalization at the builtin anchors
    worst_norm = 0.0
    for row in builtin_table().rows:
        liouv = build_liouvillian(row, 16)
        rho = steady_state(liouv)
        a_op = annihilation(16)
        grid = default_tau_grid(row, 24.0 * row.gamma)
        c1, _ = both_correlators(liouv, rho, a_op, grid)
        spec = emission_spectrum(c1, moment_omega_grid(c1.dtau))
        total = expectation(rho, a_op.conj().T @ a_op).real
        worst_norm = max(worst_norm, abs(spec.integral() - total) / total)
    yield ("spectrum_normalization", worst_norm < 1e-4, f"worst relative defect = {worst_norm:.2e}")


def run_selftest(run: RunConfig) -> int:
    ok = True
    for name, passed, detail in _selftest_checks(run):
        print(f"selftest {name}: {'PASS' if passed else 'FAIL'} ({detail})")
        ok = ok and passed
    return 0 if ok else _EXIT_NUMERIC


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qwfluor",
        description="Quantum-well exciton fluorescence: spectra, filtered moments, squeezing. "
                    "Energies in meV (hbar = 1, time unit hbar/meV ~ 0.658 ps).")
    parser.add_argument("command", choices=["spectrum", "sweep", "selftest"])
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override one config key (repeatable)")
    parser.add_argument("--output-dir", help="output directory (overrides config and env)")
    parser.add_argument("--print-effective-config", action="store_true",
                        help="echo the fully resolved configuration and exit")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, args.overrides)
        run = build_run_config(args.command, cfg, args.output_dir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG

    if args.print_effective_config:
        sys.stdout.write(effective_config_json(cfg))
        return 0

    try:
        if args.command == "spectrum":
            return run_spectrum(run)
        if args.command == "sweep":
            return run_sweep(run)
        return run_selftest(run)
    except QwfluorError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return _EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
