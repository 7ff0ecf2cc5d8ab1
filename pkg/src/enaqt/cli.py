"""Command-line entry point: one experiment per invocation.

Experiments are configured with a small ``key = value`` text file (all
physical quantities in units of the coupling J, unknown keys rejected)
and emit a results CSV plus a JSON run manifest into the output
directory.  Composition happens in the shell, e.g. `enaqt sweep ...`
followed by `enaqt fit ...` on the sweep's CSV.

Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 malformed
config, 4 unwritable output.  Failures also print a JSON error report to
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .optimizer import DEFAULT_BOUNDS
from .redfield import BathSpec, DrudeLorentzSpectralDensity, FlatSpectralDensity
from .sweep import (
    SweepConfig,
    default_sigma_grid,
    fit_power_law,
    read_records_csv,
    run_sweep,
    transient_experiment,
    uniformisation_comparison,
    write_manifest,
    write_records_csv,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_OUTPUT = 4


class ConfigError(Exception):
    pass


def _parse_int(text: str) -> int:
    return int(text)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_str(text: str) -> str:
    return text


_SCHEMAS = {
    "sweep": {
        "lengths": _parse_int_list,
        "gradients": _parse_float_list,
        "sigmas": _parse_float_list,
        "realizations": _parse_int,
        "seed": _parse_int,
        "injection_site": _parse_int,
        "trap_rate": _parse_float,
        "gamma_min": _parse_float,
        "gamma_max": _parse_float,
    },
    "optimize": {
        "n_sites": _parse_int,
        "gradient": _parse_float,
        "sigma": _parse_float,
        "seed": _parse_int,
        "injection_site": _parse_int,
        "trap_rate": _parse_float,
        "gamma_min": _parse_float,
        "gamma_max": _parse_float,
    },
    "fit": {
        "input": _parse_str,
        "n_sites": _parse_int,
    },
    "dynamics": {
        "n_sites": _parse_int,
        "gammas": _parse_float_list,
        "t_max": _parse_float,
        "n_times": _parse_int,
    },
    "uniformisation": {
        "lengths": _parse_int_list,
        "gradients": _parse_float_list,
        "sigmas": _parse_float_list,
        "realizations": _parse_int,
        "seed": _parse_int,
        "trap_rate": _parse_float,
    },
    "gradient-scan": {
        "lengths": _parse_int_list,
        "gradients": _parse_float_list,
        "trap_rate": _parse_float,
    },
}
_SCHEMAS["redfield-sweep"] = {
    **_SCHEMAS["sweep"],
    "beta": _parse_float,
    "spectral_density": _parse_str,
    "magnitude": _parse_float,
    "coupling": _parse_float,
    "linewidth": _parse_float,
}


def parse_config(path: Path, experiment: str) -> dict:
    """Read a key = value config file against the experiment's schema."""
    schema = _SCHEMAS[experiment]
    values = {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in schema:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r} for {experiment}")
        try:
            values[key] = schema[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from exc
    return values


def _build_bath(values: dict) -> BathSpec:
    if "beta" not in values:
        raise ConfigError("redfield-sweep requires a 'beta' key")
    kind = values.get("spectral_density", "flat")
    if kind == "flat":
        density = FlatSpectralDensity(values.get("magnitude", 1.0))
    elif kind == "drude_lorentz":
        try:
            density = DrudeLorentzSpectralDensity(values["coupling"], values["linewidth"])
        except KeyError as exc:
            raise ConfigError("drude_lorentz requires 'coupling' and 'linewidth'") from exc
    else:
        raise ConfigError(f"unknown spectral_density {kind!r}")
    return BathSpec(values["beta"], density)


def _sweep_config(values: dict, experiment: str, seed_override: int | None) -> SweepConfig:
    if "lengths" not in values:
        raise ConfigError(f"{experiment} requires a 'lengths' key")
    bounds = (values.get("gamma_min", DEFAULT_BOUNDS[0]), values.get("gamma_max", DEFAULT_BOUNDS[1]))
    seed = seed_override if seed_override is not None else values.get("seed", 2024)
    kwargs = dict(
        lengths=values["lengths"],
        sigma_grid=values.get("sigmas", default_sigma_grid()),
        realizations=values.get("realizations", 100),
        master_seed=seed,
        injection_site=values.get("injection_site"),
        trap_rate=values.get("trap_rate", 3.0),
        gamma_bounds=bounds,
    )
    if "gradients" in values:
        kwargs["gradients"] = values["gradients"]
    if experiment == "redfield-sweep":
        kwargs["model"] = "redfield"
        kwargs["bath"] = _build_bath(values)
    return SweepConfig(**kwargs)


def _run_sweep_like(experiment: str, values: dict, out: Path, seed: int | None, workers: int | None) -> None:
    config = _sweep_config(values, experiment, seed)
    start = time.monotonic()
    records = run_sweep(config, workers=workers)
    write_records_csv(records, out / "records.csv")
    write_manifest(out / "manifest.json", config, records, time.monotonic() - start)


def _run_optimize(values: dict, out: Path, seed: int | None, workers: int | None) -> None:
    required = {"n_sites"}
    missing = required - values.keys()
    if missing:
        raise ConfigError(f"optimize config missing keys: {sorted(missing)}")
    config = SweepConfig(
        lengths=(values["n_sites"],),
        gradients=(values.get("gradient", 0.0),),
        sigma_grid=(values.get("sigma", 0.0),),
        realizations=1,
        master_seed=seed if seed is not None else values.get("seed", 2024),
        injection_site=values.get("injection_site"),
        trap_rate=values.get("trap_rate", 3.0),
        gamma_bounds=(
            values.get("gamma_min", DEFAULT_BOUNDS[0]),
            values.get("gamma_max", DEFAULT_BOUNDS[1]),
        ),
    )
    start = time.monotonic()
    records = run_sweep(config, workers=workers)
    write_records_csv(records, out / "records.csv")
    write_manifest(out / "manifest.json", config, records, time.monotonic() - start)


def _run_fit(values: dict, out: Path) -> None:
    if "input" not in values:
        raise ConfigError("fit requires an 'input' key pointing at a sweep CSV")
    records = read_records_csv(values["input"])
    if "n_sites" in values:
        records = [r for r in records if r.n_sites == values["n_sites"]]
    result = fit_power_law(records)
    payload = {
        "amplitude": result.amplitude,
        "lambda": result.lambda_exp,
        "kappa": result.kappa_exp,
        "residual_sd": result.residual_sd,
        "cov_diag": list(result.cov_diag),
        "fit_error": result.fit_error,
        "n_points": result.n_points,
        "input": str(values["input"]),
    }
    with open(out / "fit.json", "w") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _run_dynamics(values: dict, out: Path) -> None:
    n_sites = values.get("n_sites", 41)
    gammas = values.get("gammas", (0.5, 2.0, 10.0))
    t_max = values.get("t_max", 2000.0)
    n_times = values.get("n_times", 401)
    times = np.linspace(0.0, t_max, n_times)
    start = time.monotonic()
    results = transient_experiment(n_sites, tuple(gammas), times)
    with open(out / "dynamics.csv", "w") as handle:
        handle.write("t,gamma,variance\n")
        for result in results:
            for t, v in zip(result.times, result.variances):
                handle.write(f"{t:.12g},{result.gamma:.12g},{v:.12g}\n")
    extra = {
        "steady_value": results[0].steady_value,
        "convergence_times": {str(r.gamma): r.convergence_time for r in results},
    }
    write_manifest(out / "manifest.json", values, None, time.monotonic() - start, extra)


def _run_uniformisation(values: dict, out: Path, seed: int | None, workers: int | None) -> None:
    if "lengths" not in values:
        raise ConfigError("uniformisation requires a 'lengths' key")
    config = SweepConfig(
        lengths=values["lengths"],
        gradients=values.get("gradients", (0.0,)),
        sigma_grid=values.get("sigmas", default_sigma_grid()),
        realizations=values.get("realizations", 50),
        master_seed=seed if seed is not None else values.get("seed", 2024),
        trap_rate=values.get("trap_rate", 3.0),
    )
    start = time.monotonic()
    records = uniformisation_comparison(config, workers=workers)
    with open(out / "uniformisation.csv", "w") as handle:
        handle.write(
            "N,eta,sigma,realization,seed,ipr,"
            "gamma_opt_current,current_status,gamma_min_variance,variance_status\n"
        )
        for r in records:
            handle.write(
                f"{r.n_sites},{r.gradient:.12g},{r.sigma:.12g},{r.realization},{r.seed},"
                f"{r.ipr:.12g},{r.gamma_current:.12g},{r.current_status},"
                f"{r.gamma_variance:.12g},{r.variance_status}\n"
            )
    write_manifest(out / "manifest.json", config, None, time.monotonic() - start)


def _run_gradient_scan(values: dict, out: Path, workers: int | None) -> None:
    if "lengths" not in values or "gradients" not in values:
        raise ConfigError("gradient-scan requires 'lengths' and 'gradients'")
    config = SweepConfig(
        lengths=values["lengths"],
        gradients=values["gradients"],
        sigma_grid=(0.0,),
        realizations=1,
        trap_rate=values.get("trap_rate", 3.0),
    )
    start = time.monotonic()
    records = run_sweep(config, workers=workers)
    write_records_csv(records, out / "records.csv")
    write_manifest(out / "manifest.json", config, records, time.monotonic() - start)


def _error_report(kind: str, message: str) -> None:
    json.dump({"error": kind, "message": message}, sys.stderr)
    sys.stderr.write("\n")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="enaqt", description="Noise-assisted transport experiments on disordered chains"
    )
    parser.add_argument(
        "experiment",
        choices=sorted(_SCHEMAS),
        help="experiment recipe to run",
    )
    parser.add_argument("--config", required=True, type=Path, help="key = value config file")
    parser.add_argument("--out", required=True, type=Path, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--workers", type=int, default=None, help="parallel worker count")
    args = parser.parse_args(argv)

    try:
        values = parse_config(args.config, args.experiment)
    except ConfigError as exc:
        _error_report("config", str(exc))
        return EXIT_CONFIG

    try:
        args.out.mkdir(parents=True, exist_ok=True)
        probe = args.out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        _error_report("output", f"output directory not writable: {exc}")
        return EXIT_OUTPUT

    try:
        if args.experiment in ("sweep", "redfield-sweep"):
            _run_sweep_like(args.experiment, values, args.out, args.seed, args.workers)
        elif args.experiment == "optimize":
            _run_optimize(values, args.out, args.seed, args.workers)
        elif args.experiment == "fit":
            _run_fit(values, args.out)
        elif args.experiment == "dynamics":
            _run_dynamics(values, args.out)
        elif args.experiment == "uniformisation":
            _run_uniformisation(values, args.out, args.seed, args.workers)
        elif args.experiment == "gradient-scan":
            _run_gradient_scan(values, args.out, args.workers)
    except ConfigError as exc:
        _error_report("config", str(exc))
        return EXIT_CONFIG
    except Exception as exc:  # surfaced as a machine-readable report
        _error_report("runtime", f"{type(exc).__name__}: {exc}")
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
