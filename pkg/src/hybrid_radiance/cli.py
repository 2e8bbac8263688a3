"""Configuration-driven command line interface.

Every command reads a JSON configuration document, runs one pipeline and
writes a deterministic data file (CSV by default, JSON on request) plus a
metadata sidecar echoing the fully resolved configuration.  Identical
configurations produce byte-identical data files: fixed column order,
fixed scientific-notation formatting, no timestamps.

    hybrid-radiance <command> --config FILE [--out DIR] [--workers K]
                    [--format csv|json] [--dump-basis] [--dump-matrix]

Commands: kernels, two-atom, spectrum, band, entropy-scan, evolve,
find-d0.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure, 4 capacity error.
"""

import argparse
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .band import DEFAULT_Q_POINTS, DEFAULT_SHELLS, band_scan, default_q_grid
from .basis import enumerate_basis
from .entanglement import entropy_scan, mode_entropies
from .errors import (
    EXIT_OK,
    ConfigError,
    DomainError,
    HybridRadianceError,
    exit_code_for,
)
from .geometry import GeometryConfig
from .heff import build_heff, separable_block, two_atom_spectrum
from .kernels import build_matrices, find_kappa0
from .lindblad import TruncatedSpace, build_jump_family, density_from_state, evolve, excitation_state
from .spectra import eigendecompose, match_separable

COMMANDS = ("kernels", "two-atom", "spectrum", "band", "entropy-scan", "evolve", "find-d0")

GEOMETRY_FIELDS = ("n_atoms", "spacing", "phi", "eta0", "n_phonons", "gamma")
INT_GEOMETRY_FIELDS = ("n_atoms", "n_phonons")

#: Rates below this (in units of gamma) are flagged in the sidecar.
NEGATIVE_RATE_FLAG = -1e-6


@dataclass(frozen=True)
class ScanSpec:
    parameter: str
    values: tuple


@dataclass(frozen=True)
class OutputSpec:
    path: str
    format: str = "csv"
    precision: int = 12


@dataclass(frozen=True)
class RunConfig:
    command: str
    geometry: GeometryConfig
    scan: ScanSpec | None
    output: OutputSpec
    options: dict


# ---------------------------------------------------------------------------
# configuration parsing

def _require_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected an object, got {type(value).__name__}")
    return value


def _check_keys(doc: dict, allowed: set, path: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}" if path else sorted(unknown)[0],
                          "unknown key")


def _number(doc: dict, key: str, path: str, default=None, required=False, integer=False):
    if key not in doc:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required key")
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {value!r}")
    return int(value) if integer else float(value)


def _parse_geometry(doc: dict) -> GeometryConfig:
    doc = _require_mapping(doc, "geometry")
    _check_keys(doc, set(GEOMETRY_FIELDS) | {"phi_deg"}, "geometry")
    if "phi" in doc and "phi_deg" in doc:
        raise ConfigError("geometry.phi_deg", "give either phi or phi_deg, not both")
    kwargs = {}
    kwargs["n_atoms"] = _number(doc, "n_atoms", "geometry", required=True, integer=True)
    kwargs["spacing"] = _number(doc, "spacing", "geometry", required=True)
    if "phi_deg" in doc:
        kwargs["phi"] = math.radians(_number(doc, "phi_deg", "geometry"))
    elif "phi" in doc:
        kwargs["phi"] = _number(doc, "phi", "geometry")
    kwargs["eta0"] = _number(doc, "eta0", "geometry", default=0.0)
    kwargs["n_phonons"] = _number(doc, "n_phonons", "geometry", default=0, integer=True)
    kwargs["gamma"] = _number(doc, "gamma", "geometry", default=1.0)
    try:
        return GeometryConfig(**kwargs)
    except DomainError as exc:
        raise ConfigError("geometry", str(exc)) from exc


def _parse_scan(doc: dict) -> ScanSpec:
    doc = _require_mapping(doc, "scan")
    _check_keys(doc, {"parameter", "values"}, "scan")
    parameter = doc.get("parameter")
    if parameter not in GEOMETRY_FIELDS:
        raise ConfigError("scan.parameter", f"must name a geometry field, got {parameter!r}")
    values = doc.get("values")
    if not isinstance(values, list) or not values:
        raise ConfigError("scan.values", "expected a non-empty list of numbers")
    integer = parameter in INT_GEOMETRY_FIELDS
    parsed = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"scan.values[{i}]", f"expected a number, got {v!r}")
        if integer and int(v) != v:
            raise ConfigError(f"scan.values[{i}]", f"expected an integer, got {v!r}")
        parsed.append(int(v) if integer else float(v))
    return ScanSpec(parameter=parameter, values=tuple(parsed))


def _parse_output(doc: dict, command: str) -> OutputSpec:
    doc = _require_mapping(doc, "output")
    _check_keys(doc, {"path", "format", "precision"}, "output")
    path = doc.get("path", command.replace("-", "_"))
    if not isinstance(path, str) or not path:
        raise ConfigError("output.path", "expected a non-empty string")
    fmt = doc.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format", f"expected 'csv' or 'json', got {fmt!r}")
    precision = _number(doc, "precision", "output", default=12, integer=True)
    if not 6 <= precision <= 17:
        raise ConfigError("output.precision", f"must lie in [6, 17], got {precision}")
    return OutputSpec(path=path, format=fmt, precision=precision)


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse and validate a JSON configuration document.

    ``command`` (from the command line) overrides or supplies the
    document's own ``command`` key; if both are present they must agree.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("(document)", f"invalid JSON: {exc}") from exc
    doc = _require_mapping(doc, "(document)")

    doc_command = doc.get("command")
    if doc_command is not None and doc_command not in COMMANDS:
        raise ConfigError("command", f"unknown command {doc_command!r}")
    if command is not None and doc_command is not None and command != doc_command:
        raise ConfigError("command", f"CLI command {command!r} contradicts config {doc_command!r}")
    resolved = command or doc_command
    if resolved is None:
        raise ConfigError("command", "missing required key")

    _check_keys(doc, {"command", "geometry", "scan", "output", resolved}, "")
    if "geometry" not in doc:
        raise ConfigError("geometry", "missing required key")
    geometry = _parse_geometry(doc["geometry"])
    scan = _parse_scan(doc["scan"]) if "scan" in doc else None
    output = _parse_output(doc.get("output", {}), resolved)
    options = _require_mapping(doc.get(resolved, {}), resolved)
    return RunConfig(
        command=resolved, geometry=geometry, scan=scan, output=output, options=options
    )


# ---------------------------------------------------------------------------
# command pipelines (each returns (columns, rows); rows are value lists)

def _cmd_kernels(geom: GeometryConfig, options: dict) -> tuple[list[str], list[list]]:
    _check_keys(options, set(), "kernels")
    k = build_matrices(geom)
    columns = ["i", "j", "kappa", "gamma", "v", "gamma_dd", "v_dd"]
    rows = []
    for i in range(geom.n_atoms):
        for j in range(geom.n_atoms):
            rows.append(
                [i, j, geom.reduced_distance(i, j), k.gamma_mat[i, j], k.v_mat[i, j],
                 k.gamma_dd[i, j], k.v_dd[i, j]]
            )
    return columns, rows


def _cmd_two_atom(geom: GeometryConfig, options: dict) -> tuple[list[str], list[list]]:
    _check_keys(options, set(), "two-atom")
    modes = two_atom_spectrum(geom, build_matrices(geom))
    ref_geom = replace(geom, eta0=0.0)
    reference = {
        m.parity: m.rate for m in two_atom_spectrum(ref_geom, build_matrices(ref_geom))
    }
    columns = ["parity", "n_total", "n_antisym", "rate", "shift", "rate_ratio"]
    rows = [
        [m.parity, m.n_total, m.n_antisym, m.rate, m.shift, m.rate / reference[m.parity]]
        for m in modes
    ]
    return columns, rows


def _cmd_spectrum(geom: GeometryConfig, options: dict) -> tuple[list[str], list[list]]:
    _check_keys(options, set(), "spectrum")
    kernels = build_matrices(geom)
    basis = enumerate_basis(geom)
    h = build_heff(geom, kernels, basis)
    modes = eigendecompose(h)
    entropies = mode_entropies(h, basis)
    separable = {i for i, _ in match_separable(modes, separable_block(geom, kernels), basis)}
    columns = ["m", "re_e", "im_e", "rate", "shift", "entropy", "separable"]
    rows = [
        [m.index, m.eigenvalue.real, m.eigenvalue.imag, m.rate, m.shift,
         float(entropies[m.index]), int(m.index in separable)]
        for m in modes
    ]
    return columns, rows


def _cmd_band(geom: GeometryConfig, options: dict) -> tuple[list[str], list[list]]:
    _check_keys(options, {"q_points", "shells", "accelerate"}, "band")
    q_points = options.get("q_points", DEFAULT_Q_POINTS)
    shells = options.get("shells", DEFAULT_SHELLS)
    accelerate = options.get("accelerate", True)
    if not isinstance(accelerate, bool):
        raise ConfigError("band.accelerate", "expected a boolean")
    points = band_scan(
        geom,
        q_grid=default_q_grid(geom, int(q_points)),
        shells=int(shells),
        accelerate=accelerate,
    )
    columns = ["q_d_over_pi", "re_e", "im_e", "rate", "rate_eta0_zero", "delta_rate",
               "tail_estimate"]
    rows = [
        [p.q * geom.spacing / math.pi, p.e_q.real, p.e_q.imag, p.rate, p.rate_eta0_zero,
         p.delta_rate, p.tail_estimate]
        for p in points
    ]
    return columns, rows


def _cmd_entropy_scan(geom: GeometryConfig, options: dict) -> tuple[list[str], list[list]]:
    _check_keys(options, {"n_list"}, "entropy-scan")
    n_list = options.get("n_list")
    if not isinstance(n_list, list) or not n_list or not all(
        isinstance(n, int) and not isinstance(n, bool) and n >= 1 for n in n_list
    ):
        raise ConfigError("entropy-scan.n_list", "expected a non-empty list of integers >= 1")
    points = entropy_scan(geom, n_list)
    columns = ["n_atoms", "ln_n", "max_entropy", "d_over_lambda"]
    rows = [[p.n_atoms, p.ln_n, p.max_entropy, geom.spacing] for p in points]
    return columns, rows


def _cmd_evolve(geom: GeometryConfig, options: dict) -> tuple[list[str], list[list]]:
    _check_keys(options, {"n_max", "dt", "t_final", "sample_every", "initial"}, "evolve")
    n_max = options.get("n_max", max(geom.n_phonons, 0))
    dt = _number(options, "dt", "evolve", default=1e-3)
    t_final = _number(options, "t_final", "evolve", default=5.0)
    sample_every = options.get("sample_every")
    initial = _require_mapping(options.get("initial", {}), "evolve.initial")
    _check_keys(initial, {"spin", "site", "phonons"}, "evolve.initial")
    spin = initial.get("spin", "site")
    phonons = tuple(initial.get("phonons", [0] * geom.n_atoms))
    if len(phonons) != geom.n_atoms:
        raise ConfigError("evolve.initial.phonons", f"expected {geom.n_atoms} entries")

    space = TruncatedSpace(geom.n_atoms, int(n_max))
    if spin == "site":
        site = initial.get("site", 0)
        amplitudes = [1.0 if j == site else 0.0 for j in range(geom.n_atoms)]
    elif spin == "symmetric":
        amplitudes = [1.0] * geom.n_atoms
    elif spin == "antisymmetric":
        amplitudes = [(-1.0) ** j for j in range(geom.n_atoms)]
    else:
        raise ConfigError("evolve.initial.spin",
                          f"expected 'site', 'symmetric' or 'antisymmetric', got {spin!r}")
    rho0 = density_from_state(excitation_state(space, amplitudes, phonons))
    family = build_jump_family(geom, build_matrices(geom), space)
    traj = evolve(rho0, family, t_final=t_final, dt=dt,
                  sample_every=None if sample_every is None else int(sample_every))

    columns = ["t", "trace", "excited_total"]
    columns += [f"pop_{j}" for j in range(geom.n_atoms)]
    columns += ["min_eig", "positivity_warning"]
    rows = []
    for i, t in enumerate(traj.times):
        row = [float(t), float(traj.traces[i]), float(traj.excited_total[i])]
        row += [float(p) for p in traj.site_populations[i]]
        row += [float(traj.min_eigenvalues[i]), int(traj.positivity_flags[i])]
        rows.append(row)
    return columns, rows


def _cmd_find_d0(geom: GeometryConfig, options: dict) -> tuple[list[str], list[list]]:
    _check_keys(options, {"phi_values"}, "find-d0")
    phis = options.get("phi_values")
    if phis is None:
        phis = list(np.linspace(0.2 * math.pi, 0.8 * math.pi, 17))
    if not isinstance(phis, list) or not phis:
        raise ConfigError("find-d0.phi_values", "expected a non-empty list of angles")
    columns = ["phi", "kappa0", "d0_over_lambda"]
    rows = []
    for phi in phis:
        kappa0 = find_kappa0(float(phi), gamma=geom.gamma)
        rows.append([float(phi), kappa0, kappa0 / (2.0 * math.pi)])
    return columns, rows


_EXECUTORS = {
    "kernels": _cmd_kernels,
    "two-atom": _cmd_two_atom,
    "spectrum": _cmd_spectrum,
    "band": _cmd_band,
    "entropy-scan": _cmd_entropy_scan,
    "evolve": _cmd_evolve,
    "find-d0": _cmd_find_d0,
}


# ---------------------------------------------------------------------------
# deterministic serialization

def _format_value(value, precision: int):
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{precision}e}"
    return str(value)


def _write_csv(path: Path, columns: list[str], rows: list[list], precision: int) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_value(v, precision) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, columns: list[str], rows: list[list], precision: int) -> None:
    def convert(value):
        if isinstance(value, (float, np.floating)):
            return float(f"{float(value):.{precision}e}")
        if isinstance(value, (int, np.integer)):
            return int(value)
        return value

    payload = {"columns": columns, "rows": [[convert(v) for v in row] for row in rows]}
    path.write_text(json.dumps(payload, indent=1, sort_keys=False) + "\n", encoding="utf-8")


def _geometry_dict(geom: GeometryConfig) -> dict:
    return {k: getattr(geom, k) for k in GEOMETRY_FIELDS}


def _write_sidecar(path: Path, config: RunConfig, columns: list[str], rows: list[list],
                   extra: dict) -> None:
    meta = {
        "artifact": {"name": "hybrid-radiance", "version": __version__},
        "command": config.command,
        "config": {
            "geometry": _geometry_dict(config.geometry),
            "scan": None if config.scan is None else
                {"parameter": config.scan.parameter, "values": list(config.scan.values)},
            "output": {"path": config.output.path, "format": config.output.format,
                       "precision": config.output.precision},
            "options": config.options,
        },
        "columns": columns,
        "row_count": len(rows),
    }
    meta.update(extra)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# dispatch

def run(
    config: RunConfig,
    out_dir: str | Path = ".",
    workers: int = 1,
    format_override: str | None = None,
    dump_basis: bool = False,
    dump_matrix: bool = False,
) -> list[Path]:
    """Execute one configuration; returns the paths of all written files."""
    executor = _EXECUTORS[config.command]
    geom = config.geometry

    if config.scan is None:
        columns, rows = executor(geom, config.options)
    else:
        def one_point(value):
            point = replace(geom, **{config.scan.parameter: value})
            return executor(point, config.options)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(one_point, config.scan.values))
        else:
            results = [one_point(v) for v in config.scan.values]

        base_columns = results[0][0]
        skip_prefix = (
            config.command == "entropy-scan" and config.scan.parameter == "spacing"
        )
        columns = base_columns if skip_prefix else [config.scan.parameter] + base_columns
        rows = []
        for value, (_, point_rows) in zip(config.scan.values, results):
            for row in point_rows:
                rows.append(row if skip_prefix else [value] + row)

    fmt = format_override or config.output.format
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data_path = out_dir / f"{config.output.path}.{fmt}"
    if fmt == "csv":
        _write_csv(data_path, columns, rows, config.output.precision)
    else:
        _write_json(data_path, columns, rows, config.output.precision)

    extra = {}
    if config.command == "spectrum" and "rate" in columns:
        rate_col = columns.index("rate")
        m_col = columns.index("m")
        negatives = [int(r[m_col]) for r in rows if r[rate_col] < NEGATIVE_RATE_FLAG * geom.gamma]
        extra["negative_rate_modes"] = sorted(set(negatives))
        if negatives:
            warnings.warn(f"{len(negatives)} spectrum rows have rate < {NEGATIVE_RATE_FLAG}*gamma",
                          stacklevel=2)

    written = [data_path]
    sidecar = out_dir / f"{config.output.path}.meta.json"
    _write_sidecar(sidecar, config, columns, rows, extra)
    written.append(sidecar)

    if dump_basis:
        basis_path = out_dir / f"{config.output.path}.basis.json"
        basis_path.write_text(
            json.dumps(enumerate_basis(geom).to_json(), indent=1) + "\n", encoding="utf-8"
        )
        written.append(basis_path)
    if dump_matrix:
        kernels = build_matrices(geom)
        h = build_heff(geom, kernels, enumerate_basis(geom))
        for part, array in (("re", h.matrix.real), ("im", h.matrix.imag)):
            dump_path = out_dir / f"{config.output.path}.heff_{part}.csv"
            lines = [",".join(f"{v:.{config.output.precision}e}" for v in row) for row in array]
            dump_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            written.append(dump_path)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hybrid-radiance",
        description="Collective decay and spin-phonon hybridization in 1D emitter arrays",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", default=".", help="output directory (default: .)")
    parser.add_argument("--workers", type=int, default=1, help="parallel scan workers")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--dump-basis", action="store_true",
                        help="also write the hybrid basis as JSON")
    parser.add_argument("--dump-matrix", action="store_true",
                        help="also write the effective Hamiltonian (real/imag CSV pair)")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(json.dumps({"error": "ConfigError", "message": str(exc)}), file=sys.stderr)
        return 2
    try:
        config = parse_config(text, command=args.command)
        run(
            config,
            out_dir=args.out,
            workers=max(1, args.workers),
            format_override=args.format,
            dump_basis=args.dump_basis,
            dump_matrix=args.dump_matrix,
        )
    except (HybridRadianceError, ValueError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc),
                  "exit_code": exit_code_for(exc)}
        print(json.dumps(record), file=sys.stderr)
        return exit_code_for(exc)
    return EXIT_OK


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
