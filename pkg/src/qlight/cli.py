"""Config-driven batch front-end.

    qlight --config run.toml [--out DIR] [--threads N] [--verbose]

A config has four tables: ``[matter]`` (preset, params, initial state),
``[field]`` (modes and state), ``[run]`` (command and its parameters) and
``[output]`` (directory, prefix).  Each command writes one CSV and one JSON
manifest.  CSV values are printed with 17 significant digits, so a fixed
config gives byte-identical output whatever the thread count.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .errors import ContractError, NumericalError, SizeError, UnsupportedRepresentationError
from .field import FieldMode, FieldState, prepare_state
from .matter import MatterSystem, basis_state, build_system, thermal_state
from .operators import MAX_DIM
from .oracle import build_joint_model, order_fit, photon_flux, windowed_flux
from .response import (DIAGRAMS, LINEAR_DIAGRAMS, chi3, gate_sequence, linear_signal, scan, signal_quantum,
                       signed_tuples)
from .superop import fdt_check, two_atom_demo

log = logging.getLogger("qlight")

EXIT_OK, EXIT_CONFIG, EXIT_SIZE, EXIT_UNSUPPORTED, EXIT_NUMERICAL = 0, 2, 3, 4, 5


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ config


@dataclass
class RunConfig:
    matter: dict[str, Any]
    field: dict[str, Any]
    run: dict[str, Any]
    output: dict[str, Any]
    raw: bytes = b""

    @property
    def command(self) -> str:
        return self.run["command"]

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.raw).hexdigest()


def load_config(path: str | Path) -> RunConfig:
    raw = Path(path).read_bytes()
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        # the decoder message already carries "(at line L, column C)"
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path} is not UTF-8 text: {exc}") from None
    return parse_config(data, raw)


def parse_config(data: dict, raw: bytes = b"") -> RunConfig:
    for table in ("matter", "run"):
        if not isinstance(data.get(table), dict):
            raise ConfigError(f"config needs a [{table}] table")
    unknown = set(data) - {"matter", "field", "run", "output"}
    if unknown:
        raise ConfigError(f"unknown top-level tables: {sorted(unknown)}")
    cmd = data["run"].get("command")
    if cmd not in COMMANDS:
        raise ConfigError(f"run.command must be one of {sorted(COMMANDS)}, got {cmd!r}")
    if "preset" not in data["matter"]:
        raise ConfigError("matter.preset is required")
    if cmd != "fdt-check" and not isinstance(data.get("field"), dict):
        raise ConfigError(f"command {cmd} needs a [field] table")
    output = {"directory": "out", "prefix": cmd}
    output.update(data.get("output", {}))
    return RunConfig(data["matter"], data.get("field", {}), data["run"], output, raw)


def _number(table: dict, key: str, default=None, *, low=None, high=None, name="") -> float:
    value = table.get(key, default)
    if value is None:
        raise ConfigError(f"{name}{key} is required")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name}{key} must be a number, got {value!r}")
    if (low is not None and value < low) or (high is not None and value > high):
        raise ConfigError(f"{name}{key}={value} outside [{low}, {high}]")
    return value


def _grid(run: dict) -> np.ndarray:
    if "omegas" in run:
        return np.asarray(run["omegas"], dtype=float)
    lo = _number(run, "omega_min", name="run.")
    hi = _number(run, "omega_max", name="run.")
    n = int(_number(run, "points", 50, low=1, high=100000, name="run."))
    if not hi > lo and n > 1:
        raise ConfigError("run.omega_max must exceed run.omega_min")
    return np.linspace(lo, hi, n)


def build_matter(cfg: RunConfig, table: dict | None = None) -> tuple[MatterSystem, Any]:
    m = cfg.matter if table is None else table
    params = dict(m.get("params", {}))
    if "epsilon" in m:
        params["epsilon"] = m["epsilon"]
    try:
        sys_ = build_system(m["preset"], **params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for matter preset {m['preset']!r}: {exc}") from None
    state = m.get("state", "ground")
    if state == "ground":
        rho = basis_state(sys_, 0)
    elif state == "thermal":
        rho = thermal_state(sys_, _number(m, "beta_t", low=0, name="matter."))
    elif state == "level":
        rho = basis_state(sys_, int(_number(m, "level", low=0, high=sys_.dim - 1, name="matter.")))
    else:
        raise ConfigError(f"matter.state must be ground, thermal or level, got {state!r}")
    return sys_, rho


def build_field(cfg: RunConfig, max_dim: int) -> FieldState:
    f = cfg.field
    modes_cfg = f.get("modes")
    if not modes_cfg:
        raise ConfigError("field.modes must list at least one mode")
    modes = []
    for k, m in enumerate(modes_cfg):
        modes.append(FieldMode(_number(m, "frequency", low=0, name=f"field.modes[{k}]."),
                               _number(m, "coupling", 1.0, name=f"field.modes[{k}]."),
                               int(_number(m, "truncation", 16, low=1, name=f"field.modes[{k}]."))))
    params = dict(f.get("params", {}))
    for key in ("beta",):
        if key in params:
            params[key] = _complexify(params[key])
    return prepare_state(modes, f.get("state", "vacuum"), max_dim=max_dim, **params)


def _complexify(value):
    """TOML has no complex numbers: accept [re, im] pairs (per mode) or plain reals."""
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) for x in value) \
            and not isinstance(value[0], bool):
        return complex(value[0], value[1])
    if isinstance(value, list):
        return [_complexify(v) for v in value]
    return value


# ------------------------------------------------------------------ output


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return "%.16e" % float(x)


@dataclass
class Table:
    header: list[str]
    rows: list[list] = field(default_factory=list)
    meta: list[tuple[str, Any]] = field(default_factory=list)

    def write(self, path: Path) -> None:
        with open(path, "w", newline="") as fh:
            for key, value in self.meta:
                fh.write(f"# {key}: {value}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.header)
            for row in self.rows:
                writer.writerow([fmt(x) for x in row])


def _pmap(fn: Callable, items, threads: int) -> list:
    """Ordered parallel map; results come back in input order."""
    items = list(items)
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ------------------------------------------------------------------ commands


def cmd_chi3_scan(cfg: RunConfig, threads: int, max_dim: int) -> Table:
    sys_, rho = build_matter(cfg)
    run = cfg.run
    omegas = _grid(run)
    pattern = run.get("pattern", [1, -1, 1])
    if len(pattern) != 3 or any(s not in (1, -1) for s in pattern):
        raise ConfigError("run.pattern must be three signs, e.g. [1, -1, 1]")
    offsets = run.get("offsets", [0.0, 0.0, 0.0])
    fs = build_field(cfg, max_dim) if cfg.field else None

    def point(w):
        w1, w2, w3 = (s * w + o for s, o in zip(pattern, offsets))
        c = chi3(sys_, rho, w1 + w2 + w3, w1, w2, w3)
        row = [w, w1 + w2 + w3, w1, w2, w3, c.real, c.imag, abs(c)]
        return row

    table = Table(["omega", "omega_out", "omega1", "omega2", "omega3", "chi3_re", "chi3_im", "chi3_abs"])
    table.rows = _pmap(point, omegas, threads)
    if fs is not None and run.get("with_signal", True):
        detect = int(run.get("detect", 0))
        sig = scan(sys_, rho, fs, omegas, detect, 3, "classical", threads, max_dim)
        table.header.append("S_classical")
        for row, s in zip(table.rows, sig.totals):
            row.append(s)
    return table


def cmd_signal_compare(cfg: RunConfig, threads: int, max_dim: int) -> Table:
    sys_, rho = build_matter(cfg)
    fs = build_field(cfg, max_dim)
    run = cfg.run
    order = int(run.get("order", 3))
    if order not in (1, 3):
        raise ConfigError("run.order must be 1 or 3")
    detect = int(run.get("detect", 0))
    omegas = _grid(run) if ("omegas" in run or "omega_min" in run) else [fs.modes[detect].frequency]
    tabs = {m: scan(sys_, rho, fs, omegas, detect, order, m, threads, max_dim)
            for m in ("quantum", "classical", "p_averaged")}
    names = DIAGRAMS if order == 3 else LINEAR_DIAGRAMS
    header = ["omega", "S_quantum", "S_classical", "S_p_averaged", "delta_p_vs_quantum"]
    for n in names:
        header += [f"gate_{n}_re", f"gate_{n}_im"]
    table = Table(header, meta=[("order", order)])
    for q, c, p in zip(tabs["quantum"].rows, tabs["classical"].rows, tabs["p_averaged"].rows):
        row = [q.omega, q.total, c.total, p.total, p.total - q.total]
        for g in q.gates:
            row += [g.real, g.imag]
        table.rows.append(row)
    return table


def cmd_fdt_check(cfg: RunConfig, threads: int, max_dim: int) -> Table:
    sys_, rho = build_matter(cfg)
    run = cfg.run
    betas = run.get("beta_t", [1.0])
    betas = betas if isinstance(betas, list) else [betas]
    omegas = _grid(run)
    thermal = cfg.matter.get("state", "ground") == "thermal"
    table = Table(["kind", "beta_t", "omega", "C_pp", "C_pm", "ratio", "half_coth"])

    def one(b):
        return fdt_check(sys_, _number({"b": b}, "b", low=1e-300, name="run.beta_t "), omegas,
                         None if thermal else rho)

    for b, rep in zip(betas, _pmap(one, betas, threads)):
        for w, pp, pm, r, f in zip(rep.omegas, rep.c_pp, rep.c_pm, rep.spectral_ratio, rep.fdt_curve):
            table.rows.append(["grid", b, w, pp, pm, r, f])
        for res in rep.resonances:
            table.rows.append(["resonance", b, res.omega, res.weight_pp, res.weight_pm, res.ratio, res.fdt])
    if not thermal:
        table.meta.append(("note", "matter state is not thermal; resonance ratios need not follow coth/2"))
    return table


def cmd_correlator_table(cfg: RunConfig, threads: int, max_dim: int) -> Table:
    from .field import field_correlator
    from .response import pathways

    sys_, rho = build_matter(cfg)
    fs = build_field(cfg, max_dim)
    detect = int(cfg.run.get("detect", 0))
    freqs = fs.frequencies
    tuples = signed_tuples(freqs, freqs[detect], 3)
    header = ["tuple", "omega1", "omega2", "omega3"]
    for n in DIAGRAMS:
        header += [f"gate_{n}_re", f"gate_{n}_im"]
    for n in DIAGRAMS:
        header += [f"matter_{n}_re", f"matter_{n}_im"]

    def row(tup):
        label = " ".join(f"{'+' if s > 0 else '-'}{j}" for j, s in tup)
        ws = [s * freqs[j] for j, s in tup]
        out = [label] + ws
        for n in DIAGRAMS:
            g = field_correlator(fs, gate_sequence(n, tup, detect))
            out += [g.real, g.imag]
        for f in pathways(sys_, rho, *ws):
            out += [f.real, f.imag]
        return out

    return Table(header, _pmap(row, tuples, threads), [("detect", detect), ("tuples", len(tuples))])


def cmd_two_atom_demo(cfg: RunConfig, threads: int, max_dim: int) -> Table:
    atom1, _ = build_matter(cfg)
    run = cfg.run
    atom2 = build_matter(cfg, run["atom2"])[0] if "atom2" in run else atom1
    fs = build_field(cfg, max_dim)
    T = _number(run, "T", 20.0, low=0, name="run.")
    freqs = run.get("atom2_frequencies")
    steps = int(_number(run, "steps", 4000, low=1, name="run."))
    grid = run.get("fit_grid")

    def one(classical):
        return two_atom_demo(atom1, atom2, fs, classical, T, freqs, steps,
                             None if classical else grid, max_dim)

    reports = _pmap(one, [True, False], threads)
    table = Table(["driving", "atom2", "omega2", "p1_excited", "shift_vs_absent"])
    for rep in reports:
        base = rep.rows[0][2]
        name = "classical" if rep.classical else "quantum"
        for label, w, p in rep.rows:
            table.rows.append([name, label, w, p, p - base])
        table.meta.append((f"{name}_relative_spread", fmt(rep.relative_spread)))
        if rep.leading_order is not None:
            fit = rep.leading_order
            table.meta.append((f"{name}_shift_fit", " ".join(f"a{k}={fmt(fit[k])}" for k in fit.orders)))
    table.meta.append(("atom2_max_abs_minus_string", fmt(reports[0].atom2_minus_strings)))
    table.meta.append(("atom2_plus_minus", fmt(abs(reports[0].atom2_plus_minus))))
    return table


def cmd_oracle_validate(cfg: RunConfig, threads: int, max_dim: int) -> Table:
    sys_, rho = build_matter(cfg)
    fs = build_field(cfg, max_dim)
    run = cfg.run
    grid = np.asarray(run.get("c_grid", np.linspace(0.2, 1.0, 9).tolist()), dtype=float)
    j = int(run.get("detect", 0))
    eps = sys_.epsilon
    T = _number(run, "T", 1.0 / eps, low=0, name="run.")

    def exact(c):
        model = build_joint_model(sys_, rho, fs.scaled_couplings(c), max_dim=max_dim)
        return windowed_flux(model, j, eps), photon_flux(model, j, T)[0]

    values = dict(zip(grid, _pmap(exact, grid, threads)))
    fit = order_fit(lambda c: values[c][0], grid, orders=(2, 4, 6))
    pred2 = 2 * linear_signal(sys_, rho, fs, j).totals[0]
    pred4 = 2 * signal_quantum(sys_, rho, fs, j, max_dim).totals[0]
    table = Table(["c", "flux_windowed", "flux_finite_T", "flux_predicted", "flux_fit"])
    for c in grid:
        table.rows.append([c, values[c][0], values[c][1], pred2 * c ** 2 + pred4 * c ** 4,
                           sum(fit[k] * c ** k for k in fit.orders)])
    guard = abs(fit[6]) * grid.max() ** 2 / max(abs(fit[4]), 1e-300)
    table.meta += [("window_epsilon", fmt(eps)), ("finite_T", fmt(T)),
                   ("a2_fit", fmt(fit[2])), ("a2_predicted", fmt(pred2)),
                   ("a2_relative_error", fmt(abs(fit[2] - pred2) / abs(pred2))),
                   ("a4_fit", fmt(fit[4])), ("a4_predicted", fmt(pred4)),
                   ("a4_relative_error", fmt(abs(fit[4] - pred4) / abs(pred4))),
                   ("a6_guard_ratio", fmt(guard)), ("fit_condition", fmt(fit.condition))]
    return table


COMMANDS: dict[str, Callable[[RunConfig, int, int], Table]] = {
    "chi3-scan": cmd_chi3_scan,
    "signal-compare": cmd_signal_compare,
    "fdt-check": cmd_fdt_check,
    "correlator-table": cmd_correlator_table,
    "two-atom-demo": cmd_two_atom_demo,
    "oracle-validate": cmd_oracle_validate,
}


# ------------------------------------------------------------------ driver


def run(cfg: RunConfig, out: str | Path | None = None, threads: int = 1) -> tuple[Path, Path]:
    """Execute one config; returns the CSV and manifest paths."""
    outdir = Path(out if out is not None else cfg.output["directory"])
    outdir.mkdir(parents=True, exist_ok=True)
    max_dim = int(_number(cfg.run, "max_dim", MAX_DIM, low=1, name="run."))
    t0 = time.perf_counter()
    table = COMMANDS[cfg.command](cfg, threads, max_dim)
    wall = time.perf_counter() - t0
    table.meta = [("command", cfg.command), ("config_sha256", cfg.digest), ("qlight", __version__)] + table.meta
    prefix = cfg.output["prefix"]
    csv_path = outdir / f"{prefix}.csv"
    table.write(csv_path)
    manifest = {
        "command": cfg.command,
        "config_sha256": cfg.digest,
        "csv": csv_path.name,
        "rows": len(table.rows),
        "threads": threads,
        "wall_time_s": round(wall, 6),
        "versions": {"qlight": __version__, "numpy": np.__version__, "python": platform.python_version()},
    }
    man_path = outdir / f"{prefix}.manifest.json"
    man_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    log.info("%s: %d rows in %.2f s -> %s", cfg.command, len(table.rows), wall, csv_path)
    return csv_path, man_path


def main(argv: list[str] | None = None) -> int:
    p = argparse.ArgumentParser(prog="qlight", description="Nonlinear optical signals with quantum light")
    p.add_argument("--config", required=True, help="TOML run config")
    p.add_argument("--out", default=None, help="output directory (overrides output.directory)")
    p.add_argument("--threads", type=int, default=1, help="worker threads for grid sweeps")
    p.add_argument("--verbose", action="store_true")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="[qlight] %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        csv_path, _ = run(cfg, args.out, args.threads)
    except SizeError as exc:
        print(f"size error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except UnsupportedRepresentationError as exc:
        print(f"unsupported representation: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ContractError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.verbose:
        print(csv_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
