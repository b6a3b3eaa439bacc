"""Configuration-driven experiment runner.

Subcommands: run, converge, reverse, gridscan, spectrum.  Every experiment
is described by a flat ``key = value`` config file with dotted keys (see
README for the grammar and the full key list); results are CSV files plus a
final-state checkpoint and a JSON provenance record.  Outputs are
deterministic: identical configs produce byte-identical CSV/checkpoint
files (the provenance record additionally carries wall time).

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__, _config
from ._kernels import BACKEND
from .diagnostics import (
    convergence_study,
    reversibility_error,
    spectrum as _spectrum_fn,
    state_distance,
)
from .errors import ConfigError, MgwaveError
from .grid import make_grid
from .models import harmonic_excited, henon_heiles, initial_state_for, secrest_johnson
from .propagator import FLAVORS, MODES, compose_scheme, propagate
from .wavefunction import save_state

# -- config parsing -----------------------------------------------------------

_COMMON_KEYS = {
    "model.label", "model.dims", "model.coupling",
    "grid.counts", "grid.dq", "grid.q_ctr", "grid.q_min", "grid.q_max", "grid.p_ctr",
    "mode", "flavor", "scheme.name", "scheme.order",
    "dt", "t_f", "sample_every", "hbar",
}
_SUBCOMMAND_KEYS = {
    "run": set(),
    "converge": {"converge.dt_max", "converge.n_halvings"},
    "reverse": {"reverse.sweep", "reverse.dts", "reverse.times", "reverse.dt", "reverse.t_f"},
    "gridscan": {"gridscan.doublings", "gridscan.t_f", "gridscan.dt"},
    "spectrum": {"spectrum.t_damp"},
}

#: grids above this size require the --large flag
LARGE_GRID_POINTS = 4_000_000


class Config:
    """Parsed config: dotted keys mapped to raw strings with line numbers."""

    def __init__(self, entries, path="<config>"):
        self.entries = entries
        self.path = path

    def _err(self, key, message):
        lineno = self.entries[key][1] if key in self.entries else "?"
        return ConfigError(f"{self.path}:{lineno}: key {key!r}: {message}")

    def has(self, key):
        return key in self.entries

    def raw(self, key, default=None):
        if key in self.entries:
            return self.entries[key][0]
        return default

    def get_str(self, key, default=None, choices=None):
        val = self.raw(key, default)
        if val is None:
            raise ConfigError(f"{self.path}: missing required key {key!r}")
        if choices is not None and val not in choices:
            raise self._err(key, f"expected one of {sorted(choices)}, got {val!r}")
        return val

    def get_float(self, key, default=None):
        val = self.raw(key, None)
        if val is None:
            if default is None:
                raise ConfigError(f"{self.path}: missing required key {key!r}")
            return float(default)
        try:
            return float(val)
        except ValueError:
            raise self._err(key, f"expected a real number, got {val!r}") from None

    def get_int(self, key, default=None):
        val = self.raw(key, None)
        if val is None:
            if default is None:
                raise ConfigError(f"{self.path}: missing required key {key!r}")
            return int(default)
        try:
            return int(val)
        except ValueError:
            raise self._err(key, f"expected an integer, got {val!r}") from None

    def get_floats(self, key, default=None, length=None):
        val = self.raw(key, None)
        if val is None:
            if default is None:
                raise ConfigError(f"{self.path}: missing required key {key!r}")
            out = [float(x) for x in default]
        else:
            try:
                out = [float(x) for x in str(val).split()]
            except ValueError:
                raise self._err(key, f"expected space-separated reals, got {val!r}") from None
        if length is not None:
            if len(out) == 1:
                out = out * length
            if len(out) != length:
                raise self._err(key, f"expected {length} values, got {len(out)}")
        return out

    def get_ints(self, key, default=None, length=None):
        floats = self.get_floats(key, default, length)
        out = []
        for x in floats:
            if x != int(x):
                raise self._err(key, f"expected integers, got {x}")
            out.append(int(x))
        return out


def parse_config(path, subcommand) -> Config:
    """Parse the flat ``key = value`` grammar; unknown keys are errors."""
    allowed = _COMMON_KEYS | _SUBCOMMAND_KEYS[subcommand]
    entries = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in allowed:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r} for '{subcommand}'")
        if key in entries:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{path}:{lineno}: empty value for {key!r}")
        entries[key] = (value, lineno)
    return Config(entries, path=str(path))


# -- experiment assembly ------------------------------------------------------

_MODEL_DEFAULTS = {
    "harmonic": {
        "counts": [32, 32, 32],
        "dq": [0.4375] * 3,
        "q_ctr": [0.0, 0.0, 0.0],
        "p_ctr": [0.0, 0.0, 0.0],
        "mode": "reversible",
        "flavor": "TVT",
        "scheme": ("optimal", 10),
        "dt": 50.0 / 512.0,
        "t_f": 50.0,
        "sample_every": 8,
    },
    "scattering": {
        "counts": [128, 128],
        "q_min": [-14.0, 0.0],
        "q_max": [14.0, 48.0],
        "p_ctr": [0.0, -3.56],
        "mode": "reversible",
        "flavor": "VTV",
        "scheme": ("optimal", 10),
        "dt": 0.1,
        "t_f": 30.0,
        "sample_every": 10,
    },
    "henon-heiles": {
        "dims": 4,
        "counts": 8,
        "q_min": -3.0,
        "q_max": 7.0,
        "p_ctr": 0.0,
        "mode": "reversible",
        "flavor": "TVT",
        "scheme": ("suzuki", 4),
        "dt": 0.05,
        "t_f": 60.0,
        "sample_every": 4,
    },
}


def build_model(cfg: Config):
    label = cfg.get_str("model.label", default="harmonic",
                        choices=set(_MODEL_DEFAULTS))
    if label == "harmonic":
        return harmonic_excited()
    if label == "scattering":
        return secrest_johnson()
    dims = cfg.get_int("model.dims", default=_MODEL_DEFAULTS[label]["dims"])
    coupling = cfg.get_float("model.coupling", default=0.111803)
    if dims < 2:
        raise cfg._err("model.dims", "needs at least 2 dimensions")
    return henon_heiles(dims=dims, coupling=coupling)


def build_grid(cfg: Config, model, large: bool):
    defaults = _MODEL_DEFAULTS[model.label if model.label in _MODEL_DEFAULTS
                               else "henon-heiles"]
    d = model.dims

    def dflt(name):
        v = defaults.get(name)
        if v is None:
            return None
        return v if isinstance(v, list) else [v] * d

    counts = cfg.get_ints("grid.counts", default=dflt("counts"), length=d)
    p_ctr = cfg.get_floats("grid.p_ctr", default=dflt("p_ctr"), length=d)
    hbar = cfg.get_float("hbar", default=1.0)
    use_range = cfg.has("grid.q_min") or cfg.has("grid.q_max") or (
        not cfg.has("grid.dq") and "q_min" in defaults
    )
    if use_range:
        q_min = cfg.get_floats("grid.q_min", default=dflt("q_min"), length=d)
        q_max = cfg.get_floats("grid.q_max", default=dflt("q_max"), length=d)
        for l in range(d):
            if not q_max[l] > q_min[l]:
                raise cfg._err("grid.q_max", f"dimension {l}: range is empty")
        q_ctr = [(lo + hi) / 2.0 for lo, hi in zip(q_min, q_max)]
        dq = [(hi - lo) / n for lo, hi, n in zip(q_min, q_max, counts)]
    else:
        q_ctr = cfg.get_floats("grid.q_ctr", default=dflt("q_ctr"), length=d)
        dq = cfg.get_floats("grid.dq", default=dflt("dq"), length=d)
    for l, n in enumerate(counts):
        if n % 2 != 0:
            raise cfg._err("grid.counts", f"dimension {l}: point count must be even")
    total = math.prod(counts)
    if total > LARGE_GRID_POINTS and not large:
        raise ConfigError(
            f"grid has {total} points (> {LARGE_GRID_POINTS}); pass --large to allow"
        )
    return make_grid(counts, q_ctr, dq, p_ctr, hbar=hbar)


def build_scheme(cfg: Config, model):
    defaults = _MODEL_DEFAULTS[model.label if model.label in _MODEL_DEFAULTS
                               else "henon-heiles"]
    name = cfg.get_str("scheme.name", default=defaults["scheme"][0])
    order = cfg.get_int("scheme.order", default=defaults["scheme"][1])
    try:
        return compose_scheme(name, order)
    except MgwaveError as exc:
        raise ConfigError(f"{cfg.path}: {exc}") from None


def _step_count(cfg: Config, t_f: float, dt: float) -> int:
    n = t_f / dt
    if abs(n - round(n)) > 4.0 * math.ulp(max(n, 1.0)):
        raise ConfigError(
            f"{cfg.path}: t_f/dt = {n!r} is not an integer step count"
        )
    if round(n) < 1:
        raise ConfigError(f"{cfg.path}: t_f/dt must be at least 1")
    return int(round(n))


def _mode_flavor(cfg: Config, model):
    defaults = _MODEL_DEFAULTS[model.label if model.label in _MODEL_DEFAULTS
                               else "henon-heiles"]
    mode = cfg.get_str("mode", default=defaults["mode"], choices=set(MODES))
    flavor = cfg.get_str("flavor", default=defaults["flavor"], choices=set(FLAVORS))
    return mode, flavor


# -- output helpers -----------------------------------------------------------

def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def write_provenance(path, cfg: Config, extra):
    record = {
        "config": {k: v[0] for k, v in sorted(cfg.entries.items())},
        "config_path": cfg.path,
        "versions": {
            "mgwave": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "kernel_backend": BACKEND,
        "threads": _config.get_num_threads(),
    }
    record.update(extra)
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _series_rows(series, d):
    rows = []
    has_overlap = series.overlap_with_reference is not None
    for i, t in enumerate(series.times):
        row = [t, series.norm[i], series.energy[i]]
        row += list(series.q_ctr[i]) + list(series.p_ctr[i])
        row += list(series.expect_q[i]) + list(series.expect_p[i])
        if has_overlap:
            ov = series.overlap_with_reference[i]
            row += [ov.real, ov.imag]
        rows.append(row)
    header = ["t [n.u.]", "norm", "energy [n.u.]"]
    for tag in ("q_ctr", "p_ctr", "expect_q", "expect_p"):
        header += [f"{tag}_{l + 1} [n.u.]" for l in range(d)]
    if has_overlap:
        header += ["re_overlap", "im_overlap"]
    return header, rows


# -- subcommands --------------------------------------------------------------

def cmd_run(cfg: Config, out: Path, large: bool) -> int:
    model = build_model(cfg)
    grid = build_grid(cfg, model, large)
    scheme = build_scheme(cfg, model)
    mode, flavor = _mode_flavor(cfg, model)
    dt = cfg.get_float("dt", default=_defaults_for(model)["dt"])
    t_f = cfg.get_float("t_f", default=_defaults_for(model)["t_f"])
    sample_every = cfg.get_int("sample_every", default=_defaults_for(model)["sample_every"])
    n_steps = _step_count(cfg, t_f, dt)
    state0 = initial_state_for(model.label, grid)
    start = time.perf_counter()
    report = propagate(
        state0, model, mode, scheme, dt, n_steps,
        sample_every=sample_every, flavor=flavor, reference=state0,
    )
    wall = time.perf_counter() - start
    header, rows = _series_rows(report.series, model.dims)
    write_csv(out / "series.csv", header, rows)
    save_state(report.final_state, out / "final_state.mgwf")
    write_provenance(out / "run.json", cfg, {
        "subcommand": "run",
        "wall_time_s": wall,
        "completed_steps": report.completed_steps,
        "aborted": report.aborted,
        "counts": report.counts,
    })
    if report.aborted:
        print(
            f"numerical failure after step {report.completed_steps}; "
            "partial series flushed",
            file=sys.stderr,
        )
        return 3
    return 0


def _defaults_for(model):
    label = model.label if model.label in _MODEL_DEFAULTS else "henon-heiles"
    return _MODEL_DEFAULTS[label]


def cmd_converge(cfg: Config, out: Path, large: bool) -> int:
    model = build_model(cfg)
    grid = build_grid(cfg, model, large)
    scheme = build_scheme(cfg, model)
    mode, flavor = _mode_flavor(cfg, model)
    t_f = cfg.get_float("t_f", default=_defaults_for(model)["t_f"])
    dt_max = cfg.get_float("converge.dt_max")
    n_halvings = cfg.get_int("converge.n_halvings")
    if n_halvings < 3:
        raise cfg._err("converge.n_halvings", "need at least 3 halvings")
    state0 = initial_state_for(model.label, grid)
    table = convergence_study(model, mode, scheme, dt_max, n_halvings, t_f, state0, flavor)
    rows = [
        [table.dts[j], table.errors[j], int(table.fit_mask[j])]
        for j in range(len(table.dts))
    ]
    rows.append(["fitted_order", table.fitted_order, ""])
    rows.append(["floor_estimate", table.floor_estimate, ""])
    write_csv(out / "converge.csv", ["dt [n.u.]", "error", "used_in_fit"], rows)
    write_provenance(out / "run.json", cfg, {
        "subcommand": "converge",
        "fitted_order": table.fitted_order,
        "floor_estimate": table.floor_estimate,
    })
    return 0


def cmd_reverse(cfg: Config, out: Path, large: bool) -> int:
    model = build_model(cfg)
    grid = build_grid(cfg, model, large)
    scheme = build_scheme(cfg, model)
    _, flavor = _mode_flavor(cfg, model)
    state0 = initial_state_for(model.label, grid)
    sweep = cfg.get_str("reverse.sweep", default="dt", choices={"dt", "time"})
    rows = []
    if sweep == "dt":
        t_f = cfg.get_float("reverse.t_f", default=_defaults_for(model)["t_f"])
        dts = cfg.get_floats("reverse.dts")
        for dt in dts:
            n = _step_count(cfg, t_f, dt)
            rev = reversibility_error(state0, model, "reversible", scheme, dt, n, flavor)
            nai = reversibility_error(state0, model, "naive", scheme, dt, n, flavor)
            rows.append([dt, rev, nai])
        header = ["dt [n.u.]", "reversible_distance", "naive_distance"]
    else:
        dt = cfg.get_float("reverse.dt")
        times = cfg.get_floats("reverse.times")
        for t in times:
            n = _step_count(cfg, t, dt)
            rev = reversibility_error(state0, model, "reversible", scheme, dt, n, flavor)
            nai = reversibility_error(state0, model, "naive", scheme, dt, n, flavor)
            rows.append([t, rev, nai])
        header = ["t [n.u.]", "reversible_distance", "naive_distance"]
    write_csv(out / "reverse.csv", header, rows)
    write_provenance(out / "run.json", cfg, {"subcommand": "reverse", "sweep": sweep})
    return 0


def cmd_gridscan(cfg: Config, out: Path, large: bool) -> int:
    """Grid-convergence scan: per doubling of points per dimension, both the
    grid ranges and densities grow by sqrt(2); errors are measured against
    the adaptive run at the largest point count."""
    model = build_model(cfg)
    base_grid = build_grid(cfg, model, large)
    scheme = build_scheme(cfg, model)
    _, flavor = _mode_flavor(cfg, model)
    doublings = cfg.get_int("gridscan.doublings", default=3)
    if doublings < 1:
        raise cfg._err("gridscan.doublings", "need at least 1 doubling")
    t_f = cfg.get_float("gridscan.t_f", default=10.0)
    dt = cfg.get_float("gridscan.dt", default=0.1)
    n_steps = _step_count(cfg, t_f, dt)
    d = model.dims
    # fixed-grid runs are centered on the potential minimum so the classical
    # swing of the packet stays inside the box at large point counts
    fixed_center = (
        tuple(float(x) for x in model.minimum)
        if model.minimum is not None
        else base_grid.q_ctr
    )

    def level_grid(j, q_ctr):
        counts = [n * 2**j for n in base_grid.counts]
        dq = [s / 2 ** (j / 2.0) for s in base_grid.dq]
        total = math.prod(counts)
        if total > LARGE_GRID_POINTS and not large:
            raise ConfigError(
                f"gridscan level {j} needs {total} points; pass --large to allow"
            )
        return make_grid(counts, q_ctr, dq, base_grid.p_ctr, hbar=base_grid.hbar)

    def final_state(g, mode):
        st = initial_state_for(model.label, g)
        rep = propagate(st, model, mode, scheme, dt, n_steps,
                        sample_every=n_steps, flavor=flavor, compute_energy=False)
        return None if rep.aborted else rep.final_state

    ref = final_state(level_grid(doublings, base_grid.q_ctr), "reversible")
    if ref is None:
        print("reference run diverged", file=sys.stderr)
        return 3
    rows = []
    for j in range(doublings):
        ga = level_grid(j, base_grid.q_ctr)
        gf = level_grid(j, fixed_center)
        fa = final_state(ga, "reversible")
        ff = final_state(gf, "fixed")
        err_a = state_distance(fa, ref, frame=ref.grid) if fa is not None else math.nan
        err_f = state_distance(ff, ref, frame=ref.grid) if ff is not None else math.nan
        rows.append([ga.counts[0], err_a, err_f])
    write_csv(out / "gridscan.csv",
              ["points_per_dim", "adaptive_error", "fixed_error"], rows)
    write_provenance(out / "run.json", cfg, {
        "subcommand": "gridscan",
        "reference_points_per_dim": ref.grid.counts[0],
    })
    return 0


def cmd_spectrum(cfg: Config, out: Path, large: bool) -> int:
    model = build_model(cfg)
    grid = build_grid(cfg, model, large)
    scheme = build_scheme(cfg, model)
    mode, flavor = _mode_flavor(cfg, model)
    dt = cfg.get_float("dt", default=_defaults_for(model)["dt"])
    t_f = cfg.get_float("t_f", default=_defaults_for(model)["t_f"])
    sample_every = cfg.get_int("sample_every", default=_defaults_for(model)["sample_every"])
    t_damp = cfg.get_float("spectrum.t_damp", default=30.0)
    n_steps = _step_count(cfg, t_f, dt)
    state0 = initial_state_for(model.label, grid)
    report = propagate(
        state0, model, mode, scheme, dt, n_steps,
        sample_every=sample_every, flavor=flavor, reference=state0,
        compute_energy=False,
    )
    if report.aborted:
        print(f"numerical failure after step {report.completed_steps}", file=sys.stderr)
        return 3
    # prepend the exact t=0 sample <psi0|psi0> = 1 (unit-norm initial state)
    times = np.concatenate([[0.0], report.series.times])
    autocorr = np.concatenate([[1.0 + 0.0j], report.series.overlap_with_reference])
    dt_sample = dt * sample_every
    spec = _spectrum_fn(autocorr, dt_sample, t_damp=t_damp, hbar=grid.hbar)
    write_csv(out / "autocorr.csv",
              ["t [n.u.]", "re_autocorr", "im_autocorr"],
              [[t, c.real, c.imag] for t, c in zip(times, autocorr)])
    write_csv(out / "spectrum.csv",
              ["energy [n.u.]", "intensity"],
              [list(row) for row in spec])
    write_provenance(out / "run.json", cfg, {
        "subcommand": "spectrum",
        "t_damp": t_damp,
        "n_autocorr_samples": len(autocorr),
    })
    return 0


_COMMANDS = {
    "run": cmd_run,
    "converge": cmd_converge,
    "reverse": cmd_reverse,
    "gridscan": cmd_gridscan,
    "spectrum": cmd_spectrum,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mgwave",
        description="Wavepacket propagation experiments on moving Fourier grids.",
    )
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="path to a key = value config file")
    parser.add_argument("--out", default=".", help="output directory (created if missing)")
    parser.add_argument("--threads", type=int, default=None, help="cap FFT worker threads")
    parser.add_argument("--large", action="store_true",
                        help="allow grids above the default size limit")
    args = parser.parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("config error: --threads must be >= 1", file=sys.stderr)
            return 2
        _config.set_num_threads(args.threads)
    try:
        cfg = parse_config(args.config, args.subcommand)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.subcommand](cfg, out, args.large)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MgwaveError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
