"""Command-line front end.

Every subcommand parses its configuration, calls the library and writes a
JSON report (plus CSV fields where there is one).  Exit status: 0 success,
1 usage error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from .errors import DomainError, InvalidArgumentError, MuhsError
from .halfline import HalfLineGrid, ModeParams, forward_op, read_csv, restrict, write_csv
from .oracle import convergence_study, dense_oracle_dirichlet, fit_boundary_exponent
from .profiles import parse_profile
from .solvers import (
    ExteriorData,
    HalfPlaneField,
    exterior_forward,
    interior_residual,
    read_halfplane,
    solve_dirichlet_hom,
    solve_dirichlet_nonhom,
    solve_exterior,
    solve_halfplane,
    solve_neumann,
    write_halfplane,
)
from .symbols import ComplexOrder, as_order, check_mu_transmission, format_complex, load_symbol, parse_symbol
from .traces import dtn_symbol, gamma0_weighted, gamma1_weighted

COMMANDS = (
    "solve-dirichlet",
    "solve-neumann",
    "solve-exterior",
    "solve-halfplane",
    "dtn",
    "check-transmission",
    "fit-exponent",
    "oracle-compare",
    "convergence",
)


class UsageError(Exception):
    pass


@dataclasses.dataclass
class RunConfig:
    command: str
    a: complex = 0.5 + 0j
    sigma: float = 1.0
    grid_n: int = 1024
    grid_l: float | str = "auto"
    f_spec: str = "gaussian:0.5,2"
    phi: complex = 0j
    psi: complex = 0j
    g_spec: str = "gaussian:2,3"
    out_path: str | None = None
    format: str = "csv"
    seed: int = 0
    strategy: str = "zero"
    kind: str = "dirichlet_hom"
    tangential_points: int = 16
    tangential_spacing: float | None = None
    tangential_profile: str = "one"
    input: str | None = None
    symbol: str | None = None
    symbol_file: str | None = None
    mu: complex = 0j
    tol: float = 1e-6
    fd_step: float = 1e-4
    window: tuple | None = None
    correction_degree: int = 3
    solver: str = "dirichlet_hom"
    resolutions: tuple = (256, 512, 1024, 2048)
    refine: int = 2

    def grid(self, sigma_min=None) -> HalfLineGrid:
        if self.grid_l == "auto":
            return HalfLineGrid.auto(self.sigma if sigma_min is None else sigma_min, self.grid_n)
        return HalfLineGrid.from_length(self.grid_n, self.grid_l)

    def mode(self) -> ModeParams:
        return ModeParams(self.sigma, self.a)

    def echo(self):
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, complex):
                v = format_complex(v)
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _complex(key, text):
    if isinstance(text, (int, float, complex)) and not isinstance(text, bool):
        return complex(text)
    try:
        return ComplexOrder.parse(str(text)).value
    except (ValueError, InvalidArgumentError) as exc:
        raise UsageError(f"{key}: malformed complex literal {text!r}") from exc


def _coerce(key, value):
    """Turn a raw flag or config-file value into the RunConfig field type."""
    try:
        if key in ("a", "phi", "psi", "mu"):
            return _complex(key, value)
        if key in ("sigma", "tol", "fd_step"):
            return float(value)
        if key == "tangential_spacing":
            return None if value is None else float(value)
        if key in ("grid_n", "seed", "tangential_points", "correction_degree", "refine"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if key == "grid_l":
            return "auto" if value == "auto" else float(value)
        if key == "resolutions":
            items = value.split(",") if isinstance(value, str) else value
            return tuple(int(v) for v in items)
        if key == "window":
            if value is None:
                return None
            items = value.split(",") if isinstance(value, str) else value
            lo, hi = (float(v) for v in items)
            return (lo, hi)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{key}: bad value {value!r}") from exc
    return value


def _validate(cfg: RunConfig):
    if cfg.command not in COMMANDS:
        raise UsageError(f"command: unknown {cfg.command!r}")
    try:
        as_order(cfg.a, allow_one=False)
    except DomainError as exc:
        raise UsageError(f"a: {exc}") from exc
    if not (math.isfinite(cfg.sigma) and cfg.sigma >= 1):
        raise UsageError(f"sigma: must be >= 1, got {cfg.sigma}")
    if cfg.grid_n < 16:
        raise UsageError(f"grid_n: need at least 16 nodes, got {cfg.grid_n}")
    if cfg.grid_l != "auto" and not cfg.grid_l > 0:
        raise UsageError(f"grid_l: must be positive or 'auto', got {cfg.grid_l}")
    if cfg.format not in ("csv", "json"):
        raise UsageError(f"format: must be csv or json, got {cfg.format!r}")
    if cfg.strategy not in ("zero", "reflection"):
        raise UsageError(f"strategy: must be zero or reflection, got {cfg.strategy!r}")
    for key in ("f_spec", "g_spec"):
        try:
            parse_profile(getattr(cfg, key))
        except InvalidArgumentError as exc:
            raise UsageError(f"{key}: {exc}") from exc
    if cfg.command == "check-transmission" and not (cfg.symbol or cfg.symbol_file):
        raise UsageError("symbol: check-transmission needs --symbol or --symbol-file")
    if cfg.command == "fit-exponent" and not cfg.input:
        raise UsageError("input: fit-exponent needs --input CSV")


def build_parser():
    p = argparse.ArgumentParser(prog="muhs", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with RunConfig keys; flags override it")
    p.add_argument("--a", help="order, RE or RE+IMi with 0 < RE < 1")
    p.add_argument("--sigma", help="tangential weight <xi'>, >= 1")
    p.add_argument("--grid-n", dest="grid_n")
    p.add_argument("--grid-l", dest="grid_l", help="box length or 'auto' (sigma * L = 36)")
    p.add_argument("--f-spec", dest="f_spec", help="right-hand side profile, e.g. gaussian:0.5,2")
    p.add_argument("--phi", help="Dirichlet datum (complex)")
    p.add_argument("--psi", help="Neumann datum (complex)")
    p.add_argument("--g-spec", dest="g_spec", help="exterior datum profile in the distance to the boundary")
    p.add_argument("--out", dest="out_path", help="output stem; writes <stem>.json and field files")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--seed")
    p.add_argument("--strategy", help="exterior extension: zero or reflection")
    p.add_argument("--kind", help="half-plane problem: dirichlet_hom, dirichlet_nonhom or neumann")
    p.add_argument("--tangential-points", dest="tangential_points")
    p.add_argument("--tangential-spacing", dest="tangential_spacing", help="default 2*pi/M")
    p.add_argument("--tangential-profile", dest="tangential_profile", help="one, cos:k or sin:k")
    p.add_argument("--input", help="field CSV (fit-exponent) or half-plane JSON sidecar")
    p.add_argument("--symbol", help="abs2a:A, halfplane_plus or halfplane_minus")
    p.add_argument("--symbol-file", dest="symbol_file")
    p.add_argument("--mu")
    p.add_argument("--tol")
    p.add_argument("--fd-step", dest="fd_step")
    p.add_argument("--window", help="fit window LO,HI")
    p.add_argument("--correction-degree", dest="correction_degree")
    p.add_argument("--solver", help="convergence target: dirichlet_hom, xi_plus, xi_minus_plus, forward_op")
    p.add_argument("--resolutions", help="comma-separated, each double the previous")
    p.add_argument("--refine", help="oracle refinement levels")

    def fail(message):
        p.print_usage(sys.stderr)
        raise UsageError(message)

    p.error = fail
    return p


def parse_config(argv, config_file=None) -> RunConfig:
    """Merge defaults, an optional JSON config file and flags (flags win)."""
    ns = build_parser().parse_args(argv)
    raw = {}
    path = config_file or ns.config
    if path:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"config: cannot read {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config: top level must be an object")
        for key, value in data.items():
            k = key.replace("-", "_")
            if k not in _FIELDS or k == "command":
                raise UsageError(f"config: unknown key {key!r}")
            raw[k] = value
    for key, value in vars(ns).items():
        if key in _FIELDS and key != "command" and value is not None:
            raw[key] = value
    cfg = RunConfig(ns.command, **{k: _coerce(k, v) for k, v in raw.items()})
    _validate(cfg)
    return cfg


# ---------------------------------------------------------------------------
# commands


def _fit_or_note(u, report, window=None, degree=3):
    try:
        report["exponent_fit"] = fit_boundary_exponent(u, window, degree).to_dict()
    except MuhsError as exc:
        report["exponent_fit"] = None
        report.setdefault("notes", []).append(f"exponent fit: {exc}")


def _traces(u, a):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = {"gamma0": gamma0_weighted(u, a).to_dict(), "gamma1": gamma1_weighted(u, a).to_dict()}
    return out, [str(w.message) for w in caught]


def _field_output(cfg, u):
    if cfg.out_path and cfg.format == "csv":
        write_csv(f"{cfg.out_path}.csv", u)


def _solve_halfline(cfg: RunConfig, report):
    grid, mode = cfg.grid(), cfg.mode()
    f = parse_profile(cfg.f_spec).sample(grid)
    if cfg.command == "solve-neumann":
        u = solve_neumann(f, cfg.psi, mode)
    elif cfg.phi != 0:
        u = solve_dirichlet_nonhom(f, cfg.phi, mode)
    else:
        u = solve_dirichlet_hom(f, mode)
    report["forward_residual"] = interior_residual(forward_op(u, mode), f)
    report["trace_values"], notes = _traces(u, mode.order)
    if notes:
        report["notes"] = notes
    _fit_or_note(u, report, cfg.window, cfg.correction_degree)
    _field_output(cfg, u)


def _solve_exterior(cfg: RunConfig, report):
    grid, mode = cfg.grid(), cfg.mode()
    f = parse_profile(cfg.f_spec).sample(grid)
    g = parse_profile(cfg.g_spec).sample(grid, "minus")
    data = ExteriorData(f, g, cfg.strategy)
    U = solve_exterior(data, mode)
    report["forward_residual"] = interior_residual(exterior_forward(U, data, mode), f)
    u = restrict(U)
    report["trace_values"], notes = _traces(u, mode.order)
    if notes or U.meta["warnings"]:
        report["notes"] = notes + list(U.meta["warnings"])
    _fit_or_note(u, report, cfg.window, cfg.correction_degree)
    _field_output(cfg, U)


def _tangential(cfg: RunConfig, xp):
    kind, _, arg = cfg.tangential_profile.partition(":")
    if kind == "one":
        return np.ones_like(xp)
    try:
        k = float(arg)
    except ValueError as exc:
        raise UsageError(f"tangential_profile: bad frequency in {cfg.tangential_profile!r}") from exc
    if kind == "cos":
        return np.cos(k * xp)
    if kind == "sin":
        return np.sin(k * xp)
    raise UsageError(f"tangential_profile: unknown {cfg.tangential_profile!r}")


def _solve_halfplane(cfg: RunConfig, report):
    if cfg.input:
        field, _ = read_halfplane(cfg.input)
        boundary_nodes = field.tangential_nodes
        grid, M, hp = field.normal_grid, field.tangential_points, field.tangential_spacing
    else:
        M = cfg.tangential_points
        hp = 2 * np.pi / M if cfg.tangential_spacing is None else cfg.tangential_spacing
        grid = cfg.grid(sigma_min=1.0)
        boundary_nodes = np.arange(M) * hp
        profile = parse_profile(cfg.f_spec).sample(grid)
        tang = _tangential(cfg, boundary_nodes)
        field = HalfPlaneField(M, hp, grid, np.outer(tang, profile.values), tang * profile.origin)
    datum = cfg.psi if cfg.kind == "neumann" else cfg.phi
    boundary = None if cfg.kind == "dirichlet_hom" else datum * _tangential(cfg, boundary_nodes)
    try:
        out = solve_halfplane(cfg.kind, field, cfg.a, boundary=boundary)
    except InvalidArgumentError as exc:
        raise UsageError(f"kind: {exc}") from exc
    report["field_shape"] = [out.tangential_points, out.normal_grid.n_points]
    report["max_abs"] = float(np.max(np.abs(out.values)))
    if cfg.out_path:
        write_halfplane(f"{cfg.out_path}_field", out, {"a": format_complex(cfg.a), "kind": cfg.kind})


def _dtn(cfg: RunConfig, report):
    value = dtn_symbol(cfg.mode())
    report["dtn_symbol"] = format_complex(value)
    print(format_complex(value))


def _check_transmission(cfg: RunConfig, report):
    try:
        spec = load_symbol(cfg.symbol_file) if cfg.symbol_file else parse_symbol(cfg.symbol)
    except (OSError, InvalidArgumentError, ValueError) as exc:
        raise UsageError(f"symbol: {exc}") from exc
    res = check_mu_transmission(spec, cfg.mu, fd_step=cfg.fd_step, tol=cfg.tol)
    report["transmission"] = res.to_dict()
    print(f"{spec.name} mu={format_complex(cfg.mu)}: {'PASS' if res.passes else 'FAIL'}")


def _fit_exponent(cfg: RunConfig, report):
    try:
        u = read_csv(cfg.input)
    except (OSError, ValueError) as exc:
        raise UsageError(f"input: {exc}") from exc
    report["exponent_fit"] = fit_boundary_exponent(u, cfg.window, cfg.correction_degree).to_dict()


def _oracle_compare(cfg: RunConfig, report):
    grid, mode = cfg.grid(), cfg.mode()
    f = parse_profile(cfg.f_spec).sample(grid)
    u = solve_dirichlet_hom(f, mode)
    profile = parse_profile(cfg.f_spec)
    o = dense_oracle_dirichlet(lambda x: profile(x, grid.length), mode, grid=grid, refine=cfg.refine)
    ref = np.linalg.norm(o.values)
    diff = np.linalg.norm(u.values - o.values)
    report["oracle_error"] = float(diff / ref) if ref > 0 else float(diff)
    report["oracle_condition"] = o.meta["condition"]
    _field_output(cfg, o)


def _convergence(cfg: RunConfig, report):
    length = 36.0 / cfg.sigma if cfg.grid_l == "auto" else cfg.grid_l
    params = {"a": cfg.a, "sigma": cfg.sigma, "length": length, "f": cfg.f_spec}
    try:
        table = convergence_study(cfg.solver, params, cfg.resolutions)
    except InvalidArgumentError as exc:
        raise UsageError(str(exc)) from exc
    report["study"] = table.to_dict()


_DISPATCH = {
    "solve-dirichlet": _solve_halfline,
    "solve-neumann": _solve_halfline,
    "solve-exterior": _solve_exterior,
    "solve-halfplane": _solve_halfplane,
    "dtn": _dtn,
    "check-transmission": _check_transmission,
    "fit-exponent": _fit_exponent,
    "oracle-compare": _oracle_compare,
    "convergence": _convergence,
}


def _json_default(obj):
    if isinstance(obj, complex):
        return format_complex(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_json(report) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_json_default)


def run(cfg: RunConfig) -> int:
    """Execute one command; returns the exit status."""
    start = time.perf_counter()
    report = {"config": cfg.echo()}
    _DISPATCH[cfg.command](cfg, report)
    report["wall_time_ms"] = (time.perf_counter() - start) * 1e3
    text = report_json(report)
    if cfg.out_path:
        Path(f"{cfg.out_path}.json").write_text(text + "\n", encoding="utf-8")
    if cfg.command != "dtn":
        print(text)
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (InvalidArgumentError, DomainError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except MuhsError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
