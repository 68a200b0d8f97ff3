"""Assembled solution operators on the model half-space.

Per tangential mode the homogeneous Dirichlet problem is solved by the two
order-reducing convolutions, first the anticausal one and then the causal
one applied to its result; the nonhomogeneous
Dirichlet, Neumann and exterior-data problems are built on top of it with the
explicit Poisson operators.  :func:`solve_halfplane` assembles modes with a
discrete Fourier transform in the tangential variable.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, ModeFailures, MuhsError
from .halfline import (
    MINUS,
    PLUS,
    GridFn,
    HalfLineGrid,
    ModeParams,
    extend_by_zero,
    forward_op,
    forward_op_wholeline,
    join,
    origin_value,
    restrict,
    xi_minus_plus_neg,
    xi_plus_neg,
)
from .profiles import smooth_cutoff
from .symbols import as_order
from .traces import gamma1_weighted, poisson_dirichlet, poisson_neumann


def _dirichlet_parts(f: GridFn, mode: ModeParams, tail_tol):
    v = xi_minus_plus_neg(f, mode, tail_tol)
    u = xi_plus_neg(v, mode)
    return u.replace(meta={"tail_bound": v.meta["tail_bound"], "v_origin": v.origin}), v


def solve_dirichlet_hom(f: GridFn, mode: ModeParams, tail_tol=1e-10) -> GridFn:
    """Supported solution of ``r+ (1 - Delta)^a u = f`` for one mode."""
    return _dirichlet_parts(f, mode, tail_tol)[0]


def solve_dirichlet_nonhom(f: GridFn, phi, mode: ModeParams, tail_tol=1e-10) -> GridFn:
    """``r+ P u = f`` with weighted Dirichlet trace ``gamma_{a-1,0} u = phi``."""
    u = solve_dirichlet_hom(f, mode, tail_tol)
    return (u + poisson_dirichlet(phi, mode, f.grid)).replace(meta=dict(u.meta))


def solve_neumann(f: GridFn, psi, mode: ModeParams, tail_tol=1e-10, trace="exact") -> GridFn:
    """``r+ P u = f`` with Neumann trace ``psi``.

    Takes the homogeneous Dirichlet solution ``w`` and adds the Neumann
    Poisson solution for the datum ``psi - gamma1(w)``.  ``gamma1(w)`` equals
    the anticausal convolution of ``f`` at ``x = 0`` exactly; ``trace="fit"``
    extrapolates it from the grid values instead.
    """
    u, v = _dirichlet_parts(f, mode, tail_tol)
    if trace == "exact":
        g1 = v.origin
    elif trace == "fit":
        g1 = gamma1_weighted(u, mode.order).value
    else:
        raise InvalidArgumentError("trace must be 'exact' or 'fit'")
    out = u + poisson_neumann(complex(psi) - g1, mode, f.grid)
    return out.replace(meta={**u.meta, "gamma1_RDf": g1})


# ---------------------------------------------------------------------------
# exterior data


@dataclass(frozen=True)
class ExteriorData:
    """Right-hand side ``f`` on ``x > 0`` and Dirichlet datum ``g`` on ``x < 0``."""

    f: GridFn
    g: GridFn
    extension_strategy: str = "zero"

    def __post_init__(self):
        if self.f.support != PLUS or self.g.support != MINUS:
            raise InvalidArgumentError("ExteriorData needs f on x > 0 and g on x < 0")
        if self.f.grid != self.g.grid:
            raise InvalidArgumentError("f and g must share one grid")
        if self.extension_strategy not in ("zero", "reflection"):
            raise InvalidArgumentError("extension_strategy must be 'zero' or 'reflection'")


def extension(data: ExteriorData) -> GridFn:
    """Whole-line extension G of the exterior datum, per the chosen strategy."""
    g, grid = data.g, data.g.grid
    g0 = origin_value(g)
    if data.extension_strategy == "zero":
        inside = np.zeros(grid.n_points, dtype=complex)
    else:
        L = grid.length
        inside = g.values * smooth_cutoff(grid.nodes, L / 8, L / 4)
    return join(g, g0, GridFn(grid, inside, PLUS))


def solve_exterior(data: ExteriorData, mode: ModeParams, tail_tol=1e-10, pad_factor=4) -> GridFn:
    """Solution ``U`` with ``r+ P U = f`` on ``x > 0`` and ``U = g`` on ``x < 0``.

    ``U = e+ u + G`` where ``u`` solves the homogeneous Dirichlet problem with
    right-hand side ``f - r+ P G``; returned on the whole line.
    """
    G = extension(data)
    PG = forward_op_wholeline(G, mode, pad_factor)
    N = data.f.grid.n_points
    rhs = data.f - restrict(PG)
    rhs = rhs.replace(origin=origin_value(data.f) - PG.values[N])
    u = solve_dirichlet_hom(rhs, mode, tail_tol)
    U = extend_by_zero(u) + G
    return U.replace(meta={"strategy": data.extension_strategy,
                           "warnings": list(PG.meta.get("warnings", []))})


def exterior_forward(U: GridFn, data: ExteriorData, mode: ModeParams, pad_factor=4) -> GridFn:
    """``r+ P U`` for an exterior solution, with the boundary-corrected forward map on ``u = r+ (U - G)``."""
    G = extension(data)
    u = restrict(U - G)
    return forward_op(u, mode) + restrict(forward_op_wholeline(G, mode, pad_factor))


def interior_residual(Pu: GridFn, f: GridFn, trim=0.05) -> float:
    """Relative L^2 misfit of ``Pu`` against ``f`` with ``trim`` of the nodes dropped at each end."""
    n = f.grid.n_points
    k = int(round(trim * n))
    sel = slice(k, n - k)
    ref = np.linalg.norm(f.values[sel])
    diff = np.linalg.norm(Pu.values[sel] - f.values[sel])
    return float(diff / ref) if ref > 0 else float(diff)


# ---------------------------------------------------------------------------
# half-plane assembly


@dataclass(frozen=True, eq=False)
class HalfPlaneField:
    """Values on a periodic tangential grid (M points, spacing h') times a normal half-line grid.

    ``origins`` optionally holds the M values at ``x_n = 0`` (used as the
    boundary samples of a right-hand side instead of extrapolating).
    """

    tangential_points: int
    tangential_spacing: float
    normal_grid: HalfLineGrid
    values: np.ndarray
    origins: np.ndarray | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != (self.tangential_points, self.normal_grid.n_points):
            raise InvalidArgumentError(
                f"values shape {vals.shape} does not match grids "
                f"({self.tangential_points}, {self.normal_grid.n_points})"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.origins is not None:
            org = np.array(self.origins, dtype=complex)
            if org.shape != (self.tangential_points,):
                raise InvalidArgumentError("origins must hold one value per tangential point")
            org.setflags(write=False)
            object.__setattr__(self, "origins", org)

    @property
    def tangential_nodes(self):
        return np.arange(self.tangential_points) * self.tangential_spacing

    def tangential_frequencies(self):
        return 2 * np.pi * np.fft.fftfreq(self.tangential_points, self.tangential_spacing)


KINDS = ("dirichlet_hom", "dirichlet_nonhom", "neumann")


def mode_threads(default=0):
    """Worker count from ``MUHS_THREADS`` (0 or unset means sequential)."""
    raw = os.environ.get("MUHS_THREADS", str(default))
    try:
        return max(int(raw), 0)
    except ValueError as exc:
        raise InvalidArgumentError(f"MUHS_THREADS must be an integer, got {raw!r}") from exc


def solve_halfplane(kind, f: HalfPlaneField | None, a, boundary=None, grid=None,
                    tangential_points=None, tangential_spacing=None, tail_tol=1e-10,
                    threads=None) -> HalfPlaneField:
    """Solve per tangential Fourier mode with ``sigma_k = (1 + xi'_k^2)^(1/2)``.

    ``f`` may be ``None`` (zero right-hand side) when ``grid`` and the
    tangential layout are given.  ``boundary`` holds phi (``dirichlet_nonhom``)
    or psi (``neumann``) at the M tangential nodes.
    """
    if kind not in KINDS:
        raise InvalidArgumentError(f"kind must be one of {KINDS}")
    a = as_order(a)
    if f is not None:
        grid, M, hp = f.normal_grid, f.tangential_points, f.tangential_spacing
        f_hat = np.fft.fft(f.values, axis=0)
        o_hat = None if f.origins is None else np.fft.fft(f.origins)
    else:
        if grid is None or tangential_points is None or tangential_spacing is None:
            raise InvalidArgumentError("without f, pass grid, tangential_points and tangential_spacing")
        M, hp = int(tangential_points), float(tangential_spacing)
        f_hat = np.zeros((M, grid.n_points), dtype=complex)
        o_hat = np.zeros(M, dtype=complex)
    if kind == "dirichlet_hom":
        b_hat = np.zeros(M, dtype=complex)
    else:
        if boundary is None:
            raise InvalidArgumentError(f"{kind} needs boundary data")
        boundary = np.asarray(boundary, dtype=complex)
        if boundary.shape != (M,):
            raise InvalidArgumentError(f"boundary data must have length {M}")
        b_hat = np.fft.fft(boundary)
    sigmas = np.sqrt(1.0 + (2 * np.pi * np.fft.fftfreq(M, hp)) ** 2)

    def one(k):
        mode = ModeParams(sigmas[k], a)
        rhs = GridFn(grid, f_hat[k], PLUS, origin=None if o_hat is None else o_hat[k])
        if kind == "dirichlet_hom":
            return solve_dirichlet_hom(rhs, mode, tail_tol).values
        if kind == "dirichlet_nonhom":
            return solve_dirichlet_nonhom(rhs, b_hat[k], mode, tail_tol).values
        return solve_neumann(rhs, b_hat[k], mode, tail_tol).values

    workers = mode_threads() if threads is None else threads
    results, failures = [None] * M, []

    def guarded(k):
        try:
            results[k] = one(k)
        except MuhsError as exc:
            failures.append((k, exc))

    if workers > 0:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(guarded, range(M)))
    else:
        for k in range(M):
            guarded(k)
    if failures:
        raise ModeFailures(sorted(failures, key=lambda t: t[0]))
    u = np.fft.ifft(np.array(results), axis=0)
    return HalfPlaneField(M, hp, grid, u)


def write_halfplane(stem, field: HalfPlaneField, params=None):
    """Write ``<stem>_re.csv``, ``<stem>_im.csv`` and a ``<stem>.json`` sidecar."""
    stem = Path(stem)
    np.savetxt(f"{stem}_re.csv", field.values.real, delimiter=",", fmt="%.17g")
    np.savetxt(f"{stem}_im.csv", field.values.imag, delimiter=",", fmt="%.17g")
    sidecar = {
        "tangential_points": field.tangential_points,
        "tangential_spacing": field.tangential_spacing,
        "normal": {"n_points": field.normal_grid.n_points, "spacing": field.normal_grid.spacing},
        "re": f"{stem.name}_re.csv",
        "im": f"{stem.name}_im.csv",
        "params": params or {},
    }
    if field.origins is not None:
        sidecar["origins_re"] = field.origins.real.tolist()
        sidecar["origins_im"] = field.origins.imag.tolist()
    Path(f"{stem}.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True), encoding="utf-8")


def read_halfplane(sidecar_path):
    """Read a field written by :func:`write_halfplane`; returns ``(field, params)``."""
    sidecar_path = Path(sidecar_path)
    meta = json.loads(sidecar_path.read_text(encoding="utf-8"))
    base = sidecar_path.parent
    re_ = np.loadtxt(base / meta["re"], delimiter=",", ndmin=2)
    im_ = np.loadtxt(base / meta["im"], delimiter=",", ndmin=2)
    grid = HalfLineGrid(int(meta["normal"]["n_points"]), float(meta["normal"]["spacing"]))
    origins = None
    if "origins_re" in meta:
        origins = np.array(meta["origins_re"]) + 1j * np.array(meta["origins_im"])
    field = HalfPlaneField(int(meta["tangential_points"]), float(meta["tangential_spacing"]),
                           grid, re_ + 1j * im_, origins)
    return field, meta.get("params", {})
