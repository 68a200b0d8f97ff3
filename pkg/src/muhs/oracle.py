"""Independent brute-force oracle and boundary-regularity diagnostics.

The oracle shares no code with the factorization solver: it builds the
periodic spectral multiplier on a box ``[-L, L]``, forms the circulant by an
explicit inverse DFT and solves the principal Toeplitz block over the positive
nodes directly.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg
from scipy.interpolate import CubicSpline
from scipy.special import gamma as _gamma

from .errors import ExponentFitError, InvalidArgumentError, OracleFailure
from .halfline import (
    PLUS,
    GridFn,
    HalfLineGrid,
    ModeParams,
    forward_op,
    origin_value,
    xi_minus_plus_neg,
    xi_plus_neg,
)
from .profiles import Profile, parse_profile
from .symbols import as_order, format_complex
from .traces import gamma0_weighted


def _circulant_block(n, h, mode: ModeParams):
    """First column of the principal n x n block of the 2n-point periodic multiplier."""
    xi = 2 * np.pi * np.fft.fftfreq(2 * n, h)
    S = (mode.sigma**2 + xi**2) ** complex(mode.order)
    c = np.fft.ifft(S)
    cond = float(np.max(np.abs(S)) / np.min(np.abs(S)))
    return c[:n], cond


def _level_solve(func, n, h, mode, dense_limit, cond_max):
    col, cond = _circulant_block(n, h, mode)
    if not cond < cond_max:
        raise OracleFailure(f"oracle matrix condition estimate {cond:.3e} exceeds {cond_max:.1e}", cond)
    rhs = np.asarray(func(np.arange(1, n + 1) * h), dtype=complex)
    # the multiplier is even in xi, so the circulant block is symmetric Toeplitz
    if n <= dense_limit:
        A = scipy.linalg.toeplitz(col, col)
        u = scipy.linalg.solve(A, rhs, assume_a="sym")
    else:
        u = scipy.linalg.solve_toeplitz((col, col), rhs)
    if not np.all(np.isfinite(u)):
        raise OracleFailure("oracle solve produced non-finite values", cond)
    return u, cond


def _as_callable(f):
    if callable(f):
        return f
    if isinstance(f, GridFn):
        if f.support != PLUS:
            raise InvalidArgumentError("oracle needs a plus-supported right-hand side")
        x = np.concatenate([[0.0], f.grid.nodes])
        y = np.concatenate([[origin_value(f)], f.values])
        sr, si = CubicSpline(x, y.real), CubicSpline(x, y.imag)
        L = f.grid.length
        return lambda t: np.where(t <= L, sr(t) + 1j * si(t), 0.0)
    raise InvalidArgumentError("f must be a GridFn or a callable")


def dense_oracle_dirichlet(f, mode: ModeParams, grid: HalfLineGrid | None = None, box_points=None,
                           refine=2, dense_limit=1024, cond_max=1e12) -> GridFn:
    """Brute-force solution of ``r+ (sigma^2 - d^2)^a u = f`` with ``u`` supported in ``x >= 0``.

    With ``refine = r > 0`` the block solve is done at spacings ``h/2^r`` and
    ``h/2^(r+1)`` and combined by one Richardson step, then sampled at the
    coarse nodes; ``refine = 0`` is the single solve at the grid spacing.
    A grid-function ``f`` is interpolated by a cubic spline for the fine levels.
    """
    if isinstance(f, GridFn):
        grid = f.grid if grid is None else grid
    if grid is None:
        raise InvalidArgumentError("grid is required when f is a callable")
    if box_points is not None:
        if box_points % 2 or box_points != 2 * grid.n_points:
            raise InvalidArgumentError("box_points must equal 2 * n_points")
    if refine < 0:
        raise InvalidArgumentError("refine must be >= 0")
    func = _as_callable(f)
    N, h = grid.n_points, grid.spacing
    if refine == 0:
        u, cond = _level_solve(func, N, h, mode, dense_limit, cond_max)
    else:
        m = 2**refine
        u1, _ = _level_solve(func, N * m, h / m, mode, dense_limit, cond_max)
        u2, cond = _level_solve(func, 2 * N * m, h / (2 * m), mode, dense_limit, cond_max)
        u = 2 * u2[2 * m - 1::2 * m] - u1[m - 1::m]
    return GridFn(grid, u, PLUS, meta={"condition": cond, "refine": refine})


# ---------------------------------------------------------------------------
# exponent fits


@dataclass(frozen=True)
class ExponentFit:
    exponent: float
    coefficient: complex
    r_squared: float
    window: tuple

    def to_dict(self):
        return {
            "exponent": self.exponent,
            "coefficient_re": self.coefficient.real,
            "coefficient_im": self.coefficient.imag,
            "r_squared": self.r_squared,
            "window": list(self.window),
        }


def default_window(grid: HalfLineGrid):
    return (4 * grid.spacing, 32 * grid.spacing)


def fit_boundary_exponent(u: GridFn, window=None, correction_degree=3) -> ExponentFit:
    """Fit ``log|u| = beta log x + sum_{j<=d} c_j x^j`` over the window.

    ``correction_degree=0`` is the plain log-log slope.  The polynomial absorbs
    the variation of the smooth factor across the window, so the fit stays
    exact on pure powers.  ``coefficient`` is ``exp(c_0)`` times the phase of u
    at the first window node.
    """
    if u.support != PLUS:
        raise InvalidArgumentError("exponent fits need a plus-supported grid function")
    lo, hi = default_window(u.grid) if window is None else window
    x = u.grid.nodes
    sel = (x >= lo * (1 - 1e-12)) & (x <= hi * (1 + 1e-12))
    if not 0 < lo < hi:
        raise InvalidArgumentError(f"bad window {window}")
    if sel.sum() < 8:
        raise ExponentFitError(f"window ({lo:g}, {hi:g}) holds {int(sel.sum())} nodes, need >= 8")
    xs, us = x[sel], u.values[sel]
    mag = np.abs(us)
    if np.any(mag == 0) or not np.all(np.isfinite(mag)):
        raise ExponentFitError("u vanishes or is not finite inside the fit window")
    # a sign change of the dominant component means |u| passes near zero
    comp = us.real if np.max(np.abs(us.real)) >= np.max(np.abs(us.imag)) else us.imag
    if np.any(np.sign(comp) != np.sign(comp[0])):
        raise ExponentFitError("u changes sign inside the fit window")
    if correction_degree < 0 or correction_degree > sel.sum() - 3:
        raise InvalidArgumentError("correction_degree out of range for the window")
    y = np.log(mag)
    t = xs / xs[-1]
    A = np.column_stack([np.log(xs)] + [t**j for j in range(correction_degree + 1)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    phase = us[0] / mag[0]
    return ExponentFit(float(coef[0]), complex(math.exp(coef[1]) * phase), r2, (float(lo), float(hi)))


def structure_decompose(u: GridFn, a, nodes_used=16):
    """Split ``u = Gamma(a)^-1 x^(a-1) v0 + Gamma(a)^-1 x^a w``.

    Returns ``(v0, w_fn, residual)`` with ``v0`` the weighted Dirichlet trace,
    ``w_fn(x) = (Gamma(a) x^(1-a) u(x) - v0) / x`` and ``residual`` the rms
    deviation of ``w_fn`` from its linear fit over the first ``nodes_used`` nodes.
    """
    a = as_order(a)
    v0 = gamma0_weighted(u, a, nodes_used=nodes_used).value
    x = u.grid.nodes
    w = (_gamma(a) * u.values * x ** (1 - a) - v0) / x
    n = min(nodes_used, len(x))
    p = np.polyfit(x[:n], w[:n], 1)
    residual = float(np.sqrt(np.mean(np.abs(np.polyval(p, x[:n]) - w[:n]) ** 2)))
    return v0, GridFn(u.grid, w, PLUS, origin=complex(np.polyval(p, 0.0))), residual


def recombine(v0, w_fn: GridFn, a):
    """Inverse of :func:`structure_decompose`."""
    a = as_order(a)
    x = w_fn.grid.nodes
    return GridFn(w_fn.grid, x ** (a - 1) * (v0 + x * w_fn.values) / _gamma(a), PLUS)


# ---------------------------------------------------------------------------
# convergence studies


SOLVERS = ("dirichlet_hom", "xi_plus", "xi_minus_plus", "forward_op")


@dataclass
class ConvergenceTable:
    params: dict
    resolutions: list
    errors: list
    orders: list
    non_monotone: bool
    exponent_fits: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _run_solver(solver_id, f: GridFn, mode):
    if solver_id == "dirichlet_hom":
        return xi_plus_neg(xi_minus_plus_neg(f, mode), mode)
    if solver_id == "xi_plus":
        return xi_plus_neg(f, mode)
    if solver_id == "xi_minus_plus":
        return xi_minus_plus_neg(f, mode)
    return forward_op(f, mode)


def convergence_study(solver_id, params, resolutions) -> ConvergenceTable:
    """Refinement study at fixed box length.

    ``params`` holds ``a``, ``sigma``, ``length`` and ``f`` (profile string,
    :class:`Profile` or callable).  Errors are relative L^2 against the finest
    resolution sampled at each coarse grid's nodes; orders are log2 of
    successive error ratios.
    """
    if solver_id not in SOLVERS:
        raise InvalidArgumentError(f"solver_id must be one of {SOLVERS}")
    res = [int(n) for n in resolutions]
    if len(res) < 3 or any(res[i + 1] != 2 * res[i] for i in range(len(res) - 1)):
        raise InvalidArgumentError("need >= 3 resolutions, each double the previous")
    mode = ModeParams(float(params["sigma"]), params["a"])
    length = float(params["length"])
    prof = params["f"]
    if isinstance(prof, str):
        prof = parse_profile(prof)
    outs, fits = [], []
    for n in res:
        grid = HalfLineGrid.from_length(n, length)
        if isinstance(prof, Profile):
            f = prof.sample(grid)
        else:
            f = GridFn(grid, prof(grid.nodes), PLUS, origin=complex(prof(np.array([0.0]))[0]))
        u = _run_solver(solver_id, f, mode)
        outs.append(u.values)
        if solver_id == "dirichlet_hom":
            try:
                fits.append(fit_boundary_exponent(u).to_dict())
            except ExponentFitError as exc:
                fits.append({"error": str(exc)})
    finest = outs[-1]
    errors = []
    for n, u in zip(res[:-1], outs[:-1]):
        ref = finest[res[-1] // n - 1::res[-1] // n]
        errors.append(float(np.linalg.norm(u - ref) / np.linalg.norm(ref)))
    orders = [math.log2(e0 / e1) if e1 > 0 and e0 > 0 else float("inf")
              for e0, e1 in zip(errors, errors[1:])]
    echo = {
        "solver": solver_id,
        "a": format_complex(mode.order),
        "sigma": mode.sigma,
        "length": length,
        "f": str(prof) if isinstance(prof, Profile) else "callable",
    }
    return ConvergenceTable(echo, res, errors, orders,
                            any(e1 > e0 for e0, e1 in zip(errors, errors[1:])), fits)
