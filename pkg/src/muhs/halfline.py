"""Half-line grids, grid functions and the per-mode operators in the normal variable.

Both order-reducing solution operators are causal/anticausal convolutions with
the kernel ``s^(a-1) e^(-sigma s) / Gamma(a)`` on ``s > 0``.  They are evaluated
by product integration: the data are replaced by a local quadratic interpolant
on each cell and the singular kernel is integrated against it exactly.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial

import numpy as np
from scipy.special import gamma as _gamma

from ._boundary import fit_weighted_boundary
from .errors import DomainError, InvalidArgumentError, TruncationError
from .special import lower_incomplete_gamma
from .symbols import as_order

PLUS = "plus"
MINUS = "minus"
WHOLE = "whole"
_SUPPORTS = (PLUS, MINUS, WHOLE)

#: cells closer than this to the kernel singularity use incomplete-gamma moments
SINGULAR_CELLS = 16
_GL_NODES = 16


@dataclass(frozen=True)
class HalfLineGrid:
    """Uniform grid ``x_k = k h``, ``k = 1..N`` on ``(0, L]``; node 0 is not stored."""

    n_points: int
    spacing: float

    def __post_init__(self):
        if self.n_points < 4:
            raise InvalidArgumentError("a half-line grid needs at least 4 points")
        if not (np.isfinite(self.spacing) and self.spacing > 0):
            raise InvalidArgumentError("grid spacing must be finite and positive")

    @classmethod
    def from_length(cls, n_points, length):
        return cls(int(n_points), float(length) / int(n_points))

    @classmethod
    def auto(cls, sigma_min=1.0, n_points=1024, sigma_length=36.0):
        """Grid whose length satisfies ``sigma_min * L = sigma_length`` (so e^(-sigma L) ~ 2e-16)."""
        return cls.from_length(n_points, sigma_length / sigma_min)

    @property
    def length(self):
        return self.n_points * self.spacing

    @property
    def nodes(self):
        return np.arange(1, self.n_points + 1) * self.spacing

    def refined(self, factor=2):
        return HalfLineGrid(self.n_points * factor, self.spacing / factor)


@dataclass(frozen=True, eq=False)
class GridFn:
    """Complex samples on a :class:`HalfLineGrid`.

    ``support`` is ``"plus"`` (values at ``x_k``, extended by zero to ``x <= 0``),
    ``"minus"`` (values at ``-x_k``) or ``"whole"`` (values at ``k h`` for
    ``k = -N..N``).  ``origin`` is the value at ``x = 0`` when the function is
    continuous there, else ``None``.
    """

    grid: HalfLineGrid
    values: np.ndarray
    support: str = PLUS
    origin: complex | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.support not in _SUPPORTS:
            raise InvalidArgumentError(f"support must be one of {_SUPPORTS}")
        vals = np.array(self.values, dtype=complex)
        expected = 2 * self.grid.n_points + 1 if self.support == WHOLE else self.grid.n_points
        if vals.shape != (expected,):
            raise InvalidArgumentError(
                f"{self.support} grid function needs {expected} values, got shape {vals.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.origin is not None:
            object.__setattr__(self, "origin", complex(self.origin))

    @property
    def x(self):
        return node_coordinates(self.grid, self.support)

    def replace(self, **changes):
        kw = dict(grid=self.grid, values=self.values, support=self.support,
                  origin=self.origin, meta=dict(self.meta))
        kw.update(changes)
        return GridFn(**kw)

    def __add__(self, other):
        _check_compatible(self, other)
        origin = None if self.origin is None or other.origin is None else self.origin + other.origin
        return self.replace(values=self.values + other.values, origin=origin, meta={})

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        scalar = complex(scalar)
        origin = None if self.origin is None else scalar * self.origin
        return self.replace(values=scalar * self.values, origin=origin, meta={})

    __rmul__ = __mul__


def _check_compatible(f, g):
    if f.grid != g.grid or f.support != g.support:
        raise InvalidArgumentError("grid functions live on different grids or supports")


@dataclass(frozen=True)
class ModeParams:
    """One tangential frequency: ``sigma = <xi'> >= 1`` together with the order."""

    sigma: float
    order: complex

    def __post_init__(self):
        sigma = float(self.sigma)
        if not (np.isfinite(sigma) and sigma >= 1.0):
            raise DomainError(f"sigma must be >= 1, got {self.sigma}")
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "order", as_order(self.order))


def node_coordinates(grid: HalfLineGrid, support=PLUS):
    if support == PLUS:
        return grid.nodes
    if support == MINUS:
        return -grid.nodes
    return np.arange(-grid.n_points, grid.n_points + 1) * grid.spacing


def sample(func, grid: HalfLineGrid, support=PLUS) -> GridFn:
    """Sample a vectorised callable on the grid nodes; the origin value is sampled too."""
    x = node_coordinates(grid, support)
    origin = complex(np.asarray(func(np.array([0.0])))[0])
    return GridFn(grid, func(x), support, origin=origin)


def _finite(f: GridFn):
    if not np.all(np.isfinite(f.values)):
        raise InvalidArgumentError("grid function contains NaN or inf")


def origin_value(f: GridFn) -> complex:
    """Value at x = 0: stored origin, else quadratic extrapolation from nodes 1..3."""
    if f.origin is not None:
        return f.origin
    v = f.values
    return complex(3 * v[0] - 3 * v[1] + v[2])


# ---------------------------------------------------------------------------
# product integration


@lru_cache(maxsize=128)
def _cell_integrals(a: complex, sigma: float, h: float, n: int):
    """``I_p(j) = int_{jh}^{(j+1)h} K(s) (s/h - j)^p ds`` for p = 0, 1, 2 and j < n."""
    ga = _gamma(a)
    out = np.zeros((3, n), dtype=complex)
    js = min(SINGULAR_CELLS, n)
    edges = np.arange(js + 1) * h * sigma
    moments = []
    for q in range(3):
        g = lower_incomplete_gamma(a + q, edges)
        moments.append(np.exp(-(a + q) * np.log(sigma)) * np.diff(g) / (ga * h**q))
    jj = np.arange(js, dtype=float)
    for p in range(3):
        out[p, :js] = sum(comb(p, q) * moments[q] * (-jj) ** (p - q) for q in range(p + 1))
    if n > js:
        t, w = np.polynomial.legendre.leggauss(_GL_NODES)
        t = 0.5 * (t + 1.0)
        w = 0.5 * w
        s = h * (np.arange(js, n)[:, None] + t[None, :])
        with np.errstate(under="ignore"):
            kern = np.exp((a - 1) * np.log(s) - sigma * s) / ga
        for p in range(3):
            out[p, js:] = h * (kern * (w * t**p)).sum(axis=1)
    out.setflags(write=False)
    return out


def _causal_product(F, a, sigma, h):
    """``u_k = int_0^{x_k} K(x_k - t) f(t) dt`` for k = 0..N from samples F at nodes 0..N.

    Cell ``[t_i, t_{i+1}]`` uses the quadratic through nodes ``i-1, i, i+1``
    (nodes 0, 1, 2 for the first cell), so ``u_k`` reads ``F_0..F_max(k, 2)``.
    """
    N = len(F) - 1
    I0, I1, I2 = _cell_integrals(complex(a), float(sigma), float(h), N)
    out = np.zeros(N + 1, dtype=complex)
    j = np.arange(N)
    # first cell, local variable u = (x_k - t)/h - (k - 1)
    out[1:] = (I2[j] + I1[j]) / 2 * F[0] + (I0[j] - I2[j]) * F[1] + (I2[j] - I1[j]) / 2 * F[2]
    if N >= 2:
        w_prev = (I2 - I1) / 2
        w_mid = 2 * I1 - I2
        w_next = (2 * I0 - 3 * I1 + I2) / 2
        out[2:] += (
            np.convolve(w_next, F[2:])[: N - 1]
            + np.convolve(w_mid, F[1:])[: N - 1]
            + np.convolve(w_prev, F)[: N - 1]
        )
    return out


def _full_samples(f: GridFn):
    return np.concatenate([[origin_value(f)], f.values])


def _require_plus(f: GridFn):
    if f.support != PLUS:
        raise InvalidArgumentError("operator expects a grid function supported in x >= 0")
    _finite(f)


def _power_data_split(f: GridFn, b, mode: ModeParams, nodes_used=16, degree=5):
    """For data ``f ~ x^b * smooth`` near 0: the part ``sum_j d_j x^(b+j) e^(-sigma x)`` and its exact image."""
    a, sigma = mode.order, mode.sigma
    x = f.grid.nodes
    c, _, _ = fit_weighted_boundary(f.values, x, 1 + b, nodes_used, degree)
    expo = np.array([sigma**k / factorial(k) for k in range(degree + 1)])
    d = np.array([np.dot(c[: j + 1], expo[j::-1]) for j in range(degree + 1)])
    with np.errstate(under="ignore"):
        decay = np.exp(-sigma * x)
    sing = np.zeros_like(x, dtype=complex)
    image = np.zeros_like(x, dtype=complex)
    for j in range(degree + 1):
        sing += d[j] * x ** (b + j) * decay
        image += d[j] * _gamma(b + j + 1) / _gamma(a + b + j + 1) * x ** (a + b + j) * decay
    return sing, image


def xi_plus_neg(f: GridFn, mode: ModeParams, data_exponent=None) -> GridFn:
    """Causal fractional convolution ``(1/Gamma(a)) int_0^x (x-t)^(a-1) e^(-sigma (x-t)) f(t) dt``.

    This is the half-line action of the order reducer with symbol
    ``(sigma + i xi_n)^(-a)``; the result is supported in ``x >= 0`` and
    vanishes at the origin.  Data behaving like ``x^b`` at the boundary
    (``data_exponent=b``, default ``f.meta["boundary_exponent"]`` or 0) have
    their leading terms convolved in closed form; the output is tagged with
    exponent ``a + b`` so that compositions stay accurate.
    """
    _require_plus(f)
    b = complex(f.meta.get("boundary_exponent", 0) if data_exponent is None else data_exponent)
    if b.real <= -1:
        raise InvalidArgumentError("data_exponent needs Re b > -1 for an integrable singularity")
    a, h = mode.order, f.grid.spacing
    if b == 0:
        u = _causal_product(_full_samples(f), a, mode.sigma, h)[1:]
    else:
        sing, image = _power_data_split(f, b, mode, min(16, f.grid.n_points))
        rest = np.concatenate([[0.0], f.values - sing])
        u = _causal_product(rest, a, mode.sigma, h)[1:] + image
    return GridFn(f.grid, u, PLUS, origin=0.0, meta={"boundary_exponent": a + b})


def tail_bound(f: GridFn, mode: ModeParams) -> float:
    """Bound on the neglected integral beyond L, assuming |f(t)| <= |f(x_N)| for t >= L."""
    a = mode.order
    return float(
        abs(f.values[-1]) * _gamma(a.real) * mode.sigma ** (-a.real) / abs(_gamma(a))
    )


def xi_minus_plus_neg(f: GridFn, mode: ModeParams, tail_tol=1e-10) -> GridFn:
    """Anticausal convolution ``(1/Gamma(a)) int_x^L (t-x)^(a-1) e^(-sigma (t-x)) f(t) dt``.

    Truncated at the grid end; raises :class:`TruncationError` if the tail
    bound exceeds ``tail_tol``.  The value at ``x = 0`` is returned as ``origin``.
    """
    _require_plus(f)
    bound = tail_bound(f, mode)
    if bound > tail_tol:
        raise TruncationError(
            f"tail bound {bound:.3e} exceeds tail_tol {tail_tol:.1e}; enlarge L", bound
        )
    F = _full_samples(f)
    v = _causal_product(F[::-1], mode.order, mode.sigma, f.grid.spacing)[::-1]
    return GridFn(f.grid, v[1:], PLUS, origin=v[0], meta={"tail_bound": bound})


# ---------------------------------------------------------------------------
# forward operator


def _gbinom(a, k):
    out = 1.0 + 0j
    for i in range(k):
        out *= (a - i) / (i + 1)
    return out


def _singular_part(u: GridFn, mode: ModeParams, nodes_used, degree):
    """Split off ``sum_j d_j x^(a-1+j) e^(-sigma x)`` and its exact image under r+P."""
    a, sigma = mode.order, mode.sigma
    x = u.grid.nodes
    c, _, _ = fit_weighted_boundary(u.values, x, a, nodes_used, degree)
    expo = np.array([sigma**k / factorial(k) for k in range(degree + 1)])
    d = np.array([np.dot(c[: j + 1], expo[j::-1]) for j in range(degree + 1)])
    sing = np.zeros_like(x, dtype=complex)
    image = np.zeros_like(x, dtype=complex)
    with np.errstate(under="ignore"):
        decay = np.exp(-sigma * x)
    for j in range(degree + 1):
        sing += d[j] * x ** (a - 1 + j) * decay
        if j == 0:
            # (sigma - i xi)^a is supported in x <= 0: no contribution on x > 0
            continue
        m = j - 1
        poly = sum(
            _gbinom(a, k) * (2 * sigma) ** (a - k) * (-1) ** k
            * (factorial(m) // factorial(m - k)) * x ** (m - k)
            for k in range(m + 1)
        )
        image += d[j] * _gamma(a + j) / factorial(m) * decay * poly
    return sing, image


def _periodic_multiplier(values, first_index, h, box, a, sigma):
    arr = np.zeros(box, dtype=complex)
    idx = (np.arange(len(values)) + first_index) % box
    arr[idx] = values
    xi = 2 * np.pi * np.fft.fftfreq(box, h)
    return np.fft.ifft((sigma**2 + xi**2) ** a * np.fft.fft(arr))


def forward_op(
    u: GridFn,
    mode: ModeParams,
    pad_factor=4,
    boundary_correction=True,
    nodes_used=16,
    degree=5,
    decay_tol=1e-8,
    wrap_tol=1e-8,
) -> GridFn:
    """``r+ (sigma^2 - d^2)^a e+ u`` by a padded periodic Fourier multiplier.

    The periodic box has ``pad_factor * N`` points covering
    ``[-(pad_factor - 1) L, L]``.  With ``boundary_correction`` the fitted
    boundary expansion ``x^(a-1) e^(-sigma x) * poly(x)`` is removed first and
    its image added back in closed form, so boundary singularities of the
    ``x^(a-1)`` / ``x^a`` kind do not alias into the interior.
    """
    if u.support == WHOLE:
        return forward_op_wholeline(u, mode, pad_factor, wrap_tol=wrap_tol)
    _require_plus(u)
    if pad_factor < 2:
        raise InvalidArgumentError("pad_factor must be >= 2")
    a, sigma, h, N = mode.order, mode.sigma, u.grid.spacing, u.grid.n_points
    warnings = []
    peak = np.max(np.abs(u.values))
    if abs(u.values[-1]) > decay_tol * max(peak, 1e-300):
        warnings.append(f"u has not decayed at L: |u(x_N)| = {abs(u.values[-1]):.2e}")
    if boundary_correction:
        sing, image = _singular_part(u, mode, nodes_used, degree)
        rest = np.concatenate([[0.0], u.values - sing])
    else:
        image = 0.0
        rest = np.concatenate([[u.origin or 0.0], u.values])
    box = pad_factor * N
    r = _periodic_multiplier(rest, 0, h, box, a, sigma)
    far = np.max(np.abs(r[N + (box - N) // 2 : box - N // 2])) if box - N >= 4 else 0.0
    out = r[1 : N + 1] + image
    scale = max(np.max(np.abs(out)), 1e-300)
    if far > wrap_tol * scale:
        warnings.append(f"wrap-around indicator {far / scale:.2e} above {wrap_tol:.0e}")
    return GridFn(u.grid, out, PLUS, meta={"warnings": warnings, "wrap_indicator": far / scale})


def forward_op_wholeline(G: GridFn, mode: ModeParams, pad_factor=4, wrap_tol=1e-8) -> GridFn:
    """Plain padded multiplier for a function given on ``[-L, L]`` (support tag ``"whole"``)."""
    if G.support != WHOLE:
        raise InvalidArgumentError("forward_op_wholeline expects a whole-line grid function")
    _finite(G)
    N, h = G.grid.n_points, G.grid.spacing
    box = max(pad_factor, 3) * N
    r = _periodic_multiplier(G.values, -N, h, box, mode.order, mode.sigma)
    idx = np.arange(-N, N + 1) % box
    out = r[idx]
    far = np.max(np.abs(r[N + N // 4 : box - N - N // 4])) if box > 3 * N else 0.0
    scale = max(np.max(np.abs(out)), 1e-300)
    warnings = []
    if far > wrap_tol * scale:
        warnings.append(f"wrap-around indicator {far / scale:.2e} above {wrap_tol:.0e}")
    return GridFn(G.grid, out, WHOLE, meta={"warnings": warnings, "wrap_indicator": far / scale})


# ---------------------------------------------------------------------------
# restriction / extension


def restrict(f: GridFn) -> GridFn:
    """Keep nodes 1..N of a whole-line function."""
    if f.support != WHOLE:
        raise InvalidArgumentError("restrict expects a whole-line grid function")
    N = f.grid.n_points
    return GridFn(f.grid, f.values[N + 1 :], PLUS)


def extend_by_zero(f: GridFn) -> GridFn:
    """Whole-line embedding of a plus-supported function: zero at every node x <= 0."""
    if f.support != PLUS:
        raise InvalidArgumentError("extend_by_zero expects a plus-supported grid function")
    N = f.grid.n_points
    vals = np.concatenate([np.zeros(N + 1), f.values])
    return GridFn(f.grid, vals, WHOLE)


def join(minus: GridFn, at_zero, plus: GridFn) -> GridFn:
    """Whole-line function from its values on x < 0, at 0 and on x > 0."""
    if minus.support != MINUS or plus.support != PLUS or minus.grid != plus.grid:
        raise InvalidArgumentError("join needs matching minus and plus grid functions")
    vals = np.concatenate([minus.values[::-1], [at_zero], plus.values])
    return GridFn(plus.grid, vals, WHOLE)


# ---------------------------------------------------------------------------
# CSV interchange


def write_csv(path, f: GridFn):
    """Write ``x,re,im`` rows with 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "re", "im"])
        for xk, v in zip(f.x, f.values):
            w.writerow([f"{xk:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])


def read_csv(path) -> GridFn:
    """Read a grid function written by :func:`write_csv`; support inferred from the x column."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "re", "im"]:
        raise InvalidArgumentError(f"{path}: expected header x,re,im")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    if data.ndim != 2 or data.shape[0] < 4:
        raise InvalidArgumentError(f"{path}: too few rows")
    x, vals = data[:, 0], data[:, 1] + 1j * data[:, 2]
    step = np.diff(x)
    h = abs(step[0])
    if not np.allclose(np.abs(step), h, rtol=1e-9):
        raise InvalidArgumentError(f"{path}: x column is not a uniform grid")
    if x[0] > 0:
        return GridFn(HalfLineGrid(len(x), h), vals, PLUS)
    if x[-1] < 0:
        return GridFn(HalfLineGrid(len(x), h), vals, MINUS)
    n = (len(x) - 1) // 2
    return GridFn(HalfLineGrid(n, h), vals, WHOLE)

