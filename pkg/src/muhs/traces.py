"""Weighted boundary traces, explicit Poisson operators and the Dirichlet-to-Neumann symbol.

A solution with a nonzero Dirichlet datum behaves like ``x^(a-1)`` at the
boundary, so traces are taken of ``w = x^(1-a) u``: its value gives
``gamma_{a-1,0}`` (times ``Gamma(a)``) and its slope gives ``gamma_{a-1,1}``
(times ``Gamma(a+1)``).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma

from ._boundary import fit_weighted_boundary
from .errors import IllConditionedTraceWarning, InvalidArgumentError
from .halfline import PLUS, GridFn, HalfLineGrid, ModeParams
from .symbols import as_order

DEFAULT_NODES = 16
DEFAULT_DEGREE = 5


@dataclass(frozen=True)
class TraceFit:
    value: complex
    slope: complex
    fit_residual: float
    nodes_used: int

    def to_dict(self):
        return {
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "slope_re": self.slope.real,
            "slope_im": self.slope.imag,
            "fit_residual": self.fit_residual,
            "nodes_used": self.nodes_used,
        }


def _fit(u: GridFn, a, nodes_used, degree, residual_rtol):
    if u.support != PLUS:
        raise InvalidArgumentError("traces need a plus-supported grid function")
    a = as_order(a)
    if nodes_used < 3:
        raise InvalidArgumentError("nodes_used must be >= 3")
    degree = min(degree, nodes_used - 2)
    c, misfit, wmax = fit_weighted_boundary(u.values, u.grid.nodes, a, nodes_used, degree)
    if misfit > residual_rtol * wmax:
        warnings.warn(
            f"trace fit residual {misfit:.2e} exceeds {residual_rtol:.0e} * max|w|",
            IllConditionedTraceWarning,
            stacklevel=3,
        )
    return a, c, misfit


def gamma0_weighted(u: GridFn, a, nodes_used=DEFAULT_NODES, degree=DEFAULT_DEGREE,
                    residual_rtol=1e-3) -> TraceFit:
    """``gamma_{a-1,0} u = Gamma(a) * lim_{x->0} x^(1-a) u(x)`` by weighted extrapolation."""
    a, c, misfit = _fit(u, a, nodes_used, degree, residual_rtol)
    return TraceFit(complex(_gamma(a) * c[0]), complex(c[1]), misfit, nodes_used)


def gamma1_weighted(u: GridFn, a, nodes_used=DEFAULT_NODES, degree=DEFAULT_DEGREE,
                    residual_rtol=1e-3) -> TraceFit:
    """``gamma_{a-1,1} u = Gamma(a+1) * d/dx (x^(1-a) u) at 0``."""
    a, c, misfit = _fit(u, a, nodes_used, degree, residual_rtol)
    return TraceFit(complex(_gamma(a + 1) * c[1]), complex(c[1]), misfit, nodes_used)


def poisson_kernel(mode: ModeParams, grid: HalfLineGrid):
    """Samples of ``x^(a-1) e^(-sigma x) / Gamma(a)`` on the grid nodes."""
    x = grid.nodes
    a = mode.order
    with np.errstate(under="ignore"):
        return np.exp((a - 1) * np.log(x) - mode.sigma * x) / _gamma(a)


def poisson_dirichlet(phi, mode: ModeParams, grid: HalfLineGrid) -> GridFn:
    """Null solution with Dirichlet datum ``phi``: ``phi * x^(a-1) e^(-sigma x) / Gamma(a)``."""
    phi = complex(phi)
    origin = phi if mode.order == 1 else (0.0 if phi == 0 else None)
    return GridFn(grid, phi * poisson_kernel(mode, grid), PLUS, origin=origin)


def poisson_neumann(psi, mode: ModeParams, grid: HalfLineGrid) -> GridFn:
    """Null solution with Neumann datum ``psi``: the Dirichlet one with ``phi = -psi / (a sigma)``."""
    return poisson_dirichlet(-complex(psi) / (mode.order * mode.sigma), mode, grid)


def dtn_symbol(mode: ModeParams) -> complex:
    """Dirichlet-to-Neumann multiplier ``-a sigma`` for one tangential mode."""
    return -mode.order * mode.sigma
