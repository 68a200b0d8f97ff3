"""Named data profiles (``exp:c``, ``gaussian:c,x0``, ``const:v``, ``poly:k``) and a smooth cutoff."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .halfline import MINUS, PLUS, GridFn, HalfLineGrid, node_coordinates


def smooth_cutoff(x, start, stop):
    """C-infinity step: 1 for ``x <= start``, 0 for ``x >= stop``."""
    x = np.asarray(x, dtype=float)
    s = np.clip((x - start) / (stop - start), 0.0, 1.0)

    def bump(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos])
        return out

    left, right = bump(1.0 - s), bump(s)
    return left / (left + right)


@dataclass(frozen=True)
class Profile:
    """A named function of the distance ``|x|`` to the boundary."""

    kind: str
    params: tuple

    def __call__(self, x, length=None):
        x = np.abs(np.asarray(x, dtype=float))
        p = self.params
        if self.kind == "exp":
            return np.exp(-p[0] * x)
        if self.kind == "gaussian":
            return np.exp(-p[0] * (x - p[1]) ** 2)
        if self.kind == "poly":
            return x ** p[0] * np.exp(-x)
        if self.kind == "const":
            if length is None:
                raise InvalidArgumentError("const profile needs the grid length for its damping")
            return p[0] * smooth_cutoff(x, 0.5 * length, 0.75 * length)
        raise InvalidArgumentError(f"unknown profile kind {self.kind!r}")

    def sample(self, grid: HalfLineGrid, support=PLUS) -> GridFn:
        """Grid function with values at ``x_k`` (plus) or ``-x_k`` (minus) and exact origin value."""
        x = node_coordinates(grid, support)
        vals = self(x, grid.length).astype(complex)
        origin = complex(self(np.array([0.0]), grid.length)[0])
        return GridFn(grid, vals, support, origin=origin)

    def __str__(self):
        return f"{self.kind}:" + ",".join(f"{v:g}" for v in self.params)


_ARITY = {"exp": 1, "gaussian": 2, "const": 1, "poly": 1}


def parse_profile(text: str) -> Profile:
    """Parse ``exp:c`` -> e^(-c x), ``gaussian:c,x0`` -> e^(-c (x-x0)^2), ``const:v``, ``poly:k`` -> x^k e^(-x)."""
    kind, _, rest = text.strip().partition(":")
    if kind not in _ARITY:
        raise InvalidArgumentError(f"unknown profile {text!r}; known kinds: {sorted(_ARITY)}")
    try:
        params = tuple(float(v) for v in rest.split(",")) if rest else ()
    except ValueError as exc:
        raise InvalidArgumentError(f"bad profile parameters in {text!r}") from exc
    if len(params) != _ARITY[kind]:
        raise InvalidArgumentError(f"profile {kind} takes {_ARITY[kind]} parameter(s), got {text!r}")
    if kind == "exp" and params[0] <= 0:
        raise InvalidArgumentError("exp:c needs c > 0 to decay")
    if kind == "gaussian" and params[0] <= 0:
        raise InvalidArgumentError("gaussian:c,x0 needs c > 0")
    if kind == "poly" and params[0] < 0:
        raise InvalidArgumentError("poly:k needs k >= 0")
    return Profile(kind, params)


__all__ = ["Profile", "parse_profile", "smooth_cutoff", "PLUS", "MINUS"]
