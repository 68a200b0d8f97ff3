"""Complex-power symbols, the order-reducing factors and a mu-transmission checker."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, EvaluationError, InvalidArgumentError

_COMPLEX_RE = re.compile(
    r"^\s*(?P<re>[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)"
    r"((?P<im>[+-](\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?)i)?\s*$"
)


@dataclass(frozen=True)
class ComplexOrder:
    """Order ``a`` (or complex ``mu``) of the operator, kept as two real parts."""

    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.re) and np.isfinite(self.im)):
            raise InvalidArgumentError(f"order must be finite, got {self.re}+{self.im}i")

    @classmethod
    def parse(cls, text: str) -> "ComplexOrder":
        """Parse ``"RE"`` or ``"RE+IMi"`` (no spaces), e.g. ``"0.5+0.2i"``."""
        m = _COMPLEX_RE.match(text)
        if m is None:
            raise InvalidArgumentError(f"malformed complex literal {text!r}; expected RE or RE+IMi")
        return cls(float(m.group("re")), float(m.group("im") or 0.0))

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def __complex__(self):
        return self.value

    def __str__(self):
        return format_complex(self.value)


def format_complex(z) -> str:
    """Format as ``RE`` when real, else ``RE+IMi``; 15 significant digits."""
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.15g}"
    return f"{z.real:.15g}{z.imag:+.15g}i"


def as_order(a, *, allow_one: bool = True) -> complex:
    """Validate an order and return it as a complex number.

    Solver entry points need ``0 < Re a < 1``; the convolution kernels and the
    Poisson operator also make sense at ``Re a = 1`` (classical ``1 - Delta``),
    which ``allow_one`` admits.
    """
    a = complex(a)
    if not (np.isfinite(a.real) and np.isfinite(a.imag)):
        raise InvalidArgumentError(f"order must be finite, got {a}")
    upper_ok = a.real <= 1.0 if allow_one else a.real < 1.0
    if not (a.real > 0.0 and upper_ok):
        window = "(0, 1]" if allow_one else "(0, 1)"
        raise DomainError(f"order {format_complex(a)} outside the strip Re a in {window}")
    return a


def complex_power(base, mu):
    """Principal-branch power ``exp(mu * Log(base))`` for ``Re(base) > 0``.

    On the open right half-plane the principal logarithm has imaginary part in
    ``(-pi/2, pi/2)`` and the power is continuous in ``base``.  Works
    elementwise on arrays.
    """
    base = np.asarray(base, dtype=complex)
    mu = complex(mu)
    if not np.all(np.isfinite(base)) or not np.isfinite(mu):
        raise InvalidArgumentError("complex_power needs finite base and exponent")
    if np.any(base.real <= 0):
        raise DomainError("complex_power needs Re(base) > 0")
    out = np.exp(mu * np.log(base))
    return out[()] if out.ndim == 0 else out


def _check_sigma(sigma):
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 1.0) or not np.all(np.isfinite(sigma)):
        raise DomainError("sigma = <xi'> must be finite and >= 1")
    return sigma


def plus_symbol(sigma, xi_n, mu):
    """``(sigma + i xi_n)^mu``, symbol of the order reducer preserving support in x_n >= 0."""
    sigma = _check_sigma(sigma)
    return complex_power(sigma + 1j * np.asarray(xi_n, dtype=float), mu)


def minus_symbol(sigma, xi_n, mu):
    """``(sigma - i xi_n)^mu``, the factor preserving support in x_n <= 0."""
    sigma = _check_sigma(sigma)
    return complex_power(sigma - 1j * np.asarray(xi_n, dtype=float), mu)


Evaluator = Callable[[np.ndarray], complex]


@dataclass(frozen=True)
class SymbolSpec:
    """Polyhomogeneous symbol ``p ~ sum_j p_j`` with ``p_j`` homogeneous of degree ``m - j``.

    ``terms`` holds ``(j, evaluator)`` pairs; evaluators take a length-``n``
    real vector.  Homogeneity is validated at construction.
    """

    order_m: complex
    terms: Sequence[tuple[int, Evaluator]]
    dimension_n: int
    homogeneity_rtol: float = 1e-10
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        if self.dimension_n < 1:
            raise InvalidArgumentError("dimension_n must be positive")
        rng = np.random.default_rng(12345)
        for j, ev in self.terms:
            if j < 0:
                raise InvalidArgumentError("term degrees must be non-negative")
            deg = complex(self.order_m) - j
            for _ in range(4):
                xi = rng.normal(size=self.dimension_n)
                base = complex(ev(xi))
                for t in (2.0, 3.0):
                    scaled = complex(ev(t * xi))
                    expected = t**deg * base
                    if abs(scaled - expected) > self.homogeneity_rtol * max(abs(expected), 1e-300):
                        raise InvalidArgumentError(
                            f"term {j} is not homogeneous of degree {format_complex(deg)}"
                        )


@dataclass(frozen=True)
class TransmissionReport:
    residuals: list  # (j, alpha, residual)
    passes: bool
    tolerance_used: float

    def to_dict(self):
        return {
            "residuals": [
                {"j": j, "alpha": list(alpha), "residual": r} for j, alpha, r in self.residuals
            ],
            "passes": self.passes,
            "tolerance_used": self.tolerance_used,
        }


def _term_derivative(ev, point, alpha, step):
    k = int(np.argmax(alpha)) if any(alpha) else None
    if k is None:
        return complex(ev(point))
    e = np.zeros_like(point)
    e[k] = step
    return (complex(ev(point + e)) - complex(ev(point - e))) / (2 * step)


def check_mu_transmission(spec: SymbolSpec, mu, normal=None, fd_step=1e-4, tol=1e-6):
    """Check the twisted parity of each ``p_j`` (and first xi-derivatives) across ``+-normal``.

    For every term and every ``|alpha| <= 1`` the residual is
    ``|D p_j(-N) - exp(i pi (m - 2 mu - j - |alpha|)) D p_j(N)|`` divided by the
    larger of ``|D p_j(N)|`` and ``|p_j(N)|``, so multiplying the symbol by a
    positive constant leaves every residual unchanged.
    """
    n = spec.dimension_n
    N = np.zeros(n) if normal is None else np.asarray(normal, dtype=float)
    if normal is None:
        N[-1] = 1.0
    if N.shape != (n,) or not np.isclose(np.linalg.norm(N), 1.0):
        raise InvalidArgumentError("normal must be a unit vector of the symbol's dimension")
    m = complex(spec.order_m)
    mu = complex(mu)
    alphas = [tuple([0] * n)] + [tuple(int(i == k) for i in range(n)) for k in range(n)]
    residuals = []
    for j, ev in spec.terms:
        try:
            scale0 = abs(complex(ev(N)))
        except Exception as exc:
            raise EvaluationError(f"term {j} failed at the normal: {exc}", j, alphas[0]) from exc
        for alpha in alphas:
            try:
                at_plus = _term_derivative(ev, N, alpha, fd_step)
                at_minus = _term_derivative(ev, -N, alpha, fd_step)
            except Exception as exc:
                raise EvaluationError(f"term {j}, alpha {alpha} failed: {exc}", j, alpha) from exc
            twist = np.exp(1j * np.pi * (m - 2 * mu - j - sum(alpha)))
            scale = max(abs(at_plus), scale0)
            diff = abs(at_minus - twist * at_plus)
            residuals.append((j, alpha, diff / scale if scale > 0 else diff))
    passes = all(r <= tol for _, _, r in residuals)
    return TransmissionReport(residuals, passes, tol)


def abs2a(a, dimension=2) -> SymbolSpec:
    """``|xi|^{2a}``, principal symbol of ``(-Delta)^a``; type and factorization index ``a``."""
    a = complex(a)
    return SymbolSpec(
        2 * a,
        [(0, lambda xi: complex(np.linalg.norm(xi)) ** (2 * a))],
        dimension,
        name=f"abs2a({format_complex(a)})",
    )


def halfplane_plus(dimension=2) -> SymbolSpec:
    """``|xi'| + i xi_n``."""
    return SymbolSpec(
        1.0, [(0, lambda xi: np.linalg.norm(xi[:-1]) + 1j * xi[-1])], dimension, name="halfplane_plus"
    )


def halfplane_minus(dimension=2) -> SymbolSpec:
    """``|xi'| - i xi_n``."""
    return SymbolSpec(
        1.0, [(0, lambda xi: np.linalg.norm(xi[:-1]) - 1j * xi[-1])], dimension, name="halfplane_minus"
    )


_FAMILIES = {"abs2a": abs2a, "halfplane_plus": halfplane_plus, "halfplane_minus": halfplane_minus}


def parse_symbol(text: str, dimension: int = 2) -> SymbolSpec:
    """Build a symbol from ``abs2a:0.3``, ``abs2a(0.3)``, ``halfplane_plus`` or ``halfplane_minus``."""
    text = text.strip()
    m = re.fullmatch(r"(\w+)(?:[:(]([^)]*)\)?)?", text)
    if m is None or m.group(1) not in _FAMILIES:
        raise InvalidArgumentError(f"unknown symbol family in {text!r}; known: {sorted(_FAMILIES)}")
    name, arg = m.group(1), m.group(2)
    if name == "abs2a":
        if not arg:
            raise InvalidArgumentError("abs2a needs an order, e.g. abs2a:0.3")
        return abs2a(ComplexOrder.parse(arg).value, dimension)
    if arg:
        raise InvalidArgumentError(f"{name} takes no parameters")
    return _FAMILIES[name](dimension)


def load_symbol(path) -> SymbolSpec:
    """Read a symbol description file: either one ``parse_symbol`` line or JSON
    ``{"family": ..., "a": ..., "dimension": ...}``."""
    text = Path(path).read_text(encoding="utf-8").strip()
    if not text.startswith("{"):
        return parse_symbol(text)
    data = json.loads(text)
    unknown = set(data) - {"family", "a", "dimension"}
    if unknown:
        raise InvalidArgumentError(f"unknown keys in symbol file: {sorted(unknown)}")
    family = data.get("family")
    dim = int(data.get("dimension", 2))
    if family == "abs2a":
        return abs2a(ComplexOrder.parse(str(data["a"])).value, dim)
    if family in _FAMILIES:
        return _FAMILIES[family](dim)
    raise InvalidArgumentError(f"unknown symbol family {family!r}")
