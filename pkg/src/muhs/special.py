"""Lower incomplete gamma function for complex order and real argument.

scipy's ``gammainc`` only handles real orders, and the product-integration
weights need ``gamma(a, x)`` for complex ``a`` with ``Re a > 0``.  The series
is used below ``x = |a| + 1`` and a modified Lentz continued fraction for the
upper function above it.
"""
import numpy as np
from scipy.special import gamma as _gamma

_TINY = 1e-300


def _lower_series(a, x, tol, maxiter):
    term = np.full(x.shape, 1.0 / a, dtype=complex)
    total = term.copy()
    for n in range(1, maxiter):
        term = term * x / (a + n)
        total += term
        if np.all(np.abs(term) <= tol * np.abs(total)):
            break
    pos = x > 0
    pref = np.zeros(x.shape, dtype=complex)
    pref[pos] = np.exp(a * np.log(x[pos]) - x[pos])
    return pref * total


def upper_incomplete_gamma(a, x, tol=1e-15, maxiter=5000):
    """Upper incomplete gamma ``Gamma(a, x)`` by continued fraction, for ``x > 0``.

    Accurate for ``x`` above roughly ``|a| + 1``; below that use
    :func:`lower_incomplete_gamma`.
    """
    a = complex(a)
    x = np.asarray(x, dtype=float)
    b = x + 1.0 - a
    c = np.full(x.shape, 1.0 / _TINY, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, maxiter):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < tol):
            break
    return np.exp(a * np.log(x) - x) * h


def lower_incomplete_gamma(a, x, tol=1e-15, maxiter=5000):
    """Lower incomplete gamma ``gamma(a, x) = int_0^x t^(a-1) e^(-t) dt``.

    ``a`` may be complex with ``Re a > 0``; ``x`` is a real array, ``x >= 0``.
    Relative accuracy is about 1e-14 across the ranges used here.
    """
    a = complex(a)
    if not a.real > 0:
        raise ValueError("lower_incomplete_gamma needs Re a > 0")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise ValueError("lower_incomplete_gamma needs finite x >= 0")
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty(x.shape, dtype=complex)
    small = x < abs(a) + 1.0
    if np.any(small):
        out[small] = _lower_series(a, x[small], tol, maxiter)
    if np.any(~small):
        out[~small] = _gamma(a) - upper_incomplete_gamma(a, x[~small], tol, maxiter)
    return out[0] if scalar else out
