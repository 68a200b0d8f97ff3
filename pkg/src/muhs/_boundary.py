"""Weighted polynomial fit of w = x^(1-a) u near the boundary (shared by traces and forward_op)."""
import numpy as np


def fit_weighted_boundary(values, x, a, nodes_used, degree):
    """Least-squares fit ``x^(1-a) u(x) ~ sum_j c_j x^j`` on the first ``nodes_used`` nodes.

    Rows are weighted by ``1/x`` to emphasise the boundary.  Returns
    ``(coefficients, rms_misfit, max_abs_w)``.
    """
    if nodes_used < degree + 2:
        raise ValueError(f"nodes_used={nodes_used} too small for degree {degree}")
    if nodes_used > len(x):
        raise ValueError("nodes_used exceeds the grid")
    xs = x[:nodes_used]
    w = xs ** (1 - a) * values[:nodes_used]
    # scale x to O(1) so the Vandermonde system stays well conditioned
    scale = xs[-1]
    V = np.vander(xs / scale, degree + 1, increasing=True)
    weights = 1.0 / xs
    c, *_ = np.linalg.lstsq(V.astype(complex) * weights[:, None], w * weights, rcond=None)
    misfit = w - V @ c
    c = c / scale ** np.arange(degree + 1)
    return c, float(np.sqrt(np.mean(np.abs(misfit) ** 2))), float(np.max(np.abs(w)))
