"""Independent brute-force references used to validate the analytic paths.

These deliberately avoid the numerical kernels of the modules they check:
the Gramian quadrature marches the propagator columns with a classical
Runge-Kutta scheme instead of a matrix exponential, the projection oracle
enumerates support sets instead of thresholding, and the gradient check is
plain central differencing.  They are shipped (not test-only) so the CLI
can run self-verification; none of them scale past desk-size instances.
"""

import itertools
import math

import numpy as np

from .errors import CtrlscoreError
from .objective import ObjectiveKind, evaluate

__all__ = [
    "gramian_quadrature",
    "finite_difference_gradient",
    "grid_search_min",
    "projection_qp_oracle",
    "simplex_lattice",
]


def _rk4_step(A, v, h):
    k1 = A @ v
    k2 = A @ (v + 0.5 * h * k1)
    k3 = A @ (v + 0.5 * h * k2)
    k4 = A @ (v + h * k3)
    return v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def gramian_quadrature(A, i: int, T: float, steps: int) -> np.ndarray:
    """Composite-Simpson approximation of the horizon-T Gramian of node i.

    The integrand exp(At) e_i e_i^T exp(A^T t) is evaluated by integrating
    v' = A v from v(0) = e_i with fourth-order Runge-Kutta on the Simpson
    grid, so both the quadrature and the propagation carry O(steps^-4)
    error.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if steps < 2 or steps % 2 != 0:
        raise ValueError("steps must be an even integer >= 2")
    if not 0 <= i < n:
        raise ValueError(f"node index {i} out of range for n={n}")
    h = T / steps
    v = np.zeros(n)
    v[i] = 1.0
    W = np.outer(v, v).astype(float)  # weight 1 at t = 0
    for j in range(1, steps + 1):
        v = _rk4_step(A, v, h)
        weight = 1.0 if j == steps else (4.0 if j % 2 == 1 else 2.0)
        W += weight * np.outer(v, v)
    return W * (h / 3.0)


def finite_difference_gradient(kind: ObjectiveKind, basis, p, h: float) -> np.ndarray:
    """Central-difference gradient (F(p + h e_i) - F(p - h e_i)) / 2h.

    Trial points are clamped at zero componentwise; a trial that leaves
    the feasible region is an error (pick p with margin > h).
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    p = np.asarray(p, dtype=float).ravel()
    out = np.empty_like(p)
    for i in range(p.shape[0]):
        plus = p.copy()
        plus[i] += h
        minus = np.maximum(p.copy(), 0.0)
        minus[i] = max(minus[i] - h, 0.0)
        f_plus = evaluate(kind, basis, plus)
        f_minus = evaluate(kind, basis, minus)
        if math.isinf(f_plus) or math.isinf(f_minus):
            raise CtrlscoreError(
                f"finite-difference trial at coordinate {i} left the feasible region"
            )
        out[i] = (f_plus - f_minus) / (2.0 * h)
    return out


def simplex_lattice(n: int, resolution: int):
    """All lattice points p with p_i = k_i / resolution, sum k_i = resolution."""
    for cuts in itertools.combinations(range(resolution + n - 1), n - 1):
        prev = -1
        counts = []
        for c in cuts:
            counts.append(c - prev - 1)
            prev = c
        counts.append(resolution + n - 2 - prev)
        yield np.array(counts, dtype=float) / resolution


def grid_search_min(kind: ObjectiveKind, basis, resolution: int):
    """Global minimum of the objective over the regular simplex lattice.

    Exhaustive, so limited to n <= 4; infeasible lattice points are
    skipped.  Returns (grid point, value).
    """
    n = basis.n
    if n > 4:
        raise ValueError(f"grid search limited to n <= 4, got n={n}")
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    best_p, best_val = None, math.inf
    for p in simplex_lattice(n, resolution):
        val = evaluate(kind, basis, p)
        if val < best_val:
            best_p, best_val = p, val
    if best_p is None:
        raise CtrlscoreError("no feasible lattice point found")
    return best_p, best_val


def projection_qp_oracle(q) -> np.ndarray:
    """Exact simplex projection by enumerating all nonempty support sets.

    On each candidate support the equality-constrained least squares
    reduces to a mean shift; the feasible candidate with minimal distance
    to q is the projection.  Exponential cost, so limited to n <= 12.
    """
    q = np.asarray(q, dtype=float).ravel()
    n = q.shape[0]
    if n > 12:
        raise ValueError(f"projection oracle limited to n <= 12, got n={n}")
    best_p, best_dist = None, math.inf
    for size in range(1, n + 1):
        for support in itertools.combinations(range(n), size):
            idx = list(support)
            shift = (q[idx].sum() - 1.0) / size
            cand = q[idx] - shift
            if cand.min() < -1e-12:
                continue
            p = np.zeros(n)
            p[idx] = np.maximum(cand, 0.0)
            dist = float(((p - q) ** 2).sum())
            if dist < best_dist - 1e-15:
                best_p, best_dist = p, dist
    return best_p
