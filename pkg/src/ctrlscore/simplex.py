"""Exact Euclidean projection onto the standard simplex.

The standard simplex is the set of nonnegative vectors whose entries sum
to one.  Projection uses the classic sort-and-threshold (water-filling)
scheme, which is O(n log n) and deterministic.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["ScorePoint", "score_point", "uniform_point", "project", "is_member"]


@dataclass(frozen=True)
class ScorePoint:
    """A point on the standard simplex.

    ``feasible`` optionally carries the Cholesky factor of the weighted
    Gramian assembled at ``p``, as evidence that the point lies inside the
    feasible region of the scoring problem.
    """

    p: np.ndarray
    sum: float
    feasible: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.p.shape[0]


def _frozen(v: np.ndarray) -> np.ndarray:
    v = np.ascontiguousarray(v, dtype=float)
    v.setflags(write=False)
    return v


def _absorb_residual(p: np.ndarray) -> np.ndarray:
    # Exact renormalization: the largest component absorbs the (tiny)
    # rounding residual so the stored sum is 1 to within 1e-12.
    p[int(np.argmax(p))] += 1.0 - p.sum()
    return p


def score_point(p, feasible=None) -> ScorePoint:
    """Wrap an (already nearly on-simplex) vector as a ScorePoint.

    Entries below zero by at most 1e-9 are clamped to exactly zero and the
    rounding residual is absorbed by the largest component.  Vectors that
    are not on the simplex to that tolerance are rejected.
    """
    p = np.asarray(p, dtype=float).ravel().copy()
    if not is_member(p, tol=1e-9):
        raise ValueError("point is not on the standard simplex")
    p = _absorb_residual(np.maximum(p, 0.0))
    return ScorePoint(_frozen(p), float(p.sum()), feasible)


def uniform_point(n: int) -> ScorePoint:
    return score_point(np.full(n, 1.0 / n))


def project(q) -> ScorePoint:
    """Euclidean projection of ``q`` onto the standard simplex.

    Computes the water-filling threshold tau from the sorted entries and
    returns max(q - tau, 0).  Components exactly at the threshold map to
    zero.  The result is renormalized exactly (largest component absorbs
    the residual, which is at most ~1e-12).
    """
    q = np.asarray(q, dtype=float).ravel()
    if not np.all(np.isfinite(q)):
        raise ValueError("projection input must be finite")
    u = np.sort(q)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, q.shape[0] + 1)
    # Largest index whose entry stays positive after the water level drops.
    rho = np.nonzero(u + (1.0 - css) / j > 0.0)[0][-1]
    tau = (css[rho] - 1.0) / (rho + 1.0)
    p = _absorb_residual(np.maximum(q - tau, 0.0))
    return ScorePoint(_frozen(p), float(p.sum()))


def is_member(p, tol: float = 1e-10) -> bool:
    """True iff min(p) >= -tol and |sum(p) - 1| <= tol."""
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or not np.all(np.isfinite(p)):
        return False
    return p.min() >= -tol and abs(p.sum() - 1.0) <= tol
