"""The two convex scoring objectives, their gradients and Hessians.

For the weighted Gramian W(p) = sum_i p_i W_i the objectives are

* volumetric:      f(p) = -log det W(p)
* average energy:  g(p) = tr(W(p)^{-1})

Both are strictly convex on the feasible region {p : W(p) positive
definite}.  Infeasible points evaluate to +inf so that a backtracking line
search can reject them without special-casing.
"""

import math
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import CtrlscoreError, InfeasiblePointError

__all__ = ["ObjectiveKind", "feasibility", "evaluate", "gradient", "hessian"]

_EPS = float(np.finfo(float).eps)

HESSIAN_SIZE_CAP = 64  # Hessians are O(n^4); kept for verification only


class ObjectiveKind(Enum):
    VOLUMETRIC = "volumetric"
    AVERAGE_ENERGY = "average_energy"


def feasibility(basis, p) -> np.ndarray | None:
    """Cholesky factor of the assembled Gramian, or None when not PD.

    Pivots must clear n * eps * ||W||; the factor is returned so callers
    can reuse it for evaluation.
    """
    W = basis.assemble(p)
    if not np.all(np.isfinite(W)):
        return None
    try:
        L = np.linalg.cholesky(W)
    except np.linalg.LinAlgError:
        return None
    # One-norm upper-bounds the spectral norm for symmetric W.
    norm_bound = float(np.abs(W).sum(axis=0).max())
    if float((np.diag(L) ** 2).min()) <= W.shape[0] * _EPS * norm_bound:
        return None
    return L


def evaluate(kind: ObjectiveKind, basis, p, chol: np.ndarray | None = None) -> float:
    """Objective value at p, or +inf when W(p) is not positive definite."""
    L = feasibility(basis, p) if chol is None else chol
    if L is None:
        return math.inf
    if kind is ObjectiveKind.VOLUMETRIC:
        return float(-2.0 * np.log(np.diag(L)).sum())
    X = scipy.linalg.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    return float((X * X).sum())


def _inverse_from_cholesky(L: np.ndarray) -> np.ndarray:
    Winv = scipy.linalg.cho_solve((L, True), np.eye(L.shape[0]))
    return 0.5 * (Winv + Winv.T)


def gradient(kind: ObjectiveKind, basis, p, chol: np.ndarray | None = None) -> np.ndarray:
    """Gradient at a feasible p; every component is strictly negative.

    Volumetric:     grad_i = -tr(W(p)^{-1} W_i)
    Average energy: grad_i = -tr(W(p)^{-1} W_i W(p)^{-1})
    """
    L = feasibility(basis, p) if chol is None else chol
    if L is None:
        raise InfeasiblePointError("gradient requested at an infeasible point")
    Winv = _inverse_from_cholesky(L)
    if kind is ObjectiveKind.VOLUMETRIC:
        return -basis.trace_diagonal(Winv)
    Winv2 = scipy.linalg.cho_solve((L, True), Winv)
    return -basis.trace_diagonal(0.5 * (Winv2 + Winv2.T))


def hessian(kind: ObjectiveKind, basis, p, size_cap: int = HESSIAN_SIZE_CAP) -> np.ndarray:
    """Dense Hessian at a feasible p (verification/diagnostic path only).

    Requires an explicit basis.  With M_i = L^{-1} W_i L^{-T} for the
    Cholesky factor L of W(p):

    Volumetric:     H_ij = tr(M_i M_j)
    Average energy: H_ij = 2 tr(M_i M_j C) with C = L^{-1} L^{-T}

    Both forms are symmetric positive definite on the feasible region.
    """
    if basis.mode != "explicit":
        raise CtrlscoreError("hessian requires an explicit Gramian basis")
    n = basis.n
    if n > size_cap:
        raise CtrlscoreError(f"hessian capped at n <= {size_cap} (O(n^4) cost)")
    L = feasibility(basis, p)
    if L is None:
        raise InfeasiblePointError("hessian requested at an infeasible point")
    Ms = np.empty((n, n, n))
    for i in range(n):
        half = scipy.linalg.solve_triangular(L, basis.matrices[i], lower=True)
        Ms[i] = scipy.linalg.solve_triangular(L, half.T, lower=True)
    if kind is ObjectiveKind.VOLUMETRIC:
        H = np.einsum("iab,jab->ij", Ms, Ms)
    else:
        Linv = scipy.linalg.solve_triangular(L, np.eye(n), lower=True)
        C = Linv @ Linv.T
        Qs = np.matmul(Ms, C[None, :, :])
        H = 2.0 * np.einsum("iab,jba->ij", Ms, Qs)
    return 0.5 * (H + H.T)
