"""Controllability Gramian bases and the Lyapunov/Sylvester back end.

For a stable system the per-node Gramians W_i solve
``A W_i + W_i A^T = -e_i e_i^T``; the finite-horizon variants W_i(T)
integrate ``exp(At) e_i e_i^T exp(A^T t)`` over [0, T].  A basis is stored
either explicitly (all n matrices) or implicitly ("adjoint" mode: one real
Schur factorization of A, plus exp(AT) for finite horizons).  Both modes
answer the same queries:

* ``assemble(p)``       -> sum_i p_i W_i
* ``trace_diagonal(M)`` -> vector with entries tr(M W_i)

Adjoint mode rests on two identities.  For the infinite horizon, with Z
solving ``A^T Z + Z A = -M`` one has tr(M W_i) = Z_ii.  For a finite
horizon T, W_i(T) solves ``A W + W A^T = E e_i e_i^T E^T - e_i e_i^T``
with E = exp(AT), so tr(M W_i(T)) = Z_ii - (E^T Z E)_ii.  Each query is a
single quasi-triangular solve against the cached factorization.
"""

import hashlib
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CtrlscoreError, IllPosedLyapunovError, UnstableSystemError
from .netsys import NetworkSystem, spectral_summary

__all__ = [
    "LyapunovSolver",
    "GramianBasis",
    "solve_lyapunov",
    "matrix_exponential",
    "gramian_basis_infinite",
    "gramian_basis_finite",
    "lyapunov_residual",
    "finite_lyapunov_residual",
    "save_basis",
    "load_basis",
]

EXPLICIT_LIMIT = 256  # auto mode stores all n Gramians up to this size

_THREADS_ENV = "CTRLSCORE_THREADS"


def _worker_count(n: int) -> int:
    raw = os.environ.get(_THREADS_ENV, "1")
    try:
        cap = max(1, int(raw))
    except ValueError:
        cap = 1
    return min(cap, n)


def _symmetrize(W: np.ndarray) -> np.ndarray:
    return 0.5 * (W + W.T)


def _eigvals_from_real_schur(T: np.ndarray) -> np.ndarray:
    """Eigenvalues read off the 1x1/2x2 diagonal blocks of a real Schur form."""
    n = T.shape[0]
    out = np.empty(n, dtype=complex)
    i = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            out[i : i + 2] = np.linalg.eigvals(T[i : i + 2, i : i + 2])
            i += 2
        else:
            out[i] = T[i, i]
            i += 1
    return out


class LyapunovSolver:
    """Sylvester solves sharing one real Schur factorization of A.

    ``solve_forward(C)`` returns W with A W + W A^T = C and
    ``solve_adjoint(C)`` returns Z with A^T Z + Z A = C.  Both require the
    spectra of A and -A to be disjoint, i.e. no eigenvalue pair summing to
    (numerically) zero.
    """

    def __init__(self, A: np.ndarray):
        A = np.asarray(A, dtype=float)
        self.n = A.shape[0]
        self.T, self.U = scipy.linalg.schur(A, output="real")
        self.eigenvalues = _eigvals_from_real_schur(self.T)
        self.spectral_radius = float(np.abs(self.eigenvalues).max())
        pair_sums = np.abs(self.eigenvalues[:, None] + self.eigenvalues[None, :])
        self.min_abs_pair_sum = float(pair_sums.min())
        (self._trsyl,) = scipy.linalg.get_lapack_funcs(("trsyl",), (self.T,))

    def check_solvable(self, tol: float = 1e-12):
        bound = tol * max(self.spectral_radius, 1.0)
        if self.min_abs_pair_sum <= bound:
            raise IllPosedLyapunovError(
                "Lyapunov solve ill-posed: eigenvalue pair sum "
                f"{self.min_abs_pair_sum:.3e} below tolerance {bound:.3e}"
            )

    def _solve(self, C: np.ndarray, adjoint: bool) -> np.ndarray:
        F = self.U.T @ C @ self.U
        if adjoint:
            Y, scale, info = self._trsyl(self.T, self.T, F, trana="T")
        else:
            Y, scale, info = self._trsyl(self.T, self.T, F, tranb="T")
        if info < 0:
            raise CtrlscoreError(f"trsyl: illegal argument {-info}")
        if info == 1:
            raise IllPosedLyapunovError(
                "Lyapunov solve ill-posed: perturbed eigenvalues were required"
            )
        return self.U @ (Y / scale) @ self.U.T

    def solve_forward(self, C: np.ndarray) -> np.ndarray:
        return self._solve(C, adjoint=False)

    def solve_adjoint(self, C: np.ndarray) -> np.ndarray:
        return self._solve(C, adjoint=True)

    def solve_unit_gramian(self, i: int) -> np.ndarray:
        # Rank-one right-hand side: U^T (-e_i e_i^T) U = -outer(U[i], U[i]).
        F = -np.outer(self.U[i], self.U[i])
        Y, scale, info = self._trsyl(self.T, self.T, F, tranb="T")
        if info != 0:
            raise IllPosedLyapunovError("Lyapunov solve ill-posed for unit load")
        return self.U @ (Y / scale) @ self.U.T


def solve_lyapunov(A, Q) -> np.ndarray:
    """Solve A W + W A^T = -Q for symmetric Q.

    The solution is unique when A and -A^T share no eigenvalue (always the
    case for stable A); near-singular operators are rejected.
    """
    solver = LyapunovSolver(np.asarray(A, dtype=float))
    solver.check_solvable()
    return _symmetrize(solver.solve_forward(-np.asarray(Q, dtype=float)))


def matrix_exponential(A, t: float) -> np.ndarray:
    """exp(A t) by scaling-and-squaring with Pade approximation."""
    A = np.asarray(A, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        E = scipy.linalg.expm(A * float(t))
    if not np.all(np.isfinite(E)):
        raise OverflowError(
            f"matrix exponential overflowed (||A t|| ~ {np.abs(A * t).max():.3e})"
        )
    return E


def lyapunov_residual(A, W, Q) -> float:
    """Relative residual of A W + W A^T = -Q."""
    R = A @ W + W @ A.T + Q
    scale = max(np.linalg.norm(Q), 1e-300)
    return float(np.linalg.norm(R) / scale)


def finite_lyapunov_residual(A, W, i: int, E) -> float:
    """Relative residual of A W + W A^T = E e_i e_i^T E^T - e_i e_i^T."""
    rhs = np.outer(E[:, i], E[:, i])
    rhs[i, i] -= 1.0
    R = A @ W + W @ A.T - rhs
    scale = max(np.linalg.norm(rhs), 1.0)
    return float(np.linalg.norm(R) / scale)


@dataclass(frozen=True)
class GramianBasis:
    """The family W_1..W_n for one system and horizon.

    ``matrices`` is an (n, n, n) stack in explicit mode and None in adjoint
    mode; ``solver`` is the shared Schur factorization (always present for
    adjoint mode); ``exp_at`` is exp(A*T) for finite horizons.
    """

    horizon: float
    n: int
    mode: str  # "explicit" | "adjoint"
    system: NetworkSystem
    matrices: np.ndarray | None = None
    solver: LyapunovSolver | None = None
    exp_at: np.ndarray | None = None

    @property
    def is_finite(self) -> bool:
        return not math.isinf(self.horizon)

    def assemble(self, p) -> np.ndarray:
        """The weighted Gramian sum_i p_i W_i."""
        p = np.asarray(p, dtype=float).ravel()
        if p.shape[0] != self.n:
            raise ValueError(f"expected a vector of length {self.n}, got {p.shape[0]}")
        if self.mode == "explicit":
            return _symmetrize(np.einsum("i,ijk->jk", p, self.matrices))
        if not self.is_finite:
            return _symmetrize(self.solver.solve_forward(-np.diag(p)))
        E = self.exp_at
        C = (E * p) @ E.T
        np.fill_diagonal(C, np.diag(C) - p)
        return _symmetrize(self.solver.solve_forward(C))

    def trace_diagonal(self, M) -> np.ndarray:
        """Vector v with v_i = tr(M W_i) for symmetric M."""
        M = np.asarray(M, dtype=float)
        if self.mode == "explicit":
            return np.einsum("ijk,jk->i", self.matrices, M)
        Z = self.solver.solve_adjoint(-M)
        if not self.is_finite:
            return np.diag(Z).copy()
        E = self.exp_at
        return np.diag(Z) - np.einsum("ji,jk,ki->i", E, Z, E)


def _resolve_mode(mode: str, n: int, explicit_limit: int) -> str:
    if mode == "auto":
        return "explicit" if n <= explicit_limit else "adjoint"
    if mode not in ("explicit", "adjoint"):
        raise ValueError(f"unknown basis mode {mode!r}")
    return mode


def _build_explicit_infinite(solver: LyapunovSolver) -> np.ndarray:
    n = solver.n
    Ws = np.empty((n, n, n))

    def build(i):
        Ws[i] = _symmetrize(solver.solve_unit_gramian(i))

    workers = _worker_count(n)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(build, range(n)))
    else:
        for i in range(n):
            build(i)
    return Ws


def _validate_explicit_infinite(A: np.ndarray, Ws: np.ndarray, tol: float = 1e-8):
    # Batched residual of A W_i + W_i A^T + e_i e_i^T over all i.
    R = np.matmul(A[None, :, :], Ws) + np.matmul(Ws, A.T[None, :, :])
    idx = np.arange(Ws.shape[0])
    R[idx, idx, idx] += 1.0
    worst = float(np.sqrt((R**2).sum(axis=(1, 2))).max())
    if worst > tol:
        raise CtrlscoreError(
            f"infinite-horizon basis failed validation: residual {worst:.3e} > {tol:.0e}"
        )


def gramian_basis_infinite(
    sys: NetworkSystem, mode: str = "auto", explicit_limit: int = EXPLICIT_LIMIT
) -> GramianBasis:
    """Infinite-horizon Gramian basis; requires a stable system.

    Explicit mode materializes all n Gramians through n quasi-triangular
    solves against a single Schur factorization; adjoint mode stores only
    the factorization.
    """
    summary = spectral_summary(sys)
    if not summary.is_stable:
        raise UnstableSystemError(
            "infinite-horizon Gramian undefined: A is not stable "
            f"(max Re eigenvalue = {summary.max_real_part:.3e})"
        )
    solver = LyapunovSolver(sys.A)
    solver.check_solvable()
    resolved = _resolve_mode(mode, sys.n, explicit_limit)
    if resolved == "adjoint":
        return GramianBasis(math.inf, sys.n, "adjoint", sys, solver=solver)
    Ws = _build_explicit_infinite(solver)
    _validate_explicit_infinite(sys.A, Ws)
    return GramianBasis(math.inf, sys.n, "explicit", sys, matrices=Ws, solver=solver)


def _build_explicit_finite(A: np.ndarray, T: float) -> tuple[np.ndarray, np.ndarray]:
    """All W_i(T) by the augmented-exponential method.

    exp([[A, e_i e_i^T], [0, -A^T]] T) has exp(AT) as its (1,1) block and
    G = integral_0^T exp(A(T-s)) e_i e_i^T exp(-A^T s) ds as its (1,2)
    block, so W_i(T) = G exp(AT)^T.
    """
    n = A.shape[0]
    blk = np.zeros((2 * n, 2 * n))
    blk[:n, :n] = A * T
    blk[n:, n:] = -A.T * T
    Ws = np.empty((n, n, n))
    exp_at = matrix_exponential(A, T)

    def build(i):
        aug = blk.copy()
        aug[i, n + i] = T
        E = scipy.linalg.expm(aug)
        if not np.all(np.isfinite(E)):
            raise OverflowError(
                f"augmented exponential overflowed for node {i + 1} at T={T}"
            )
        Ws[i] = _symmetrize(E[:n, n:] @ E[:n, :n].T)

    workers = _worker_count(n)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(build, range(n)))
    else:
        for i in range(n):
            build(i)
    return Ws, exp_at


def _validate_explicit_finite(A, Ws, E, tol: float = 1e-7):
    worst = max(
        finite_lyapunov_residual(A, Ws[i], i, E) for i in range(Ws.shape[0])
    )
    if worst > tol:
        raise CtrlscoreError(
            f"finite-horizon basis failed validation: residual {worst:.3e} > {tol:.0e}"
        )


def gramian_basis_finite(
    sys: NetworkSystem,
    T: float,
    mode: str = "auto",
    explicit_limit: int = EXPLICIT_LIMIT,
) -> GramianBasis:
    """Finite-horizon Gramian basis; stability of A is not required.

    Adjoint mode additionally needs the spectra of A and -A to be disjoint
    (so the defining Lyapunov-type equation is uniquely solvable); when
    they are not, the builder falls back to explicit storage.
    """
    if not T > 0:
        raise ValueError("horizon T must be positive")
    resolved = _resolve_mode(mode, sys.n, explicit_limit)
    summary = spectral_summary(sys)
    if resolved == "adjoint" and summary.common_eig_with_negation:
        resolved = "explicit"  # no adjoint shortcut exists in this case
    if resolved == "adjoint":
        solver = LyapunovSolver(sys.A)
        solver.check_solvable()
        exp_at = matrix_exponential(sys.A, T)
        return GramianBasis(float(T), sys.n, "adjoint", sys, solver=solver, exp_at=exp_at)
    Ws, exp_at = _build_explicit_finite(sys.A, float(T))
    _validate_explicit_finite(sys.A, Ws, exp_at)
    return GramianBasis(float(T), sys.n, "explicit", sys, matrices=Ws, exp_at=exp_at)


# ---------------------------------------------------------------------------
# binary cache for explicit bases

_CACHE_MAGIC = b"CTRLSCGB"
_CACHE_VERSION = 1


def _system_hash(A: np.ndarray) -> bytes:
    return hashlib.sha256(np.ascontiguousarray(A, dtype=float).tobytes()).digest()


def save_basis(basis: GramianBasis, path):
    """Write an explicit basis: header (n, horizon, hash of A) + float64 data."""
    if basis.mode != "explicit":
        raise CtrlscoreError("only explicit bases can be cached")
    finite = basis.is_finite
    header = _CACHE_MAGIC + struct.pack(
        "<IQBd",
        _CACHE_VERSION,
        basis.n,
        1 if finite else 0,
        basis.horizon if finite else 0.0,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(_system_hash(basis.system.A))
        fh.write(np.ascontiguousarray(basis.matrices, dtype="<f8").tobytes())


def load_basis(sys: NetworkSystem, path) -> GramianBasis:
    """Load a cached explicit basis and revalidate the residual of W_1."""
    with open(path, "rb") as fh:
        blob = fh.read()
    head = len(_CACHE_MAGIC) + struct.calcsize("<IQBd")
    if len(blob) < head + 32 or blob[: len(_CACHE_MAGIC)] != _CACHE_MAGIC:
        raise CtrlscoreError(f"{path}: not a Gramian basis cache")
    version, n, finite_flag, T = struct.unpack(
        "<IQBd", blob[len(_CACHE_MAGIC) : head]
    )
    if version != _CACHE_VERSION:
        raise CtrlscoreError(f"{path}: unsupported cache version {version}")
    if n != sys.n:
        raise CtrlscoreError(f"{path}: cache is for n={n}, system has n={sys.n}")
    if blob[head : head + 32] != _system_hash(sys.A):
        raise CtrlscoreError(f"{path}: cache was built for a different state matrix")
    payload = blob[head + 32 :]
    if len(payload) != n * n * n * 8:
        raise CtrlscoreError(f"{path}: truncated cache payload")
    Ws = np.frombuffer(payload, dtype="<f8").reshape(n, n, n).copy()
    if finite_flag:
        E = matrix_exponential(sys.A, T)
        resid = finite_lyapunov_residual(sys.A, Ws[0], 0, E)
        if resid > 1e-7:
            raise CtrlscoreError(f"{path}: cached W_1 residual {resid:.3e} too large")
        return GramianBasis(float(T), sys.n, "explicit", sys, matrices=Ws, exp_at=E)
    Q = np.zeros((n, n))
    Q[0, 0] = 1.0
    resid = lyapunov_residual(sys.A, Ws[0], Q)
    if resid > 1e-8:
        raise CtrlscoreError(f"{path}: cached W_1 residual {resid:.3e} too large")
    return GramianBasis(math.inf, sys.n, "explicit", sys, matrices=Ws)
