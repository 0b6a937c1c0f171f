"""Network system construction, spectral classification, and uniqueness certificates.

A network system is a continuous-time linear system dx/dt = A x whose state
matrix A encodes the (weighted, possibly directed) network.  Node ids are
1-indexed in all text formats and 0-indexed internally.  Horizons are plain
floats: ``math.inf`` selects the infinite horizon, any positive float T the
finite one.
"""

import json
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import EdgeListError, UnstableSystemError

__all__ = [
    "Origin",
    "NetworkSystem",
    "SpectralSummary",
    "Verdict",
    "UniquenessCertificate",
    "make_system",
    "load_edge_list",
    "load_matrix_json",
    "build_laplacian_dynamics",
    "generate_random_network",
    "spectral_summary",
    "uniqueness_certificate",
    "transposed",
    "horizon_to_json",
    "horizon_from_json",
]

_LAPLACIAN_TOL = 1e-10


class Origin(Enum):
    EDGE_LIST = "edge_list"
    LAPLACIAN_DYNAMICS = "laplacian_dynamics"
    RANDOM = "random"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class NetworkSystem:
    """An immutable linear network system dx/dt = A x."""

    n: int
    A: np.ndarray
    origin: Origin = Origin.EXPLICIT
    node_labels: tuple = ()

    def __post_init__(self):
        A = np.ascontiguousarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != self.n:
            raise ValueError(f"state matrix must be {self.n}x{self.n}, got {A.shape}")
        if self.n < 1:
            raise ValueError("system needs at least one node")
        if not np.all(np.isfinite(A)):
            raise ValueError("state matrix has non-finite entries")
        if self.origin is Origin.LAPLACIAN_DYNAMICS:
            scale = max(np.abs(A).max(), 1.0)
            if np.abs(A - A.T).max() > _LAPLACIAN_TOL * scale:
                raise ValueError("Laplacian dynamics require a symmetric state matrix")
            if np.abs(A.sum(axis=1)).max() > _LAPLACIAN_TOL * scale:
                raise ValueError("Laplacian dynamics require zero row sums")
            off = A - np.diag(np.diag(A))
            if off.min() < -_LAPLACIAN_TOL * scale:
                raise ValueError("Laplacian dynamics require nonnegative off-diagonals")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        labels = tuple(self.node_labels) if self.node_labels else tuple(
            str(i + 1) for i in range(self.n)
        )
        if len(labels) != self.n:
            raise ValueError("node_labels length must equal n")
        object.__setattr__(self, "node_labels", labels)


def make_system(A, origin: Origin = Origin.EXPLICIT, node_labels=()) -> NetworkSystem:
    A = np.asarray(A, dtype=float)
    return NetworkSystem(A.shape[0], A, origin, tuple(node_labels))


def transposed(sys: NetworkSystem) -> NetworkSystem:
    """The system with state matrix A^T (used for observability duals)."""
    origin = sys.origin if sys.origin is Origin.LAPLACIAN_DYNAMICS else Origin.EXPLICIT
    return NetworkSystem(sys.n, sys.A.T.copy(), origin, sys.node_labels)


# ---------------------------------------------------------------------------
# construction


def _parse_edge_lines(text: str):
    """Yield (line_number, src, dst, weight) for each payload line."""
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise EdgeListError(f"line {lineno}: expected 'src dst weight', got {raw!r}")
        try:
            src, dst = int(parts[0]), int(parts[1])
            weight = float(parts[2])
        except ValueError as exc:
            raise EdgeListError(f"line {lineno}: {exc}") from None
        if src < 1 or dst < 1:
            raise EdgeListError(f"line {lineno}: node ids must be positive, got {src} {dst}")
        if not math.isfinite(weight):
            raise EdgeListError(f"line {lineno}: weight must be finite")
        edges.append((lineno, src, dst, weight))
    if not edges:
        raise EdgeListError("empty edge list")
    return edges


def load_edge_list(text: str, directed: bool = True) -> NetworkSystem:
    """Build a system from `src dst weight` lines.

    An edge src -> dst means src influences dst and is stored at
    A[dst-1, src-1]; duplicate edges sum, self-loops land on the diagonal.
    With ``directed=False`` every edge is mirrored (self-loops only once).
    """
    edges = _parse_edge_lines(text)
    n = max(max(s, d) for _, s, d, _ in edges)
    A = np.zeros((n, n))
    for _, src, dst, w in edges:
        A[dst - 1, src - 1] += w
        if not directed and src != dst:
            A[src - 1, dst - 1] += w
    return NetworkSystem(n, A, Origin.EDGE_LIST)


def load_matrix_json(text: str) -> NetworkSystem:
    """Parse the dense-matrix JSON input ``{"n": int, "A": [[...], ...]}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise EdgeListError(f"invalid matrix JSON: {exc}") from None
    if not isinstance(doc, dict) or "n" not in doc or "A" not in doc:
        raise EdgeListError('matrix JSON must contain keys "n" and "A"')
    n = int(doc["n"])
    A = np.asarray(doc["A"], dtype=float)
    if A.shape != (n, n):
        raise EdgeListError(f'"A" must be {n}x{n} row-major, got shape {A.shape}')
    return NetworkSystem(n, A, Origin.EXPLICIT)


def build_laplacian_dynamics(edges, n: int) -> NetworkSystem:
    """A = -L for the weighted Laplacian L = D - W of an undirected graph.

    ``edges`` is an iterable of (i, j, weight) with 1-indexed node ids.
    """
    W = np.zeros((n, n))
    for i, j, w in edges:
        if w < 0:
            raise EdgeListError(f"negative weight {w} on edge ({i}, {j})")
        if not (1 <= i <= n and 1 <= j <= n):
            raise EdgeListError(f"edge ({i}, {j}) references a node outside 1..{n}")
        if i == j:
            raise EdgeListError(f"self-loop on node {i} not allowed in a graph Laplacian")
        W[i - 1, j - 1] += w
        W[j - 1, i - 1] += w
    L = np.diag(W.sum(axis=1)) - W
    return NetworkSystem(n, -L, Origin.LAPLACIAN_DYNAMICS)


def generate_random_network(
    n: int, density: float, seed: int, diagonal_shift: float
) -> NetworkSystem:
    """Random directed network with uniform [0, 1] edge weights.

    Each off-diagonal entry is independently present with probability
    ``density``; the diagonal is set to ``diagonal_shift`` (choose e.g. -n
    to force stability by diagonal dominance).  Deterministic given seed.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    values = rng.uniform(0.0, 1.0, size=(n, n))
    mask = rng.random(size=(n, n)) < density
    A = np.where(mask, values, 0.0)
    np.fill_diagonal(A, diagonal_shift)
    return NetworkSystem(n, A, Origin.RANDOM)


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray
    max_real_part: float
    is_stable: bool
    common_eig_with_negation: bool
    spectral_radius: float
    min_abs_eig_pair_sum: float


def spectral_summary(
    sys: NetworkSystem, tol_stab: float = 1e-9, tol_eig: float = 1e-8
) -> SpectralSummary:
    """Dense eigenvalue analysis: stability and spectrum-vs-negation overlap.

    ``tol_eig`` is relative to the spectral radius.  Eigensolver failures
    propagate (no silent fallback).
    """
    eig = np.linalg.eigvals(sys.A)
    max_real = float(eig.real.max())
    radius = float(np.abs(eig).max())
    stable = max_real < -tol_stab
    pair_sums = np.abs(eig[:, None] + eig[None, :])
    min_pair = float(pair_sums.min())
    # A spectrum that is certified stable is disjoint from its negation, so
    # stability overrides the pairwise tolerance test.
    common = (not stable) and min_pair <= tol_eig * max(radius, 1.0)
    return SpectralSummary(eig, max_real, stable, common, radius, min_pair)


# ---------------------------------------------------------------------------
# uniqueness certificates


class Verdict(Enum):
    STABLE_INFINITE = "StableInfinite"
    FINITE_NO_COMMON_EIGENVALUE = "FiniteNoCommonEigenvalue"
    FINITE_LAPLACIAN_CONNECTED = "FiniteLaplacianConnected"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class UniquenessCertificate:
    verdict: Verdict
    horizon: float
    evidence: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict is not Verdict.UNKNOWN

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "horizon": horizon_to_json(self.horizon),
            "evidence": dict(self.evidence),
        }


def horizon_to_json(horizon: float):
    return "inf" if math.isinf(horizon) else float(horizon)


def horizon_from_json(value) -> float:
    if value == "inf":
        return math.inf
    horizon = float(value)
    if not horizon > 0:
        raise ValueError("finite horizon must be positive")
    return horizon


def _bfs_connected(A: np.ndarray) -> bool:
    n = A.shape[0]
    adj = np.abs(A - np.diag(np.diag(A))) > 0.0
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in np.nonzero(adj[i])[0]:
            if not seen[j]:
                seen[j] = True
                queue.append(j)
    return bool(seen.all())


def _laplacian_connectivity(sys: NetworkSystem):
    """(algebraic connectivity, spectral test, BFS cross-check) for A = -L."""
    L = -sys.A
    if sys.n == 1:
        return 0.0, True, True
    eigs = np.linalg.eigvalsh(L)
    lam2 = float(eigs[1])
    max_degree = float(np.diag(L).max())
    spectral_ok = lam2 > 1e-8 * max(max_degree, 1e-300)
    return lam2, spectral_ok, _bfs_connected(sys.A)


def uniqueness_certificate(sys: NetworkSystem, horizon: float) -> UniquenessCertificate:
    """Certify that the scoring problem has a unique optimum at this horizon.

    An Unknown verdict only records the absence of a certificate; it never
    claims non-uniqueness.  Requesting the infinite horizon on an unstable
    system is an error because the Gramian itself is undefined there.
    """
    summary = spectral_summary(sys)
    if math.isinf(horizon):
        if not summary.is_stable:
            raise UnstableSystemError(
                "infinite-horizon Gramian undefined: A is not stable "
                f"(max Re eigenvalue = {summary.max_real_part:.3e}); "
                "use a finite horizon instead"
            )
        return UniquenessCertificate(
            Verdict.STABLE_INFINITE,
            horizon,
            {
                "max_real_part": summary.max_real_part,
                "spectral_radius": summary.spectral_radius,
            },
        )
    if not horizon > 0:
        raise ValueError("finite horizon must be positive")
    evidence = {
        "max_real_part": summary.max_real_part,
        "min_abs_eig_pair_sum": summary.min_abs_eig_pair_sum,
    }
    if not summary.common_eig_with_negation:
        return UniquenessCertificate(Verdict.FINITE_NO_COMMON_EIGENVALUE, horizon, evidence)
    if sys.origin is Origin.LAPLACIAN_DYNAMICS:
        lam2, spectral_ok, bfs_ok = _laplacian_connectivity(sys)
        evidence.update(
            {"algebraic_connectivity": lam2, "bfs_connected": bfs_ok}
        )
        if spectral_ok and bfs_ok:
            return UniquenessCertificate(
                Verdict.FINITE_LAPLACIAN_CONNECTED, horizon, evidence
            )
    return UniquenessCertificate(Verdict.UNKNOWN, horizon, evidence)
