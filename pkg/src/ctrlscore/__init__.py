"""Controllability scores for selecting control nodes of linear network systems.

Computes the volumetric and average-energy controllability scores (the
unique minimizers of -log det and trace-of-inverse of the node-weighted
controllability Gramian over the standard simplex), their finite-horizon
variants for unstable systems, observability duals, and the VCE/ACE
baseline centralities.
"""

from .centrality import (
    CentralityReport,
    ace,
    aecs,
    build_basis,
    observability_scores,
    rank_report,
    vce,
    vcs,
)
from .errors import (
    CtrlscoreError,
    EdgeListError,
    IllPosedLyapunovError,
    InfeasiblePointError,
    LineSearchStalledError,
    UnstableSystemError,
)
from .gramian import (
    GramianBasis,
    gramian_basis_finite,
    gramian_basis_infinite,
    load_basis,
    matrix_exponential,
    save_basis,
    solve_lyapunov,
)
from .netsys import (
    NetworkSystem,
    Origin,
    SpectralSummary,
    UniquenessCertificate,
    Verdict,
    build_laplacian_dynamics,
    generate_random_network,
    load_edge_list,
    load_matrix_json,
    make_system,
    spectral_summary,
    transposed,
    uniqueness_certificate,
)
from .objective import ObjectiveKind, evaluate, feasibility, gradient, hessian
from .optimizer import OptimizerConfig, OptimizerTrace, StopReason, armijo_step, solve
from .simplex import ScorePoint, is_member, project, score_point, uniform_point

__version__ = "0.1.0"

__all__ = [
    "CentralityReport",
    "CtrlscoreError",
    "EdgeListError",
    "GramianBasis",
    "IllPosedLyapunovError",
    "InfeasiblePointError",
    "LineSearchStalledError",
    "NetworkSystem",
    "ObjectiveKind",
    "OptimizerConfig",
    "OptimizerTrace",
    "Origin",
    "ScorePoint",
    "SpectralSummary",
    "StopReason",
    "UniquenessCertificate",
    "UnstableSystemError",
    "Verdict",
    "ace",
    "aecs",
    "armijo_step",
    "build_basis",
    "build_laplacian_dynamics",
    "evaluate",
    "feasibility",
    "generate_random_network",
    "gradient",
    "gramian_basis_finite",
    "gramian_basis_infinite",
    "hessian",
    "is_member",
    "load_basis",
    "load_edge_list",
    "load_matrix_json",
    "make_system",
    "matrix_exponential",
    "observability_scores",
    "project",
    "rank_report",
    "save_basis",
    "score_point",
    "solve",
    "solve_lyapunov",
    "spectral_summary",
    "transposed",
    "uniform_point",
    "uniqueness_certificate",
    "vce",
    "vcs",
]
