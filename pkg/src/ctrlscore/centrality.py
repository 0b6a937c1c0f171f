"""Public scoring API: VCS, AECS, observability duals, VCE/ACE baselines.

The volumetric controllability score (VCS) is the unique minimizer of
-log det W(p) over the standard simplex; the average energy
controllability score (AECS) minimizes tr(W(p)^{-1}).  Larger score =
the node contributes more to controllability.  VCE and ACE are per-node
baselines computed from each single-node Gramian alone: the sum of the
logs of its positive eigenvalues, and minus the trace of its
pseudo-inverse.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CtrlscoreError
from .gramian import gramian_basis_finite, gramian_basis_infinite
from .netsys import (
    NetworkSystem,
    horizon_from_json,
    horizon_to_json,
    transposed,
    uniqueness_certificate,
)
from .objective import ObjectiveKind
from .optimizer import OptimizerConfig, solve

__all__ = [
    "CentralityReport",
    "vcs",
    "aecs",
    "observability_scores",
    "vce",
    "ace",
    "rank_report",
    "build_basis",
]

MEASURES = ("vcs", "aecs", "vce", "ace")

DEFAULT_RANK_TOL = 1e-10


def build_basis(sys: NetworkSystem, horizon: float, mode: str = "auto"):
    if math.isinf(horizon):
        return gramian_basis_infinite(sys, mode=mode)
    return gramian_basis_finite(sys, horizon, mode=mode)


def _ranking(values) -> list:
    vals = np.asarray(values, dtype=float)
    order = sorted(range(vals.shape[0]), key=lambda i: (-vals[i], i))
    return [int(i) + 1 for i in order]  # 1-based node ids, best first


def _solve_diagnostics(cert, trace) -> dict:
    return {
        "certificate_verdict": cert.verdict.value,
        "iterations": trace.iterations,
        "stop_reason": trace.stop_reason.value,
        "stationarity_residual": trace.stationarity_residual,
        "objective": trace.objective_values[-1],
        "backtracks_total": int(sum(trace.armijo_backtracks)),
    }


def _score(kind: ObjectiveKind, sys, horizon, cfg, basis=None):
    cert = uniqueness_certificate(sys, horizon)
    if basis is None:
        basis = build_basis(sys, horizon)
    point, trace = solve(kind, basis, cfg)
    return point, trace, cert


def vcs(sys: NetworkSystem, horizon: float, cfg: OptimizerConfig | None = None):
    """Volumetric controllability score; returns (scores, diagnostics)."""
    point, trace, cert = _score(ObjectiveKind.VOLUMETRIC, sys, horizon, cfg)
    return point.p.copy(), _solve_diagnostics(cert, trace)


def aecs(sys: NetworkSystem, horizon: float, cfg: OptimizerConfig | None = None):
    """Average energy controllability score; returns (scores, diagnostics)."""
    point, trace, cert = _score(ObjectiveKind.AVERAGE_ENERGY, sys, horizon, cfg)
    return point.p.copy(), _solve_diagnostics(cert, trace)


def observability_scores(
    sys: NetworkSystem,
    kind: ObjectiveKind,
    horizon: float,
    cfg: OptimizerConfig | None = None,
):
    """Controllability scores of the transposed system (sensor placement)."""
    point, trace, cert = _score(kind, transposed(sys), horizon, cfg)
    diag = _solve_diagnostics(cert, trace)
    diag["dual"] = True
    return point.p.copy(), diag


def _eig_threshold(lams: np.ndarray, rank_tol: float) -> float:
    return rank_tol * float(lams[-1])


def vce(
    sys: NetworkSystem,
    horizon: float,
    rank_tol: float = DEFAULT_RANK_TOL,
    basis=None,
) -> np.ndarray:
    """Sum of log positive eigenvalues of each single-node Gramian.

    A node whose Gramian is exactly zero gets -inf.  When the Gramian has
    full rank this equals log det W_i.
    """
    if basis is None:
        basis = build_basis(sys, horizon, mode="explicit")
    out = np.empty(basis.n)
    for i in range(basis.n):
        lams = np.linalg.eigvalsh(basis.matrices[i])
        if lams[-1] <= 0.0:
            out[i] = -math.inf
            continue
        positive = lams[lams > _eig_threshold(lams, rank_tol)]
        out[i] = float(np.log(positive).sum())
    return out


def ace(
    sys: NetworkSystem,
    horizon: float,
    rank_tol: float = DEFAULT_RANK_TOL,
    basis=None,
) -> np.ndarray:
    """Minus the trace of the pseudo-inverse of each single-node Gramian."""
    if basis is None:
        basis = build_basis(sys, horizon, mode="explicit")
    out = np.empty(basis.n)
    for i in range(basis.n):
        lams = np.linalg.eigvalsh(basis.matrices[i])
        if lams[-1] <= 0.0:
            out[i] = 0.0  # pseudo-inverse of the zero matrix is zero
            continue
        positive = lams[lams > _eig_threshold(lams, rank_tol)]
        out[i] = -float((1.0 / positive).sum())
    return out


@dataclass
class CentralityReport:
    """Per-node measures with rankings and solver diagnostics."""

    n: int
    horizon: float
    node_labels: tuple
    measures: dict = field(default_factory=dict)
    rankings: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    traces: dict | None = None  # OptimizerTrace per measure; not serialized

    def to_json_dict(self) -> dict:
        measures = {
            name: ["neg_inf" if v == -math.inf else float(v) for v in vals]
            for name, vals in self.measures.items()
        }
        return {
            "n": self.n,
            "horizon": horizon_to_json(self.horizon),
            "node_labels": list(self.node_labels),
            "measures": measures,
            "rankings": {k: list(v) for k, v in self.rankings.items()},
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CentralityReport":
        measures = {
            name: np.array(
                [-math.inf if v == "neg_inf" else float(v) for v in vals]
            )
            for name, vals in doc["measures"].items()
        }
        return cls(
            n=int(doc["n"]),
            horizon=horizon_from_json(doc["horizon"]),
            node_labels=tuple(doc["node_labels"]),
            measures=measures,
            rankings={k: list(v) for k, v in doc["rankings"].items()},
            diagnostics=doc.get("diagnostics", {}),
        )

    def to_csv(self) -> str:
        names = [m for m in MEASURES if m in self.measures] + [
            m for m in self.measures if m not in MEASURES
        ]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["node", "label"] + names)
        for i in range(self.n):
            row = [i + 1, self.node_labels[i]]
            row += [repr(float(self.measures[m][i])) for m in names]
            writer.writerow(row)
        return buf.getvalue()


def rank_report(
    sys: NetworkSystem,
    measures,
    horizon: float,
    cfg: OptimizerConfig | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
    mode: str = "auto",
    dual: bool = False,
) -> CentralityReport:
    """Compute the requested measures and assemble a ranked report.

    Per-measure failures are recorded in ``diagnostics["errors"]`` and do
    not abort the remaining measures.
    """
    requested = [m.strip().lower() for m in measures if str(m).strip()]
    if not requested:
        raise ValueError("at least one measure must be requested")
    for m in requested:
        if m == "cc":
            raise CtrlscoreError("CC unsupported (out of scope)")
        if m not in MEASURES:
            raise ValueError(f"unknown measure {m!r}; available: {', '.join(MEASURES)}")
    ordered = [m for m in MEASURES if m in requested]

    target = transposed(sys) if dual else sys
    cert = uniqueness_certificate(target, horizon)
    needs_explicit = bool({"vce", "ace"} & set(ordered))
    basis = build_basis(target, horizon, mode="explicit" if needs_explicit else mode)

    report = CentralityReport(
        n=sys.n,
        horizon=horizon,
        node_labels=sys.node_labels,
        diagnostics={
            "certificate": cert.to_dict(),
            "basis_mode": basis.mode,
            "dual": dual,
            "per_measure": {},
            "errors": {},
        },
        traces={},
    )
    kinds = {"vcs": ObjectiveKind.VOLUMETRIC, "aecs": ObjectiveKind.AVERAGE_ENERGY}
    for m in ordered:
        try:
            if m in kinds:
                point, trace = solve(kinds[m], basis, cfg)
                report.measures[m] = point.p.copy()
                report.diagnostics["per_measure"][m] = _solve_diagnostics(cert, trace)
                report.traces[m] = trace
            elif m == "vce":
                report.measures[m] = vce(target, horizon, rank_tol, basis=basis)
                report.diagnostics["per_measure"][m] = {"rank_tol": rank_tol}
            else:
                report.measures[m] = ace(target, horizon, rank_tol, basis=basis)
                report.diagnostics["per_measure"][m] = {"rank_tol": rank_tol}
            report.rankings[m] = _ranking(report.measures[m])
        except CtrlscoreError as exc:
            report.diagnostics["errors"][m] = str(exc)
    return report
