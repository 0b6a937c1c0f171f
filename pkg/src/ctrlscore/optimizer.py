"""Projected gradient method on the simplex with Armijo backtracking.

Each iteration takes a gradient step, projects back onto the standard
simplex, and accepts the step size through the Armijo rule along the
projection arc: the projected trial point must satisfy

    F(p_trial) <= F(p) + sigma * grad(p)^T (p_trial - p).

Trial points where the weighted Gramian is singular evaluate to +inf and
are rejected like any other failed trial.  Iteration stops once two
consecutive iterates are within ``epsilon`` of each other.
"""

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import InfeasiblePointError, LineSearchStalledError
from .objective import ObjectiveKind, evaluate, feasibility, gradient
from .simplex import ScorePoint, project, score_point, uniform_point

__all__ = ["OptimizerConfig", "OptimizerTrace", "StopReason", "armijo_step", "solve"]


class StopReason(Enum):
    EPSILON_STATIONARY = "epsilon_stationary"
    MAX_ITERS = "max_iters"


@dataclass
class OptimizerConfig:
    epsilon: float = 1e-4
    sigma: float = 1e-4
    rho: float = 0.5
    alpha0: float = 1.0
    max_iters: int = 100_000
    start: np.ndarray | None = None
    backtrack_cap: int = 60
    warm_start: bool = False  # reuse the previous accepted step size

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must lie in (0, 1)")
        if not self.alpha0 > 0.0:
            raise ValueError("alpha0 must be positive")
        if self.epsilon < 0.0:
            raise ValueError("epsilon must be nonnegative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class OptimizerTrace:
    iterates: list = field(default_factory=list)  # ScorePoint per iterate
    objective_values: list = field(default_factory=list)
    step_sizes: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    armijo_backtracks: list = field(default_factory=list)
    stop_reason: StopReason = StopReason.MAX_ITERS
    stationarity_residual: float = math.nan

    @property
    def iterations(self) -> int:
        return len(self.step_sizes)

    def to_jsonl(self) -> str:
        lines = [
            json.dumps({"k": 0, "f": self.objective_values[0], "alpha": None, "step_norm": None})
        ]
        for k in range(self.iterations):
            lines.append(
                json.dumps(
                    {
                        "k": k + 1,
                        "f": self.objective_values[k + 1],
                        "alpha": self.step_sizes[k],
                        "step_norm": self.step_norms[k],
                    }
                )
            )
        return "\n".join(lines) + "\n"

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())


def armijo_step(
    kind: ObjectiveKind,
    basis,
    point: ScorePoint,
    grad: np.ndarray,
    cfg: OptimizerConfig,
    f_value: float | None = None,
    alpha_start: float | None = None,
):
    """One Armijo search along the projection arc.

    Returns (accepted alpha, next point with feasibility evidence, number
    of backtracks).  At a stationary point the projected trial equals the
    current point and the first alpha is accepted with zero movement.
    """
    if f_value is None:
        f_value = evaluate(kind, basis, point.p, chol=point.feasible)
    alpha = cfg.alpha0 if alpha_start is None else alpha_start
    for backtracks in range(cfg.backtrack_cap + 1):
        trial = project(point.p - alpha * grad)
        chol = feasibility(basis, trial.p)
        f_trial = math.inf if chol is None else evaluate(kind, basis, trial.p, chol=chol)
        if f_trial <= f_value + cfg.sigma * float(grad @ (trial.p - point.p)):
            return alpha, replace(trial, feasible=chol), backtracks
        alpha *= cfg.rho
    raise LineSearchStalledError(
        f"line search stalled after {cfg.backtrack_cap} backtracks "
        f"(alpha reached {alpha:.3e})"
    )


def stationarity_residual(kind: ObjectiveKind, basis, point: ScorePoint) -> float:
    """|| p - project(p - grad F(p)) ||, the unit-step fixed-point residual."""
    grad = gradient(kind, basis, point.p, chol=point.feasible)
    return float(np.linalg.norm(point.p - project(point.p - grad).p))


def solve(kind: ObjectiveKind, basis, cfg: OptimizerConfig | None = None):
    """Run the projected gradient method; returns (point, trace).

    The start defaults to the uniform distribution, which is always
    feasible for a controllable horizon.  An infeasible start is an error.
    """
    cfg = OptimizerConfig() if cfg is None else cfg
    start = uniform_point(basis.n) if cfg.start is None else score_point(cfg.start)
    chol = feasibility(basis, start.p)
    if chol is None:
        raise InfeasiblePointError("optimizer start point is infeasible")
    point = replace(start, feasible=chol)
    f_value = evaluate(kind, basis, point.p, chol=chol)

    trace = OptimizerTrace()
    trace.iterates.append(point)
    trace.objective_values.append(f_value)

    alpha_prev = None
    stop = StopReason.MAX_ITERS
    for _ in range(cfg.max_iters):
        grad = gradient(kind, basis, point.p, chol=point.feasible)
        alpha, nxt, backtracks = armijo_step(
            kind,
            basis,
            point,
            grad,
            cfg,
            f_value=f_value,
            alpha_start=alpha_prev if cfg.warm_start else None,
        )
        step_norm = float(np.linalg.norm(nxt.p - point.p))
        f_value = evaluate(kind, basis, nxt.p, chol=nxt.feasible)
        point = nxt
        alpha_prev = alpha

        trace.iterates.append(point)
        trace.objective_values.append(f_value)
        trace.step_sizes.append(alpha)
        trace.step_norms.append(step_norm)
        trace.armijo_backtracks.append(backtracks)

        if step_norm <= cfg.epsilon:
            stop = StopReason.EPSILON_STATIONARY
            break

    trace.stop_reason = stop
    trace.stationarity_residual = stationarity_residual(kind, basis, point)
    return point, trace
