"""Exception types shared across the package."""


class CtrlscoreError(Exception):
    """Base class for errors raised by this package."""


class EdgeListError(CtrlscoreError):
    """Malformed edge-list or matrix input."""


class UnstableSystemError(CtrlscoreError):
    """An infinite-horizon quantity was requested for an unstable system."""


class IllPosedLyapunovError(CtrlscoreError):
    """The Lyapunov/Sylvester operator is singular or nearly singular."""


class InfeasiblePointError(CtrlscoreError):
    """Evaluation requested at a point where the weighted Gramian is singular."""


class LineSearchStalledError(CtrlscoreError):
    """Armijo backtracking hit its cap without finding sufficient decrease."""
