"""Exception types shared across the package."""


class DataError(ValueError):
    """Bad user-supplied data: shapes, labels, file parse failures."""


class SolverError(RuntimeError):
    """Numerical failure inside an optimization routine."""


class TrivialDirectionError(SolverError):
    """The l1 weight is large enough that the fitted direction is all-zero."""


class DegenerateDirectionError(SolverError):
    """Scoring update degenerated although the discriminant vector is nonzero."""


class BacktrackingError(SolverError):
    """Backtracking line search exhausted its step-length budget."""


class ConvergenceError(SolverError):
    """An iterative linear solve failed to reach its tolerance."""
