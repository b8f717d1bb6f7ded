"""Exception hierarchy shared by all modules.

Solver failures map onto distinct CLI exit codes; see cli.EXIT_CODES.
"""


class YmkError(Exception):
    """Base class for all package errors."""


class UsageError(YmkError):
    """Mismatched groups, invalid degrees, or out-of-range parameters."""


class NearReducible(YmkError):
    """Estimated least eigenvalue of the covariant Laplacian is below the
    configured floor; downstream linear solves would be ill-posed."""


class NoContraction(YmkError):
    """Contraction iteration left its basin: the increment norms stopped
    decreasing, or the trace part of the curvature is too large to start."""


class SolverStagnation(YmkError):
    """Inner Krylov solve or eigenvalue iteration failed to reach its
    tolerance within the iteration budget."""


class NonConvergence(SolverStagnation):
    """Alternating minimization exhausted its outer iteration budget."""


class StepRejectionLimit(YmkError):
    """Gradient flow rejected the maximum number of backtracked steps."""


class UnresolvableCutoff(YmkError):
    """Cutoff inner plateau is below two lattice spacings."""
