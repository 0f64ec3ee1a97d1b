"""Exception types shared by every module (and the compiled core)."""


class HetcastError(Exception):
    """Base class for library errors."""


class UsageError(HetcastError, ValueError):
    """An argument is outside the documented domain."""


class UnsupportedDemand(UsageError):
    """A demand of z = 1 cannot be met by the asymptotic LT analysis."""


class DeadChannel(UsageError):
    """Erasure rate of 1: nothing ever arrives."""


class CorruptStreamError(HetcastError):
    """A redundant equation disagrees with what was already decoded."""


class SolverError(HetcastError):
    """The LP solver met an infeasible or unbounded problem."""
