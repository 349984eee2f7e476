"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class SingularMass(ToolkitError):
    """Mass matrix M(q) is numerically singular (condition estimate > 1e12)."""


class SingularMassD(SingularMass):
    """Desired mass matrix M_d(q) is numerically singular."""


class RankDeficientG(ToolkitError):
    """Input coupling G(q) lost column rank (smallest singular value < 1e-9)."""


class EmptyWorkspace(ToolkitError):
    """A sampling operation was asked to run over an empty workspace."""


class NonpositiveEigenvalue(ToolkitError):
    """An eigenvalue that must be positive for a bound formula is <= 0."""
