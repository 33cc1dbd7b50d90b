"""Exception types raised across the package."""


class BetheError(Exception):
    """Base class for all package errors."""


class SingularEnergy(BetheError):
    """A root sits on the energy pole at +-is."""


class NonConvergent(BetheError):
    """An extrapolation sequence failed to stabilise."""


class PoleHit(BetheError):
    """Evaluation point collides with a root or with -is."""


class RepeatedRoot(BetheError):
    """An operation that needs pairwise distinct roots met a repeated one."""


class PathCountOverflow(BetheError):
    """The start system has more paths than the configured budget."""


class AmbiguousCluster(BetheError):
    """Two root clusters are too close to separate reliably."""


class PoleInProduct(BetheError):
    """A product over remaining roots hit a pole (usually mis-clustering)."""


class DerivativeOverflow(BetheError):
    """A derivative condition was evaluated too close to a pole."""


class ZeroDenominator(BetheError):
    """The regularisation recursion divides by zero."""


class OutOfRange(BetheError):
    """Spin or magnon label outside the allowed range."""


class DimensionCap(BetheError):
    """Hilbert space dimension exceeds the configured cap."""


class NormalizationPole(BetheError):
    """R-matrix evaluated at its normalisation pole lambda = -is."""


class ZeroVector(BetheError):
    """A residual was requested for the zero vector."""


class PatternUnknown(BetheError):
    """Repeated-root layout with no known regularisation."""


class VersionMismatch(BetheError):
    """Archive schema version differs or the file is corrupt."""
