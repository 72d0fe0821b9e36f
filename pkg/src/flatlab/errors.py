"""Exception and warning types shared across the package."""


class FlatlabError(Exception):
    """Base class for package errors."""


class DomainError(FlatlabError, ValueError):
    """Argument outside the domain of an operation."""


class KindError(FlatlabError, TypeError):
    """Operation not defined for this kind of model domain."""


class SymmetryError(FlatlabError, ValueError):
    """Point is not in the symmetric normal form required."""


class NormalizationError(FlatlabError, ValueError):
    """Vector expected to be a unit vector is not."""


class ConvergenceError(FlatlabError, RuntimeError):
    """An iterative solve failed to bracket or converge."""


class RootBracketError(ConvergenceError):
    """No sign change found for a one-dimensional root solve."""


class PoleError(FlatlabError, ZeroDivisionError):
    """Evaluation at a pole of a rational map."""


class BranchError(FlatlabError, ValueError):
    """Argument outside the region where a branch is defined."""


class RegimeError(FlatlabError, ArithmeticError):
    """An asymptotic inequality that a bound relies on is violated."""


class CertificationError(FlatlabError, RuntimeError):
    """A bracket was requested for a row whose inclusions were not certified."""


class SingularMetric(FlatlabError, ArithmeticError):
    """The Bergman metric matrix is not numerically positive definite."""


class RankError(FlatlabError, ArithmeticError):
    """Jet constraints are dependent on the available basis."""


class IllConditioned(FlatlabError, ArithmeticError):
    """Mode space factorization lost too much rank."""


class ConfigError(FlatlabError, ValueError):
    """Invalid run configuration."""


class TruncationWarning(UserWarning):
    """A truncated series or basis may not have converged."""


class ResolutionWarning(UserWarning):
    """Evaluation point outside the region the numerical basis resolves."""
