"""Exception hierarchy.

Domain errors (bad dynamics, exhausted budgets/precision) derive from
:class:`DomainError`; configuration and input problems derive from
:class:`ConfigInvalid`.  The CLI maps DomainError to exit status 2 and
ConfigInvalid to exit status 1.
"""


class GabdynError(Exception):
    """Base class for all package errors."""


class ConfigInvalid(GabdynError):
    """Malformed configuration, map spec, or CLI input."""


class BetaOutOfRange(ConfigInvalid):
    """beta must be > 1."""


class AlphaOutOfRange(ConfigInvalid):
    """alpha must lie in [0, 1)."""


class SignLengthMismatch(ConfigInvalid):
    """The sign vector must have one entry per branch."""


class DomainError(GabdynError):
    """A computation failed for dynamical (not configuration) reasons."""


class PrecisionExhausted(DomainError):
    """Ball arithmetic could not separate an orbit point from a critical
    point, even after escalating precision to the cap."""


class AmbiguousCoding(DomainError):
    """The orbit hits a critical point exactly; the point has no itinerary."""


class DepthExceeded(DomainError):
    """A query needs kneading/cut-time data beyond the computed depth."""


class InsufficientKneadingDepth(DomainError):
    """Kneading data is too shallow for the requested diagram truncation."""


class NotAPath(DomainError):
    """A vertex word contains a consecutive pair that is not an arrow."""


class NotAdmissible(DomainError):
    """A symbol word is not realized by any point of the subshift."""


class CriticalCollision(NotAdmissible):
    """A candidate periodic orbit passes through a critical point."""


class BudgetExceeded(DomainError):
    """An enumeration or search hit its configured budget."""


class NoWitnessInBudget(DomainError):
    """No shadowing witness was found within the search budget."""

    def __init__(self, message, best_slack=None):
        super().__init__(message)
        self.best_slack = best_slack


class NonConvergence(DomainError):
    """Power iteration failed to reach the residual tolerance."""


class NoComponentFound(DomainError):
    """The truncated diagram has no suitable irreducible component."""


class AllZeroCounts(DomainError):
    """Monte Carlo windows saw no hits at any sample size."""


class OutputUnwritable(GabdynError):
    """An output path could not be written atomically."""
