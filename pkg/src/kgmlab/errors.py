"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, solver failures
(OperatorNotInvertible, NewtonDiverged, NoConvergence, NoNegativeEndpoint)
-> 3, HypothesisRefused -> 4.
"""


class KgmError(Exception):
    """Base class for all package errors."""


class DomainError(KgmError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class GridMismatchError(KgmError, ValueError):
    """Fields defined on different grids were combined."""


class OperatorNotInvertibleError(KgmError, RuntimeError):
    """The tridiagonal factorization hit a non-positive pivot."""


class NoNegativeEndpointError(KgmError, RuntimeError):
    """Scaling the seed never produced a negative-energy endpoint."""


class NewtonDivergedError(KgmError, RuntimeError):
    """Damped Newton rejected 20 consecutive step reductions."""


class NoConvergenceError(KgmError, RuntimeError):
    """The mountain-pass search did not produce an accepted solution."""

    def __init__(self, message, level_history=None):
        super().__init__(message)
        self.level_history = list(level_history) if level_history else []


class HypothesisRefusedError(KgmError, ValueError):
    """Parameters violate the standing hypotheses (|omega| >= m0)."""


class ConfigError(KgmError, ValueError):
    """Experiment configuration could not be parsed or validated."""


class UnderResolvedGridWarning(UserWarning):
    """Fewer than 8 grid nodes resolve the requested concentration scale."""
