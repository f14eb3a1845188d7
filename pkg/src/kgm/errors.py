"""Exception types shared across the solver modules."""


class KGMError(Exception):
    """Base class for all package-specific errors."""


class NonFiniteInput(KGMError):
    """An input field contains NaN or infinite samples."""


class BoundsViolated(KGMError):
    """The electrostatic potential left the interval [0, omega/e].

    The discrete operator is an M-matrix, so this can only happen through a
    discretization or assembly bug; it is never clamped silently.
    """


class ZeroField(KGMError):
    """An operation that needs u != 0 received the zero field."""


class AlphaOutOfRange(KGMError):
    """A certificate weight alpha lies outside the admissible interval."""


class NoAlpha(KGMError):
    """No admissible certificate weight exists for the given (p, m, omega)."""


class CollapseToZero(KGMError):
    """A descent iterate lost all mass; the run is heading to the trivial zero
    solution instead of a nontrivial critical point."""


class ProjectionFailed(KGMError):
    """The fibering map t -> I(t u) has no usable positive critical point."""


class BisectionStalled(KGMError):
    """Shooting bisection could not classify an initial height."""


class UniformBoundViolated(KGMError):
    """Gradient norms along a continuation exceeded the uniform-bound monitor."""


class MassLeak(KGMError):
    """int f'(u) u dropped to zero along the continuation: the iterates are
    collapsing to the trivial solution."""


class BoundednessMonitorTripped(KGMError):
    """The gradient seminorm grew beyond the allowed factor along a trace."""


class ConfigError(KGMError):
    """A run configuration violates a precondition; the message names the
    offending field."""
