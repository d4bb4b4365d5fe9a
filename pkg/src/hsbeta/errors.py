"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid argument or configuration value."""


class DomainError(ValueError):
    """Data outside the support of the model, e.g. responses on the boundary of (0, 1)."""


class StateError(RuntimeError):
    """An operation was attempted on an object in an unusable state."""


class NumericalError(RuntimeError):
    """A numerical routine failed (e.g. a factorization that could not be repaired).

    ``iteration`` and ``snapshot`` are filled in by the Gibbs sampler when the
    failure happens mid-chain.
    """

    def __init__(self, message, *, iteration=None, snapshot=None, diagnostics=None):
        super().__init__(message)
        self.iteration = iteration
        self.snapshot = snapshot
        self.diagnostics = diagnostics or {}
