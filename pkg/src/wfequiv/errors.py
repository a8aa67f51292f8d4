"""Exception hierarchy shared by all modules."""


class WindFarmError(Exception):
    """Base class for every error raised by the package."""


class InputDomainError(WindFarmError, ValueError):
    pass


class SingularVoltageError(WindFarmError, ValueError):
    pass


class TopologyError(WindFarmError, ValueError):
    pass


class NonConvergenceError(WindFarmError, RuntimeError):
    """Raised when a fixed-point iteration exhausts its budget.

    ``residual`` holds the last update norm, ``trace`` any per-iteration
    history the caller recorded.
    """

    def __init__(self, message, residual=None, trace=None, step=None):
        super().__init__(message)
        self.residual = residual
        self.trace = list(trace) if trace is not None else []
        self.step = step


class InfeasibleEquivalentError(WindFarmError, ValueError):
    """Negative discriminant while sizing an equivalent unit or line."""


class ClassificationInconsistencyError(WindFarmError, ValueError):
    pass


class SchemaError(WindFarmError, ValueError):
    pass
