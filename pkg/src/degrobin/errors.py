"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class NonexistenceError(RuntimeError):
    """No bounded radial solution exists for the requested data."""


class NonConvergenceError(RuntimeError):
    """Picard iteration exhausted its step budget.

    ``report`` carries the partial :class:`~degrobin.fd_solver.SolveReport`
    including the update history and a diagnosis string.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
