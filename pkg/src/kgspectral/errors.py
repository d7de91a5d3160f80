"""Exception hierarchy shared by the solver modules."""


class ContractError(ValueError):
    """An argument violates a documented precondition (shape, range, finiteness)."""


class AliasingError(ContractError):
    """Too few collocation points for the requested transform or quadrature."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a special function."""


class UnsupportedDiagnosticError(ValueError):
    """The requested diagnostic is undefined for this problem."""


class NonConvergenceError(RuntimeError):
    """The fixed-point iteration of an implicit step did not converge.

    ``step_index`` is filled in by the time loop when the failure happens
    inside :func:`kgspectral.stepper.evolve`.
    """

    def __init__(self, message, residual, iterations, step_index=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.step_index = step_index

    def __str__(self):
        base = super().__str__()
        if self.step_index is not None:
            return f"{base} (step {self.step_index})"
        return base


class DivergenceError(NonConvergenceError):
    """The fixed-point iterates became non-finite."""
