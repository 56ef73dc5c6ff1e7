class NumericalError(RuntimeError):
    """Base class for numerical failures (singular systems, non-convergence)."""


class SingularDesignError(NumericalError):
    pass


class DegenerateTargetError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message: str, **state):
        self.state = state
        if state:
            message += " (" + ", ".join(f"{k}={v!r}" for k, v in state.items()) + ")"
        super().__init__(message)
