"""Exception types shared across the toolkit."""


class LensError(Exception):
    """Base class for all toolkit errors."""


class NonConvergence(LensError):
    """Root iteration failed to meet tolerance within the iteration budget.

    Signals ill-conditioning; callers may retry with a perturbed
    initialization seed.
    """

    def __init__(self, iterations, worst_residual=None):
        self.iterations = iterations
        self.worst_residual = worst_residual
        msg = f"no convergence after {iterations} iterations"
        if worst_residual is not None:
            msg += f" (worst residual {worst_residual:.3e})"
        super().__init__(msg)


class SingularJacobian(LensError):
    """Jacobian determinant fell below the singular guard.

    Indicates a solution on or near the critical set.
    """


class DegenerateSystem(LensError):
    """Resultant vanished identically: the two polynomials share a factor."""


class InvalidParams(LensError):
    """Control parameters do not belong to the requested model."""


class DegenerateParameters(LensError):
    """An elimination guard failed; the alternate branch or the resultant
    fallback must be used."""


class IncompleteSolve(LensError):
    """Solver could not isolate the full Bezout count of solutions."""

    def __init__(self, count, solution_set=None):
        self.count = count
        self.solution_set = solution_set
        super().__init__(f"isolated only {count} solutions")


class CausticSource(LensError):
    """Source is too close to a caustic; magnifications are unreliable."""

    def __init__(self, min_abs_det, solution_set=None):
        self.min_abs_det = min_abs_det
        self.solution_set = solution_set
        super().__init__(f"min |det J| = {min_abs_det:.3e} below caustic guard")


class Incomplete(LensError):
    """Operation requires a complete solution set."""


class UnequalDegrees(LensError):
    """Infinity-side analysis is defined only for equal-degree maps."""

    def __init__(self, message, indeterminacy=None):
        self.indeterminacy = indeterminacy or []
        super().__init__(message)


class DegenerateMultiplier(LensError):
    """A fixed-point multiplier equals 1; the index 1/(1-lambda) is undefined."""


class EmptyCriticalSet(LensError):
    """The model has no real critical curve for these parameters."""
