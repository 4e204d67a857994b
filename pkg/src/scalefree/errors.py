"""Exception hierarchy shared by all subsystems."""


class ScaleFreeError(Exception):
    """Base class for every error raised by the package."""


class InvalidRotationError(ScaleFreeError, ValueError):
    pass


class InvalidScaleError(ScaleFreeError, ValueError):
    pass


class LevelOutOfRangeError(ScaleFreeError, IndexError):
    pass


class NoCommonAncestorError(ScaleFreeError):
    """Two nodes live in different world trees."""


class StructureError(ScaleFreeError):
    """An edit would break the tree (cycle, double parent, ...)."""


class LimitError(ScaleFreeError):
    """A configured structural limit (depth, child count) was exceeded."""


class CannotDetachError(StructureError):
    pass


class ComponentError(ScaleFreeError):
    pass


class DomainError(ScaleFreeError, ValueError):
    """Numerical input outside the domain of a formula."""


class NonConvergenceError(ScaleFreeError, ArithmeticError):
    """The corrected-anomaly iteration hit its cap.

    ``last_estimate`` and ``last_step`` carry the final E and D values.
    """

    def __init__(self, e, t_hat, last_estimate, last_step, iterations):
        self.e = e
        self.t_hat = t_hat
        self.last_estimate = last_estimate
        self.last_step = last_step
        self.iterations = iterations
        super().__init__(
            f"corrected anomaly did not converge for e={e!r}, t_hat={t_hat!r} "
            f"after {iterations} iterations (E={last_estimate!r}, D={last_step!r})"
        )


class RecipeError(ScaleFreeError):
    """No generation recipe is registered for a node type."""


class ProgramSyntaxError(ScaleFreeError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{where}")


class ProgramValidationError(ScaleFreeError):
    def __init__(self, message, index=None):
        self.index = index
        where = f"op {index}: " if index is not None else ""
        super().__init__(f"{where}{message}")


class OpError(ScaleFreeError):
    """An operation failed while a program was running.

    ``store`` is the group store as it was before the failing op.
    """

    def __init__(self, index, message, store=None):
        self.index = index
        self.store = store
        super().__init__(f"op {index}: {message}")


class DegenerateInsetError(ScaleFreeError, ValueError):
    pass


class TriangulationError(ScaleFreeError, ValueError):
    pass
