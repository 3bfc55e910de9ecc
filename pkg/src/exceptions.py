"""
Error hierarchy

Every error carries the process exit code the CLI maps it to.
"""

from typing import Optional


class ApproximationError(Exception):
    """Base class for errors raised by the library"""

    exit_code = 1


class PrecisionExhausted(ApproximationError):
    """A query needed coefficients at or below a series' precision floor"""

    exit_code = 4

    def __init__(self, message: str, required_floor=None):
        super().__init__(message)
        self.required_floor = required_floor


class BudgetExceeded(ApproximationError):
    """An enumeration would exceed its configured budget"""

    exit_code = 4

    def __init__(self, message: str, budget: int = 0, requested: int = 0):
        super().__init__(message)
        self.budget = budget
        self.requested = requested


class UnsatisfiablePredicate(ApproximationError):
    """A schedule predicate cannot hold for the requested parameters"""

    exit_code = 3

    def __init__(self, predicate: str, epoch: Optional[int] = None, detail: str = ""):
        where = f" at epoch {epoch}" if epoch is not None else ""
        super().__init__(f"predicate '{predicate}' unsatisfiable{where}{': ' + detail if detail else ''}")
        self.predicate = predicate
        self.epoch = epoch
        self.detail = detail


class UncertifiableCube(ApproximationError):
    """Neither the uniform lower bound nor its failure could be certified on a cube"""

    exit_code = 4

    def __init__(self, level: int, prefix: str = ""):
        super().__init__(f"cube at level {level} could not be certified ({prefix})")
        self.level = level
        self.prefix = prefix


class VerificationFailure(ApproximationError):
    """A verified inequality did not hold"""

    exit_code = 2

    def __init__(self, inequality: str, epoch: Optional[int] = None, level: Optional[int] = None, detail: str = ""):
        parts = [f"'{inequality}' failed"]
        if epoch is not None:
            parts.append(f"epoch {epoch}")
        if level is not None:
            parts.append(f"level {level}")
        message = ", ".join(parts)
        if detail:
            message += f": {detail}"
        super().__init__(message)
        self.inequality = inequality
        self.epoch = epoch
        self.level = level
        self.detail = detail


class SingularBasis(ApproximationError):
    """A lattice basis turned out to be singular"""
