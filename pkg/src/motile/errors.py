"""Exception hierarchy shared by all motile modules."""


class MotileError(Exception):
    """Base class for every error raised by this package."""


# geometry
class TooFewPoints(MotileError, ValueError):
    pass


class DegenerateSegment(MotileError, ValueError):
    pass


class NonFinite(MotileError, ValueError):
    pass


class ZeroTangent(MotileError, ArithmeticError):
    pass


class SelfIntersecting(MotileError, ValueError):
    pass


# kernel
class SingularSystem(MotileError, ArithmeticError):
    pass


class DegenerateKernel(MotileError, ValueError):
    pass


# solvers
class NoConvergence(MotileError, RuntimeError):
    pass


class ConventionError(MotileError, RuntimeError):
    """The volume feedback made the area discrepancy worse."""


class BlowUp(MotileError, RuntimeError):
    pass


class ChartExit(MotileError, RuntimeError):
    """Graph state left the tubular neighbourhood ``|u| <= delta0``."""


# traveling waves
class StepUnderflow(MotileError, RuntimeError):
    pass


class NoBlowUp(MotileError, RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# experiments
class NotSteady(MotileError, RuntimeError):
    pass


# configuration
class ParseError(MotileError, ValueError):
    pass


class ValidationError(MotileError, ValueError):
    pass
