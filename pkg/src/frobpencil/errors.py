"""Exception hierarchy.

Numerical failures that the CLI turns into failed checks all derive from
:class:`FrobPencilError`; configuration problems use :class:`ConfigError`.
"""


class FrobPencilError(Exception):
    """Base class for every error raised by the library."""


class ConfigError(FrobPencilError, ValueError):
    pass


# numeric core
class ZeroPolynomial(FrobPencilError, ValueError):
    pass


class NonConvergence(FrobPencilError, RuntimeError):
    pass


class InsufficientTruncation(FrobPencilError, ValueError):
    pass


class NotMonic(FrobPencilError, ValueError):
    pass


class OrderTooSmall(FrobPencilError, ValueError):
    pass


class IncompatibleExpansionPoints(FrobPencilError, ValueError):
    pass


class ValuationError(FrobPencilError, ValueError):
    pass


# elliptic functions
class LowerHalfPlane(FrobPencilError, ValueError):
    pass


class PoleAtLatticePoint(FrobPencilError, ValueError):
    pass


class PoleOnPath(FrobPencilError, ValueError):
    pass


class QuadratureFailure(FrobPencilError, RuntimeError):
    pass


# abelian integral model
class InvalidModel(FrobPencilError, ValueError):
    pass


class NonSemisimplePoint(FrobPencilError):
    """Some zero of the differential has multiplicity two or more."""


class RootCountMismatch(FrobPencilError, RuntimeError):
    pass


class LeftSemisimpleLocus(NonSemisimplePoint):
    pass


# frobenius engine
class KOutOfRange(FrobPencilError, ValueError):
    pass


class NotPrimitive(FrobPencilError):
    pass


class SingularFrame(FrobPencilError, ArithmeticError):
    pass


# flat structure
class FlatnessFailure(FrobPencilError):
    pass


class NonIntegrableFrame(FrobPencilError):
    def __init__(self, message, defect=None):
        super().__init__(message)
        self.defect = defect


class PotentialityFailure(FrobPencilError):
    pass


# verification harness
class FitFailure(FrobPencilError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SolveFailure(FrobPencilError):
    pass
