"""Exception hierarchy shared by every module of the package."""


class QSchurError(Exception):
    """Base class for all library errors."""


class InputError(QSchurError, ValueError):
    """Invalid user input (bad shapes, points outside the ball, ...)."""


class VerificationError(QSchurError):
    """A computed object failed one of its numerical self-checks."""


class RealPoint(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class NotHermitian(InputError):
    pass


class OddMultiplicity(QSchurError):
    """Eigenvalues of a complex adjoint could not be paired."""


class NotPositive(InputError):
    pass


class NotPD(VerificationError):
    pass


class NotConvergent(VerificationError):
    pass


class NotIsometric(InputError):
    pass


class NonInvertibleConstantTerm(InputError):
    pass


class NotOrthogonal(InputError):
    pass


class ZeroPoint(InputError):
    pass


class NotInBall(InputError):
    pass


class PoleSphere(InputError):
    pass


class DuplicateSphere(InputError):
    pass


class OverlappingSpheres(DuplicateSphere):
    pass


class NodeOutsideBall(NotInBall):
    pass


class PlacementBreakdown(VerificationError):
    pass


class NotSignature(InputError):
    pass


class RadiusTooLarge(InputError):
    pass


class RelationNotSatisfied(VerificationError):
    pass


class NotCoisometry(InputError):
    pass
