"""Exception hierarchy for the gecmv package.

ValidationError subclasses signal bad inputs (CLI exit code 2);
NumericalError subclasses signal runtime numerical failures (CLI exit code 3).
"""


class GecmvError(Exception):
    pass


class ValidationError(GecmvError):
    pass


class NumericalError(GecmvError):
    pass


# -- model -------------------------------------------------------------------

class DegenerateCoupling(ValidationError):
    pass


class NoMobilityEdge(ValidationError):
    pass


class RationalInput(ValidationError):
    pass


# -- operators ---------------------------------------------------------------

class WindowTooSmall(ValidationError):
    pass


class MisalignedWindow(ValidationError):
    pass


class NonUnimodularInput(ValidationError):
    pass


class NormConditionViolated(ValidationError):
    pass


class AsymmetricWindow(ValidationError):
    pass


class RecoveryIllConditioned(NumericalError):
    pass


# -- cocycle / lyapunov ------------------------------------------------------

class SingularRho(NumericalError):
    pass


class StripExceeded(ValidationError):
    pass


# -- spectral ----------------------------------------------------------------

class RootCountMismatch(NumericalError):
    pass


class NearEigenvalue(NumericalError):
    pass


class NotAnEigenvalue(NumericalError):
    pass


class ShootingUnstable(NumericalError):
    pass


# -- analysis ----------------------------------------------------------------

class PeakTooCloseToBoundary(ValidationError):
    pass


class FloorDominated(NumericalError):
    pass


class DuplicateNodes(ValidationError):
    pass
