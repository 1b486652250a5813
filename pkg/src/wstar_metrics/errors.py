"""Exception hierarchy shared by every module of the package."""


class WStarError(ValueError):
    """Base class for validation failures raised by this package."""


class SignatureMismatch(WStarError):
    pass


class ShapeMismatch(WStarError):
    pass


class NotHermitian(WStarError):
    pass


class NotFaithful(WStarError):
    pass


class NotNormalized(WStarError):
    pass


class NotTangent(WStarError):
    pass


class NotTangentCoordinate(WStarError):
    pass


class SingularFunction(WStarError):
    pass


class UnvalidatedFunction(WStarError):
    pass


class NotTracePreserving(WStarError):
    def __init__(self, message, deviation=None):
        super().__init__(message)
        self.deviation = deviation


class NotFaithfulImage(WStarError):
    pass


class NotStochastic(WStarError):
    pass


class InvalidPartition(WStarError):
    pass


class InvalidWeights(WStarError):
    pass


class NotUnitary(WStarError):
    pass


class DegenerateDraw(WStarError):
    pass
