"""Exception hierarchy shared by all modules."""


class QuadBTError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(QuadBTError, ValueError):
    """Malformed arguments (shapes, ranges, specs)."""


class DimensionMismatch(InvalidInput):
    pass


class InvalidRange(InvalidInput):
    pass


class OddN(InvalidInput):
    pass


class InvalidSpec(InvalidInput):
    pass


class NonSquareSystem(InvalidInput):
    pass


class PreconditionViolated(InvalidInput):
    pass


class NodeCollision(InvalidInput):
    pass


class NotConjugateClosed(InvalidInput):
    pass


class NumericalFailure(QuadBTError, ArithmeticError):
    """A numerical method could not produce a trustworthy answer."""


class SingularResolvent(NumericalFailure):
    pass


class SingularFeedthrough(NumericalFailure):
    pass


class SingularD(SingularFeedthrough):
    pass


class ImaginaryAxisEigenvalue(NumericalFailure):
    pass


class UnstableSystem(NumericalFailure):
    pass


class UnstableA(UnstableSystem):
    pass


class IllConditionedSeparation(NumericalFailure):
    pass


class NoStabilizingSolution(NumericalFailure):
    pass


class IndefiniteR(NumericalFailure):
    pass


class NotPositiveReal(NumericalFailure):
    pass


class NotBoundedReal(NumericalFailure):
    pass


class ResidualImaginary(NumericalFailure):
    pass


class DegenerateGap(NumericalFailure):
    pass


class RankDeficient(NumericalFailure):
    pass
