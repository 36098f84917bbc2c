"""Exception hierarchy shared by all modules."""


class Rank1Error(Exception):
    """Base class for errors raised by rank1walk."""


class IncompatibleDimension(Rank1Error, ValueError):
    pass


class SeriesDiverged(Rank1Error, ValueError):
    pass


class NoConvergence(Rank1Error, RuntimeError):
    pass


class IntegratorFailure(Rank1Error, RuntimeError):
    pass


class QuadratureUnderresolved(Rank1Error, RuntimeError):
    pass


class GammaOverflow(Rank1Error, OverflowError):
    pass


class TailNotNegligible(Rank1Error, ValueError):
    """The spectral integrand is still significant at the truncation point."""


class CalibrationSingular(Rank1Error, RuntimeError):
    pass


class GridMismatch(Rank1Error, ValueError):
    pass


class SupportViolation(Rank1Error, ValueError):
    pass


class DegenerateNormalizer(Rank1Error, ValueError):
    pass


class FormViolated(Rank1Error, ValueError):
    """A group element drifted off the indefinite-form-preserving group."""


class InsufficientData(Rank1Error, ValueError):
    pass
