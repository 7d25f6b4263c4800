class DivpathError(Exception):
    """Base class for errors raised by this package."""


class SchemaError(DivpathError, ValueError):
    """Input file does not carry the expected columns."""


class FilterError(DivpathError, ValueError):
    """Cleaning filters removed every country or every product."""


class DegenerateMatrixError(DivpathError, ValueError):
    """The country-product matrix cannot support a complexity ranking."""


class ConvergenceError(DivpathError, RuntimeError):
    pass


class InsufficientDataError(DivpathError, ValueError):
    """Too few years, observations or entities for the requested computation."""


class RankDeficientError(DivpathError, ValueError):
    """Design matrix does not have full column rank."""


class IntegrityError(DivpathError):
    """An artifact on disk does not match the hash recorded in the manifest."""


class DegenerateOptionSetWarning(UserWarning):
    """Option-set moments have zero spread; relative values were set to 0."""


class UndefinedCorrelationWarning(UserWarning):
    pass
