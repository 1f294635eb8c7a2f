"""Exception and warning types raised across the package."""


class IOInfraError(Exception):
    """Base class for all package errors."""


# -- data model / ingest ---------------------------------------------------

class TaxonomyMismatchError(IOInfraError):
    pass


class TaxonomyValidationError(IOInfraError):
    pass


class EmptyCategoryError(IOInfraError):
    pass


class UnbalancedTableError(IOInfraError):
    pass


class ParseError(IOInfraError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateCellError(ParseError):
    pass


class SchemaError(IOInfraError):
    pass


class ChecksumError(IOInfraError):
    pass


class EmptySeriesError(IOInfraError):
    pass


# -- numerics ---------------------------------------------------------------

class InfeasibleTargetsError(IOInfraError):
    pass


class StructuralZeroError(IOInfraError):
    pass


class ConvergenceError(IOInfraError):
    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class DegenerateSectorError(IOInfraError):
    pass


class SingularEconomyError(IOInfraError):
    pass


class ShapeError(IOInfraError, ValueError):
    pass


class CollinearDesignError(IOInfraError):
    def __init__(self, message, column=None):
        self.column = column
        super().__init__(message)


class ConstantColumnError(CollinearDesignError):
    pass


class InsufficientObservationsError(IOInfraError):
    def __init__(self, message, m=None, p=None):
        self.m = m
        self.p = p
        super().__init__(message)


class InvalidCorrelationError(IOInfraError):
    pass


class EmptyRotationError(IOInfraError):
    pass


class IncompatibleMapsError(IOInfraError):
    pass


class ModelInputError(IOInfraError, ValueError):
    pass


class ReportIOError(IOInfraError, OSError):
    pass


# -- warnings ---------------------------------------------------------------

class IOInfraWarning(UserWarning):
    pass


class DegenerateResponseWarning(IOInfraWarning):
    pass


class DegenerateRetentionWarning(IOInfraWarning):
    pass


class NoNewRepresentativeWarning(IOInfraWarning):
    pass


class DegreesOfFreedomWarning(IOInfraWarning):
    pass
