"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class GPSSelectError(Exception):
    exit_code = 3


class InputError(GPSSelectError, ValueError):
    """Bad user input: files, columns, flags, parameter ranges."""

    exit_code = 1


class NumericalError(GPSSelectError, ArithmeticError):
    """The computation cannot proceed on this data (blow-up, rank loss, degenerate step size)."""

    exit_code = 2


class DegenerateDataError(NumericalError):
    pass


class InternalError(GPSSelectError, RuntimeError):
    exit_code = 3
