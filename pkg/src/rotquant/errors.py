"""Exception hierarchy shared by the library and the CLI.

Each class carries the process exit code the command-line front end maps
it to, so the mapping lives in exactly one place.
"""


class RotquantError(Exception):
    exit_code = 1


class ArgumentError(RotquantError):
    """Invalid argument, flag, or configuration value."""

    exit_code = 2


class DataError(RotquantError):
    """Bad payload: non-finite values, malformed or missing files."""

    exit_code = 3


class ShapeError(DataError):
    """Array shape incompatible with the requested operation."""

    exit_code = 3


class UnsupportedOrderError(RotquantError):
    """No Hadamard construction available for the requested order."""

    exit_code = 4


class ConstructionError(RotquantError):
    """A freshly built matrix failed its orthogonality validation."""

    exit_code = 4


class IntegrityError(RotquantError):
    """Stored artifact does not match the configuration that claims it."""

    exit_code = 5
