"""Exception types raised across the package."""


class InputError(ValueError):
    """Invalid argument or malformed data structure."""


class PropensityError(InputError):
    """Logged propensity outside (0, 1]."""


class SingularSystemError(InputError):
    """Unregularized normal equations are singular."""


class DegenerateDataError(InputError):
    """Data carries no variation where some is required."""


class ParseError(InputError):
    """A text input could not be parsed.

    Carries the 1-based line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
