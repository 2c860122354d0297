class InputError(ValueError):
    """Malformed or out-of-contract input."""


class GuardExceeded(InputError):
    """Instance exceeds the size guard of an exhaustive solver."""


class VerificationError(AssertionError):
    """A machine check of a construction failed."""
