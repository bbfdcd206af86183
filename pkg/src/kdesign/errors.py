"""Error types shared across the package."""


class ValidationError(ValueError):
    """Bad user input: out-of-range sizes, malformed configs, inconsistent shapes."""


class InternalConsistencyError(RuntimeError):
    """A quantity the math guarantees (integer exponent, group closure, ...) failed
    to hold numerically.  Never raised for bad input; indicates a bug or a broken
    invariant and maps to CLI exit code 3."""
