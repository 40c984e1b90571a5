"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration file or parameter set."""


class DomainError(ValueError):
    """Numeric input outside the function's domain (nonfinite, wrong shape, ...)."""


class SynthesisError(RuntimeError):
    """Controller synthesis failed (Riccati iteration did not converge, unstable result)."""


class LogError(ValueError):
    """Malformed run log. Carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ProtocolError(ValueError):
    """Malformed wire message."""
