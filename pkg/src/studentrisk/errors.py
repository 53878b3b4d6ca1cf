"""Exception types shared across the package."""


class StudentRiskError(Exception):
    """Base class for all errors raised by this package."""


class DataFormatError(StudentRiskError):
    """A malformed input file. Carries the line number and field when known."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field '{field}'")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class CohortError(StudentRiskError):
    """Cross-file validation failure while assembling a cohort."""


class DegenerateGroupError(StudentRiskError):
    """An assignment group with a zero cohort-mean submission count."""


class PatternSyntaxError(StudentRiskError):
    """A pattern string that does not follow the wildcard grammar."""

    def __init__(self, message: str, position: int):
        self.position = position
        super().__init__(f"{message} (position {position})")


class MiningError(StudentRiskError):
    """Invalid input to the pattern miner (empty class, mixed kinds...)."""


class OracleBoundsError(StudentRiskError):
    """Brute-force oracle invoked outside its tractability bounds."""


class GenerationError(StudentRiskError):
    """Synthetic cohort config that cannot be realized as submission logs."""


class TrainingError(StudentRiskError):
    """Model training failed (non-finite loss, degenerate classes...)."""


class ConfigError(StudentRiskError):
    """Bad key, value, or combination in a configuration file."""
