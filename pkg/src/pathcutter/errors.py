"""Exception types shared across the package."""


class PathcutterError(Exception):
    """Base class for all package errors."""


class GraphValidationError(PathcutterError, ValueError):
    """A graph document or graph operation input failed validation."""


class EnumerationOverflow(PathcutterError, RuntimeError):
    """Path enumeration exceeded the configured limit.

    Carries the number of paths found before giving up so callers can
    report how far enumeration got.
    """

    def __init__(self, partial_count: int, limit: int):
        self.partial_count = partial_count
        self.limit = limit
        super().__init__(
            f"path enumeration exceeded limit={limit} "
            f"(found {partial_count} paths before stopping); "
            f"lower hop_cap or raise the limit"
        )


class StateSpaceOverflow(PathcutterError, RuntimeError):
    """An exact solve or exhaustive walk touched more states than allowed."""


class RealizationError(PathcutterError, ValueError):
    """A realization could not resolve an admin choice."""


class ProtocolViolation(PathcutterError, RuntimeError):
    """A policy or caller broke the proposal protocol."""


class GenerationError(PathcutterError, RuntimeError):
    """The graph generator could not satisfy its constraints."""
