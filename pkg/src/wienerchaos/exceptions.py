"""Error types shared across the package."""


class WienerChaosError(Exception):
    """Base class for all package errors."""


class InvalidKernelError(WienerChaosError):
    """A kernel file or entry table violates the storage format."""


class ValidationError(WienerChaosError):
    """An argument violates an operation's contract (orders, spaces, ranges)."""


class ResourceLimitError(WienerChaosError):
    """An input exceeds a documented size guard."""


class DegenerateInputError(WienerChaosError):
    """An input is structurally valid but degenerate for the requested operation."""
