"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ResourceCapError(RuntimeError):
    """Input exceeds a desk-scale policy cap."""
