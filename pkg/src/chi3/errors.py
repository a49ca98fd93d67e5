"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the domain where a formula is defined."""


class StabilityError(ValueError):
    """Drift is not stable, so no stationary statistics exist."""
