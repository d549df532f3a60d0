"""Shared exception types."""


class CapacityError(RuntimeError):
    """An enumeration would exceed the configured orbit budget."""

    def __init__(self, requested, budget):
        self.requested = requested
        self.budget = budget
        super().__init__(
            f"orbit enumeration would create {requested} entries, "
            f"exceeding the budget of {budget}"
        )


class GaugeError(ValueError):
    """A block-basis operation was called in the wrong gauge."""


class BasisMismatchError(ValueError):
    """Two coefficient vectors do not share a basis."""


class SingularGramError(RuntimeError):
    """A Gram matrix is numerically singular; the construction is unreliable."""
