"""Shared exception types."""


class CycletreeError(Exception):
    """Base class for errors raised by this package."""


class BudgetExceededError(CycletreeError):
    """An operation would exceed the configured point or work budget."""

    def __init__(self, required: int, budget: int, what: str = "points"):
        self.required = required
        self.budget = budget
        super().__init__(f"budget exceeded: {required} {what} required, budget is {budget}")


class NotACycleError(CycletreeError):
    """The residues handed in do not form a cycle of the stated length."""


class BadReductionError(CycletreeError):
    """A rational map was evaluated where its denominator vanishes mod p."""

    def __init__(self, x: int, p: int):
        self.x = x
        self.p = p
        super().__init__(f"bad reduction: denominator vanishes mod {p} at x = {x}")


class NotPeriodicError(CycletreeError):
    """A point claimed to be periodic is not, or the period is wrong."""


class SeparationError(CycletreeError):
    """Separation analysis is not applicable to the given data."""
