"""Exception hierarchy shared by every module.

The CLI maps ``DomainError`` to a usage failure (exit 2) and
``ResourceError`` (including ``BudgetExceeded``) to exit 3.
"""

from __future__ import annotations


class DensimeanError(Exception):
    pass


class DomainError(DensimeanError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SpecViolation(DensimeanError, ValueError):
    """A density-like function broke its contract at a specific argument."""

    def __init__(self, label: str, d: int, reason: str):
        super().__init__(f"{label}: g({d}) {reason}")
        self.d = d


class ContractError(DensimeanError, ValueError):
    """A hypothesis required by an operation is missing."""


class ResourceError(DensimeanError, RuntimeError):
    """A configured cap (divisors, enumeration, scan size) would be exceeded."""


class BudgetExceeded(ResourceError):
    """Factoring gave up after spending its iteration budget."""

    def __init__(self, cofactor: int, budget: int):
        super().__init__(
            f"factoring budget of {budget} iterations exhausted; "
            f"unfactored cofactor {cofactor}"
        )
        self.cofactor = cofactor
        self.budget = budget
