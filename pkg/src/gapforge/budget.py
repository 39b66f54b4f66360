"""Enumeration budgets shared by all brute-force operations."""

from __future__ import annotations

import os

DEFAULT_BUDGET = 10_000_000

ENV_VAR = "GAPFORGE_BUDGET"


class BudgetError(Exception):
    """Raised when an exact enumeration would exceed its budget.

    Carries the number of candidates the enumeration would have to visit,
    so callers can report the budget a rerun would need.
    """

    def __init__(self, required, budget, what="enumeration"):
        self.required = required
        self.budget = budget
        self.what = what
        super().__init__(f"{what} needs {required} candidates, budget is {budget}")


def effective(budget=None):
    """Resolve a budget argument: explicit value wins, then GAPFORGE_BUDGET, then the default."""
    if budget is not None:
        return int(budget)
    env = os.environ.get(ENV_VAR)
    if env is not None:
        return int(env)
    return DEFAULT_BUDGET


def check(required, budget=None, what="enumeration"):
    """Return the effective budget after verifying `required` fits in it."""
    limit = effective(budget)
    if required > limit:
        raise BudgetError(required, limit, what)
    return limit
