"""Exception types shared across the package."""


class InvalidSpecError(ValueError):
    """A signal/grid/config description violates its invariants."""


class UnstableModelError(ValueError):
    """Noise recursion coefficient reaches modulus >= 1 somewhere on (0, 1]."""


class InputError(ValueError):
    """Malformed user input (CSV files, config files, CLI arguments)."""


class IterationCapError(RuntimeError):
    """An iterative detection loop hit its hard iteration cap."""


class BudgetExceededError(RuntimeError):
    """Estimated experiment work exceeds the configured compute budget."""

    def __init__(self, estimated, budget, message=None):
        self.estimated = float(estimated)
        self.budget = float(budget)
        super().__init__(
            message
            or f"estimated work {estimated:.3g} block-multiply units exceeds "
            f"budget {budget:.3g}; rerun with --force or a larger --budget"
        )
