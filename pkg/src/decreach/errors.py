"""Exception hierarchy shared across the solver suite."""


class DecreachError(Exception):
    """Base class for every error raised by this package."""


class GameFormatError(DecreachError):
    """A game or inference file could not be parsed."""


class GameValidationError(DecreachError):
    """A structurally broken game was used where a valid one is required."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__(
            "game failed validation: " + "; ".join(str(v) for v in self.violations)
        )


class SimulationConfigError(DecreachError):
    """An episode was requested from a vertex the strategy cannot serve."""


class OracleMismatchError(DecreachError):
    """The independent reachability oracle disagrees with the fixed point."""
