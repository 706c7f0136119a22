"""Exception types raised by the library and mapped to CLI exit codes."""


class ConfigurationError(ValueError):
    """Invalid parameter combination (bad order, rolloff, grid, ...)."""


class DimensionError(ValueError):
    """Input array has the wrong shape for the configured frame."""


class ScenarioError(RuntimeError):
    """A sensing scenario cannot be simulated as requested."""


class DegenerateScenarioError(ScenarioError):
    """Strong and weak targets share the same range."""


class ExhaustionError(ScenarioError):
    """No candidate chirp parameter survives the design rule.

    ``collisions`` maps each rejected candidate to the reason it was rejected.
    """

    def __init__(self, message, collisions=None):
        super().__init__(message)
        self.collisions = dict(collisions or {})
