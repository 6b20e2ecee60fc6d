"""Exception types shared across the package."""


class TricolorError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(TricolorError, ValueError):
    """A parameter is outside its documented domain."""


class BudgetExceededError(TricolorError):
    """The requested instance exceeds a configured memory or state budget.

    Distinct from InvalidParameterError: the parameters are legal, the
    instance is just too large for exact treatment.
    """


class LengthMismatchError(InvalidParameterError):
    """A raw color array has the wrong length for its graph."""


class BadValueError(InvalidParameterError):
    """A raw color array contains a value outside {0, 1, 2}."""

    def __init__(self, index, value):
        self.index = index
        self.value = value
        super().__init__(f"color value {value} at vertex {index} not in {{0, 1, 2}}")


class ImproperColoringError(TricolorError, ValueError):
    """Two adjacent vertices share a color; carries the first violating edge."""

    def __init__(self, edge, message=None):
        self.edge = edge
        super().__init__(message or f"adjacent vertices share a color on edge {edge}")


class ConfigError(InvalidParameterError):
    """A chain or experiment configuration is internally inconsistent."""


class NotErgodicError(TricolorError):
    """A kernel is reducible or periodic where ergodicity is required."""


class MixingCapError(TricolorError):
    """The mixing-time computation hit its step cap before converging.

    The partial TV-vs-t curve computed so far is attached as ``curve``.
    """

    def __init__(self, cap, curve):
        self.cap = cap
        self.curve = curve
        super().__init__(f"total variation still above 1/e at step cap {cap}")


class DegenerateCutError(TricolorError):
    """The bottleneck set has measure zero but the phase set is not closed."""


class FlowMembershipError(TricolorError):
    """A coloring is not in the image of the shift surgery for this context."""
