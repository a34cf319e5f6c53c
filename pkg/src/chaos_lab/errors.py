"""Exception types raised across the package."""


class ChaosError(ValueError):
    """Base class for all validation errors raised by chaos_lab."""


class RepeatedIndex(ChaosError):
    """A multi-index hits a diagonal (some index appears twice)."""

    def __init__(self, msg, pointer=None):
        super().__init__(msg if pointer is None else f"{msg} (at {pointer})")
        self.pointer = pointer


class DuplicateKey(ChaosError):
    pass


class BadLevel(ChaosError):
    pass


class ZeroKernel(ChaosError):
    pass


class BadContractionOrder(ChaosError):
    pass


class TooLarge(ChaosError):
    pass


class SupportMismatch(ChaosError):
    pass


class TooFewSamples(ChaosError):
    pass


class InvalidDoeblin(ChaosError):
    pass


class ThirdMomentNonzero(ChaosError):
    pass


class NotNormalized(ChaosError):
    pass


class SchemaError(ChaosError):
    def __init__(self, msg, pointer=""):
        super().__init__(f"{msg} (at {pointer or '/'})")
        self.pointer = pointer


class HypothesisA9Violated(UserWarning):
    """Emitted (not raised) when the low-influence smallness condition fails."""
