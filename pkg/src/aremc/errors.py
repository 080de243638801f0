"""Exception types raised by the numerical routines."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure (CLI exit code 2)."""


class SeriesConvergenceError(NumericalError):
    """The truncated CIR series has not converged at the requested ``k_max``."""


class SamplingTimeError(NumericalError):
    """The CIR maximum sits on the end of the search window."""


class ThresholdOutOfRangeError(NumericalError):
    """No detection threshold up to ``theta_max`` satisfies the ML condition."""


class EnumerationCapError(NumericalError):
    """Exact IUI state enumeration would exceed the configured state cap."""
