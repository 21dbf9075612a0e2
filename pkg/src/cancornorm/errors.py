"""Exception types raised by the numerical core."""


class SampleSizeError(ValueError):
    """Sample size below the threshold required by a statistic or block family."""


class DegenerateSampleError(ValueError):
    """Sample covariance (or another required matrix) is rank deficient."""


class SingularBlockError(ValueError):
    """A covariance block is numerically singular; the message names the block."""


class EigenvalueRangeError(ValueError):
    """A squared canonical correlation fell outside [0, 1] by more than the
    floating-point tolerance.  This signals a broken block construction, not
    unusual data, so it is an error rather than a clamp."""


class FunctionalDomainError(ValueError):
    """A functional of the squared canonical correlations is undefined
    (eigenvalue at 1 makes the ratio trace blow up)."""
