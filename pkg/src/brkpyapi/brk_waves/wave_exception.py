class WaveException(Exception):
    """
    Is used when a wave curve or locus cannot be constructed.
    Check the inner exception for details.
    """
    def __init__(self, message):
        super().__init__(message)


class ContinuationStallException(WaveException):
    """
    The Hugoniot corrector failed after halving the step down to ds_min.
    """
    def __init__(self, message):
        super().__init__(message)


class OutOfRangeException(WaveException):
    """
    A strength lies beyond the extent of a computed locus.
    """
    def __init__(self, message):
        super().__init__(message)


class LeftRegionException(WaveException):
    """
    A curve or orbit left the region of the system.
    """
    def __init__(self, message):
        super().__init__(message)


class FixedPointDivergedException(WaveException):
    """
    The wave-fan-curve fixed point did not converge within max_iter iterations.
    """
    def __init__(self, message):
        super().__init__(message)
