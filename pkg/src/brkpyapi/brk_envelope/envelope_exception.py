class EnvelopeException(Exception):
    """
    Is used when an envelope cannot be computed from the sampled data.
    """
    def __init__(self, message):
        super().__init__(message)


class EmptyIntervalException(EnvelopeException):
    """
    The requested interval [a, b] has a >= b.
    """
    def __init__(self, message):
        super().__init__(message)
