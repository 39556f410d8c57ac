class LayerException(Exception):
    """
    Is used when a boundary layer cannot be constructed or analysed.
    Check the inner exception for details.
    """
    def __init__(self, message):
        super().__init__(message)


class NoConnectionException(LayerException):
    """
    The boundary value is not connected to the equilibrium by a layer orbit.
    """
    def __init__(self, message):
        super().__init__(message)


class BlowUpException(LayerException):
    """
    Every shooting attempt produced an orbit leaving the region.
    """
    def __init__(self, message):
        super().__init__(message)


class PoorFitException(LayerException):
    """
    A decay-rate regression has R^2 below 0.9.
    """
    def __init__(self, message):
        super().__init__(message)
