class ViscousException(Exception):
    """
    Is used when a viscous simulation or comparison fails.
    Check the inner exception for details.
    """
    def __init__(self, message):
        super().__init__(message)


class CFLViolationException(ViscousException):
    """
    The time step exceeds the explicit stability bound, or the scheme went unstable.
    """
    def __init__(self, message):
        super().__init__(message)


class DomainEscapeException(ViscousException):
    """
    Waves reached the far boundary x = L before the final time.
    """
    def __init__(self, message):
        super().__init__(message)


class WindowMismatchException(ViscousException):
    """
    A grid slice does not cover the comparison window.
    """
    def __init__(self, message):
        super().__init__(message)
