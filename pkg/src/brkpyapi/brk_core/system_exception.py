class SystemException(Exception):
    """
    Is used when a hyperbolic system cannot be analysed.
    Check the inner exception for details.
    """
    def __init__(self, message):
        super().__init__(message)


class NonHyperbolicException(SystemException):
    """
    The Jacobian has a complex pair or two eigenvalues closer than gap_min.
    """
    def __init__(self, message):
        super().__init__(message)


class NearSingularException(SystemException):
    """
    An eigenvalue has a real part smaller than tol_eig in magnitude.
    """
    def __init__(self, message):
        super().__init__(message)


class AmbiguousRegimeException(SystemException):
    """
    More than one characteristic field violates the speed gap on the region.
    """
    def __init__(self, message):
        super().__init__(message)
