class RiemannException(Exception):
    """
    Is used when a Riemann or boundary Riemann problem cannot be solved.
    Check the inner exception for details.
    """
    def __init__(self, message):
        super().__init__(message)


class NewtonDivergedException(RiemannException):
    """
    Newton on the composed wave map did not reach tol_newton from any initial guess.
    The best iterate found is kept in ``best``.
    """
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DataTooLargeException(RiemannException):
    """
    The data jump exceeds data_max.
    """
    def __init__(self, message):
        super().__init__(message)
