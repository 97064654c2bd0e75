"""Exception types shared across the package."""


class ChiralPottsError(Exception):
    pass


class DomainError(ChiralPottsError, ValueError):
    """Input outside the domain where an operation is defined."""


class CurveViolation(ChiralPottsError, ValueError):
    """A point fails one of the two curve equations."""

    def __init__(self, residuals, tol):
        self.residuals = tuple(residuals)
        self.tol = tol
        super().__init__(
            "point is off the curve: residuals (%.3e, %.3e) exceed tol %.1e"
            % (self.residuals[0], self.residuals[1], tol)
        )


class SingularWeight(ChiralPottsError, ZeroDivisionError):
    """A Boltzmann weight denominator vanishes."""

    def __init__(self, which, ell):
        self.which = which
        self.ell = ell
        super().__init__("vanishing denominator in %s at l=%d" % (which, ell))


class FactorizationMismatch(ChiralPottsError):
    def __init__(self, deviation, index):
        self.deviation = deviation
        self.index = index
        super().__init__(
            "factorized and closed-form R-matrix differ by %.3e at (a,b,c,d)=%s"
            % (deviation, index)
        )


class DegeneratePartition(ChiralPottsError, ZeroDivisionError):
    pass


class SizeOverflow(ChiralPottsError, ValueError):
    pass
