"""Exception hierarchy shared by all modules."""


class BilinscatError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(BilinscatError, ValueError):
    pass


class SingularMatrix(BilinscatError, ArithmeticError):
    """Raised by :func:`bilinscat.linalg.invert` when a pivot collapses."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class SpectralSingularity(SingularMatrix):
    """A reduced transfer block could not be inverted.

    ``block`` names the offending block, e.g. ``"tt_plus.22"``.
    """

    def __init__(self, block, pivot=None, energy=None):
        msg = f"spectral singularity: block {block} is singular"
        if energy is not None:
            msg += f" at E={energy!r}"
        super().__init__(msg, pivot)
        self.block = block
        self.energy = energy


class ExpressionSyntaxError(BilinscatError, SyntaxError):
    """Malformed potential expression; ``offset`` is a byte offset into the source."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnknownIdentifier(ExpressionSyntaxError):
    def __init__(self, name, offset):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class NonAnalyticAtComplexPoint(BilinscatError, ValueError):
    pass


class InvalidPotential(BilinscatError, ValueError):
    pass


class NonFiniteState(BilinscatError, FloatingPointError):
    pass


class LinearSolveFailure(BilinscatError, ArithmeticError):
    pass
