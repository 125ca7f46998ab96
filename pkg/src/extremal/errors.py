"""Exception hierarchy shared by every module."""


class ExtremalError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ExtremalError):
    """Input failed a structural precondition (maps to CLI exit code 2)."""


class AmbientMismatch(ValidationError):
    pass


class DimMismatch(ValidationError):
    pass


class NonUnitaryInput(ValidationError):
    def __init__(self, index: int, residual: float):
        super().__init__(f"input {index} is not unitary (residual {residual:.3e})")
        self.index = index
        self.residual = residual


class NormExceeded(ValidationError):
    def __init__(self, index: int, norm: float):
        super().__init__(f"vector x{index + 1} has norm {norm:.12g} > 1")
        self.index = index
        self.norm = norm


class InvarianceViolation(ValidationError):
    def __init__(self, index: int, residual: float):
        super().__init__(
            f"subspace is not invariant for operator {index} (residual {residual:.3e})"
        )
        self.index = index
        self.residual = residual


class VarCountMismatch(ValidationError):
    pass


class NonCommutingTuple(ValidationError):
    def __init__(self, pair, residual: float):
        super().__init__(f"operators {pair} do not commute (residual {residual:.3e})")
        self.pair = pair
        self.residual = residual


class ConstructionError(ExtremalError):
    """A certificate construction's precondition does not hold."""


class EmptyGap(ConstructionError):
    pass


class AllNormsOne(ConstructionError):
    pass


class ExtremalNoKernel(ConstructionError):
    pass


class TrivialKernel(ConstructionError):
    pass
