"""Error types

Every failure a lab operation can report is a LabError. The CLI turns a
LabError raised inside a suite into a failing certificate.
"""


class LabError(Exception):
    """Base class for all scvlab errors"""


class DomainError(LabError, ValueError):
    """Invalid domain description, or a point outside the domain"""


class ParameterError(LabError, ValueError):
    """A scalar parameter outside its admissible range"""


class DimensionError(LabError, ValueError):
    """Array shapes that do not fit together"""


class ResolutionError(LabError, ValueError):
    """Grid too coarse for the requested operation"""


class SampleError(LabError, ValueError):
    """A sampled function produced a non-finite value"""

    def __init__(self, message: str, node: tuple[int, ...] | None = None):
        super().__init__(message)
        self.node = node


class ExprError(LabError, ValueError):
    """Base class of expression-language errors, located by byte offset"""

    def __init__(self, message: str, offset: int):
        super().__init__(f'{message} (at offset {offset})')
        self.offset = offset


class ExprSyntaxError(ExprError):
    """Malformed expression source"""


class ExprNameError(ExprError):
    """Unknown identifier in an expression"""


class ExprArityError(ExprError):
    """Function called with the wrong number of arguments"""


class ExprDomainError(ExprError):
    """Evaluation outside the domain of an operation (log <= 0, x/0)"""


class StencilError(LabError, ValueError):
    """Finite-difference stencil does not fit the grid"""


class DegreeError(LabError, ValueError):
    """Form degree out of range"""


class ContourError(LabError, ValueError):
    """Evaluation point outside or too close to a contour"""


class PreconditionError(LabError, ValueError):
    """A measured precondition residual exceeded its tolerance"""

    def __init__(self, message: str, residual: float):
        super().__init__(f'{message}: residual {residual:.6g}')
        self.residual = residual


class ClosureError(PreconditionError):
    """A (0,1)-form is not dbar-closed"""


class ConvergenceError(LabError, ArithmeticError):
    """An iteration hit its cap before converging"""


class NotPSDError(LabError, ValueError):
    """Matrix has an eigenvalue below the negative tolerance"""


class SingularMatrixError(LabError, ArithmeticError):
    """Matrix is numerically singular"""

    def __init__(self, message: str, location=None):
        super().__init__(message)
        self.location = location


class RangeError(LabError, ValueError):
    """Vector or subspace outside the range it must lie in"""


class SubspaceError(LabError, ValueError):
    """Orthogonality precondition violated"""


class ProfileError(LabError, ValueError):
    """Cutoff profile violates its boundary conditions"""


class ConfigError(LabError, ValueError):
    """Invalid run configuration, located by JSON pointer"""

    def __init__(self, message: str, pointer: str = ''):
        super().__init__(f'{pointer or "/"}: {message}')
        self.pointer = pointer
