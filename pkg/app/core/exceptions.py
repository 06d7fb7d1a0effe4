"""Domain exceptions.

Every error raised by the computational core derives from ``WorkbenchError`` so
the CLI and the HTTP layer can map failures onto exit codes and status codes
in one place.
"""


class WorkbenchError(Exception):
    """Base class for all workbench errors."""


class SpaceMismatchError(WorkbenchError):
    """Operands live on different graded spaces."""


class SymplecticFormError(WorkbenchError):
    """The symplectic form is missing, degenerate or inconsistent."""


class SingularMatrixError(WorkbenchError):
    """A rational matrix that must be inverted is singular."""


class NotSymplecticError(WorkbenchError):
    """A vector field has no Hamiltonian lift to the requested order."""


class GraphFormatError(WorkbenchError):
    """Malformed graph labels or graph text."""


class ResourceLimitError(WorkbenchError):
    """An enumeration exceeded the configured size limits."""


class VertexDataError(WorkbenchError):
    """Vertex data unsuitable for the graph correspondence."""


class HomogeneityError(WorkbenchError):
    """Vertex polynomials have the wrong polynomial degree."""


class LieDataError(WorkbenchError):
    """Lie algebra data violates antisymmetry, Jacobi or the representation."""


class RWDataError(WorkbenchError):
    """Rozansky-Witten data is inconsistent or truncated too low."""


class ConnectionDataError(WorkbenchError):
    """Connection jets violate torsion, invertibility or compatibility."""


class InsufficientOrderError(WorkbenchError):
    """The truncation order is too low for the requested identity."""


class ManifestError(WorkbenchError):
    """A manifest could not be parsed or is internally inconsistent."""


INPUT_ERRORS: tuple[type[WorkbenchError], ...] = (
    GraphFormatError,
    ManifestError,
    LieDataError,
    RWDataError,
    ConnectionDataError,
    SymplecticFormError,
    SpaceMismatchError,
    VertexDataError,
    HomogeneityError,
    NotSymplecticError,
    SingularMatrixError,
)
