from typing import Callable
from fastapi.responses import JSONResponse
from fastapi.requests import Request
from fastapi import FastAPI, status


class VerifierError(Exception):
    """This is the base class for all exceptions"""

    pass

class JetShapeMismatch(VerifierError):
    """Jets combined with different dimension or truncation order"""

    pass

class JetDomainError(VerifierError):
    """Function applied outside its domain (ln, sqrt, pow, division by a zero jet)"""

    pass

class InsufficientJetOrder(VerifierError):
    """A derivative was requested beyond the truncation order of the jet"""

    pass

class ExpressionSyntaxError(VerifierError):
    """Illegal character, unexpected token or unbalanced parentheses"""

    pass

class UnknownSymbol(VerifierError):
    """Identifier is neither a coordinate, a parameter, a constant nor a function"""

    pass

class ExpressionDomainError(VerifierError):
    """Expression evaluation failed at a chart point"""

    pass

class ManifoldConfigError(VerifierError):
    """Manifold config could not be read or validated"""

    pass

class SingularMetric(VerifierError):
    """Metric is not invertible at a chart point"""

    pass

class DegeneratePlane(VerifierError):
    """The two vectors spanning a plane are linearly dependent"""

    pass

class StructureAbsent(VerifierError):
    """The manifold config has no structure (or soliton) block for the requested operation"""

    pass

class NotKenmotsu(VerifierError):
    """Closed-form *-Ricci tensor requested on a non-Kenmotsu structure"""

    pass

class UnknownCheck(VerifierError):
    """Requested check name is not in the catalog"""

    pass

class UnknownFixture(VerifierError):
    """Requested built-in fixture does not exist"""

    pass

class ReportWriteError(VerifierError):
    """Report file could not be written"""

    pass


ERROR_TABLE: dict[type[VerifierError], tuple[int, str]] = {
    JetShapeMismatch: (status.HTTP_422_UNPROCESSABLE_ENTITY, "jet_shape_mismatch"),
    JetDomainError: (status.HTTP_422_UNPROCESSABLE_ENTITY, "jet_domain_error"),
    InsufficientJetOrder: (status.HTTP_422_UNPROCESSABLE_ENTITY, "insufficient_jet_order"),
    ExpressionSyntaxError: (status.HTTP_422_UNPROCESSABLE_ENTITY, "expression_syntax_error"),
    UnknownSymbol: (status.HTTP_422_UNPROCESSABLE_ENTITY, "unknown_symbol"),
    ExpressionDomainError: (status.HTTP_422_UNPROCESSABLE_ENTITY, "expression_domain_error"),
    ManifoldConfigError: (status.HTTP_422_UNPROCESSABLE_ENTITY, "manifold_config_error"),
    SingularMetric: (status.HTTP_422_UNPROCESSABLE_ENTITY, "singular_metric"),
    DegeneratePlane: (status.HTTP_422_UNPROCESSABLE_ENTITY, "degenerate_plane"),
    StructureAbsent: (status.HTTP_409_CONFLICT, "structure_absent"),
    NotKenmotsu: (status.HTTP_409_CONFLICT, "not_kenmotsu"),
    UnknownCheck: (status.HTTP_400_BAD_REQUEST, "unknown_check"),
    UnknownFixture: (status.HTTP_404_NOT_FOUND, "unknown_fixture"),
    ReportWriteError: (status.HTTP_500_INTERNAL_SERVER_ERROR, "report_write_error"),
}


def create_exception_handler(
    status_code: int, error_code: str
) -> Callable[[Request, Exception], JSONResponse]:
    async def exception_handler(requests: Request, exc: VerifierError):
        return JSONResponse(
            content={"message": str(exc), "error_code": error_code},
            status_code=status_code,
        )

    return exception_handler


def register_all_errors(app: FastAPI):
    for exc_class, (status_code, error_code) in ERROR_TABLE.items():
        app.add_exception_handler(
            exc_class,
            create_exception_handler(status_code=status_code, error_code=error_code),
        )
