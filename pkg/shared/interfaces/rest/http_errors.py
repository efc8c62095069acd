from fastapi import HTTPException, status

from shared.domain.exceptions import ConfigError, DecoherenceLabError, ParameterValidationError


def to_http_exception(error: DecoherenceLabError) -> HTTPException:
    """Traduce errores del laboratorio a respuestas HTTP"""
    if isinstance(error, ParameterValidationError):
        return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
                             detail={"message": "invalid parameters", "violations": error.violations})
    if isinstance(error, ConfigError):
        return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
                             detail={"message": str(error), "line": error.line, "field": error.field})
    return HTTPException(status_code=status.HTTP_400_BAD_REQUEST,
                         detail={"message": str(error), "error": type(error).__name__})
