# shared/domain/exceptions.py

"""
Jerarquía de errores del laboratorio.

Las capas de dominio lanzan estas excepciones; los controladores REST las
traducen a HTTPException y la CLI a códigos de salida.
"""

from typing import List, Optional


class DecoherenceLabError(Exception):
    """Raíz de todos los errores del laboratorio"""


class DomainError(DecoherenceLabError, ValueError):
    """Argumento fuera del dominio de la operación (t < 0, conteos inválidos, ...)"""


class RangeError(DomainError):
    """Rangos de malla incompatibles o muestras fuera de la malla"""

    def __init__(self, message: str, suggested_bounds: Optional[tuple] = None):
        super().__init__(message)
        self.suggested_bounds = suggested_bounds


class GridError(DomainError):
    """Malla mal formada (N no potencia de dos, dimensión no soportada)"""


class TruncationError(DecoherenceLabError):
    """La función no decae por debajo de la tolerancia en el borde de la malla"""

    def __init__(self, message: str, boundary_magnitude: float = float("nan")):
        super().__init__(message)
        self.boundary_magnitude = boundary_magnitude


class SingularMatrixError(DecoherenceLabError):
    """Bloque matricial requerido singular o no definido positivo"""


class UnsupportedOperationError(DecoherenceLabError):
    """Operación no disponible para la representación dada"""


class UnsupportedRegimeError(UnsupportedOperationError):
    """El ruido no pertenece a ninguno de los tres regímenes asintóticos"""


class DegenerateStateError(DecoherenceLabError):
    """Denominador D nulo: el estado conmuta con la familia de observables"""

    def __init__(self, message: str, observable: str):
        super().__init__(message)
        self.observable = observable


class ParameterValidationError(DecoherenceLabError, ValueError):
    """Parámetros inválidos; conserva la lista de violaciones"""

    def __init__(self, violations: List[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class NumericalInconsistencyError(DecoherenceLabError):
    """Una identidad garantizada falla: indica un defecto de implementación"""


class ConfigError(DecoherenceLabError):
    """Error de configuración con ubicación precisa"""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = f"[{', '.join(location)}] " if location else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
