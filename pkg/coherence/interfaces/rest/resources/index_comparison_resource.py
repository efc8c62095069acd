from pydantic import BaseModel

from coherence.domain.model.valueobjects.index_report import IndexReport


class IndexComparisonResource(BaseModel):
    """Resource de respuesta: índices en forma cerrada y por cuadratura"""
    closed_form: IndexReport
    numeric: IndexReport
    max_relative_deviation: float
