from typing import Optional

from pydantic import BaseModel, Field


class Gaussian1DResource(BaseModel):
    """Resource con los parámetros A..F de un núcleo gaussiano en d=1"""
    A: float
    B: float = 0.0
    C: float
    D: float = 0.0
    E: float = 0.0
    F: float = 0.0
    points: Optional[int] = Field(default=None, ge=8)
