from enum import Enum
from typing import Dict, List

from pydantic import BaseModel, Field


class Observable(str, Enum):
    """Familias de observables del índice: posiciones X o momentos K"""
    X = "X"
    K = "K"


class IndexReport(BaseModel):
    """Índices de coherencia S = C/D para X y K, con medias y norma HS"""
    c_x: float = Field(ge=0)
    d_x: float = Field(ge=0)
    s_x: float = Field(ge=0)
    c_k: float = Field(ge=0)
    d_k: float = Field(ge=0)
    s_k: float = Field(ge=0)
    hs_norm: float = Field(ge=0)
    mean_position: List[float]
    mean_momentum: List[float]
    metadata: Dict[str, str] = Field(default_factory=dict)

    @property
    def cx_dk(self) -> float:
        return self.c_x * self.d_k

    @property
    def ck_dx(self) -> float:
        return self.c_k * self.d_x

    def row(self, t: float) -> List[float]:
        return [t, self.c_x, self.d_x, self.s_x, self.c_k, self.d_k, self.s_k, self.cx_dk, self.ck_dx]


INDEX_COLUMNS = ["t", "C_X", "D_X", "S_X", "C_K", "D_K", "S_K", "CxDk", "CkDx"]
