from enum import Enum

from pydantic import BaseModel, Field


class NoiseRegime(str, Enum):
    """Regímenes asintóticos según qué argumentos del exponente están activos"""
    MOMENTUM_JUMPS = "MomentumJumps"
    POSITION_JUMPS = "PositionJumps"
    BOTH = "Both"


class AsymptoticPrediction(BaseModel):
    """S(t) ≈ coefficient · t^power, con error relativo del orden t^error_order"""
    regime: NoiseRegime
    power: float
    coefficient: float = Field(gt=0)
    error_order: float

    def predicted(self, t: float) -> float:
        return self.coefficient * t ** self.power


class PowerLawFit(BaseModel):
    """Ajuste log-log por mínimos cuadrados sobre la cola de una serie"""
    power: float
    coefficient: float
    residual: float
    points_used: int
