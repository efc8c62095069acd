from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field


class AcceptanceBaseline(BaseModel):
    """
    Umbral de aceptación registrado a partir de una corrida de alta
    resolución, junto con el manifiesto de esa corrida.

    - relaxation: `threshold` acota la distancia de relajación en `check_time`
    - classical: `threshold` acota el estadístico chi-cuadrado de la
      marginal de momento sobre `bins` clases equiprobables
    """
    model_config = ConfigDict(extra="forbid")

    kind: str
    threshold: float = Field(gt=0)
    check_time: Optional[float] = Field(default=None, gt=0)
    bins: Optional[int] = Field(default=None, ge=2)
    reference: Dict[str, float] = Field(default_factory=dict)
    manifest: Dict[str, Any] = Field(default_factory=dict)
