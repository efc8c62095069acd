from typing import Optional

from pydantic import BaseModel, Field


class RunExperimentResource(BaseModel):
    """Resource para ejecutar un experimento a partir del texto de configuración"""
    config_text: str = Field(min_length=1)
    output_dir: Optional[str] = None
    seed: Optional[int] = None
