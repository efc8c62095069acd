from typing import Any, Dict, List

from pydantic import BaseModel, Field


class ExperimentResultResource(BaseModel):
    """Resource de respuesta: estado de salida, artefactos y manifiesto"""
    kind: str
    exit_code: int
    output_dir: str
    artifacts: List[str]
    flagged: List[str] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)
    manifest: Dict[str, Any]
