from typing import Any, Dict, List

from pydantic import BaseModel, Field

from shared.domain.conventions import CONVENTION_HEADER

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_CHECK_FAILED = 2


class ExperimentManifest(BaseModel):
    """
    Descripción reproducible de una corrida: con la misma configuración
    resuelta y las mismas semillas se obtienen los mismos números. No lleva
    marcas de tiempo.
    """
    tool_version: str
    kind: str
    conventions: Dict[str, str] = Field(default_factory=lambda: dict(CONVENTION_HEADER))
    seeds: Dict[str, int] = Field(default_factory=dict)
    grids: Dict[str, Any] = Field(default_factory=dict)
    times: List[float] = Field(default_factory=list)
    config: Dict[str, Dict[str, str]] = Field(default_factory=dict)
    noise: Dict[str, Any] = Field(default_factory=dict)
    artifacts: List[str] = Field(default_factory=list)
    flagged: List[str] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)
    exit_status: int = EXIT_OK


class ExperimentResult(BaseModel):
    kind: str
    exit_code: int
    output_dir: str
    manifest_path: str
    artifacts: List[str]
    flagged: List[str] = Field(default_factory=list)
    summary: Dict[str, Any] = Field(default_factory=dict)
