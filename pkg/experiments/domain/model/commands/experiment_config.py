from enum import Enum
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from shared.infrastructure.settings import settings


class ExperimentKind(str, Enum):
    VALIDATE = "validate"
    INDEX_SERIES = "index_series"
    EVOLVE = "evolve"
    ASYMPTOTICS = "asymptotics"
    RELAXATION = "relaxation"
    CLASSICAL = "classical"


# subcomando de la CLI → tipo de experimento
SUBCOMMAND_KINDS = {
    "validate": ExperimentKind.VALIDATE,
    "index": ExperimentKind.INDEX_SERIES,
    "evolve": ExperimentKind.EVOLVE,
    "asymptotics": ExperimentKind.ASYMPTOTICS,
    "relaxation": ExperimentKind.RELAXATION,
    "classical": ExperimentKind.CLASSICAL,
}


class ExperimentSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Optional[ExperimentKind] = None
    times: List[float] = Field(default_factory=list)
    output_dir: Optional[str] = None
    baseline: Optional[str] = None

    @field_validator("times")
    @classmethod
    def times_increasing(cls, times: List[float]) -> List[float]:
        if any(t < 0 for t in times):
            raise ValueError("times must be nonnegative")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("times must be strictly increasing")
        return times


class StateSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: Literal["ground", "gaussian_1d", "gaussian_nd"] = "ground"
    params_file: Optional[str] = None


class GridSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    points: Optional[int] = Field(default=None, ge=8)
    half_width: Optional[float] = Field(default=None, gt=0)


class MonteCarloSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    samples: int = Field(default=settings.MC_SAMPLES, ge=1)
    steps: int = Field(default=settings.MC_STEPS, ge=64)
    seed: int = settings.MC_SEED
    block_size: int = Field(default=settings.MC_BLOCK_SIZE, ge=1)


class ExperimentConfig(BaseModel):
    """Configuración resuelta de un experimento (ruido y estado ya construidos)"""
    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    experiment: ExperimentSection
    noise: Any
    state: Any
    state_family: str = "ground"
    grid: GridSection = Field(default_factory=GridSection)
    monte_carlo: MonteCarloSection = Field(default_factory=MonteCarloSection)
    source: Dict[str, Dict[str, str]] = Field(default_factory=dict)

    @property
    def kind(self) -> ExperimentKind:
        return self.experiment.kind

    @property
    def dim(self) -> int:
        return self.noise.dim
