from typing import Optional

from pydantic import BaseModel, ConfigDict

from experiments.domain.model.commands.experiment_config import ExperimentConfig, ExperimentKind


class RunExperimentCommand(BaseModel):
    """Comando para ejecutar un experimento ya configurado"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: ExperimentConfig
    kind: Optional[ExperimentKind] = None
    output_dir: Optional[str] = None
    seed: Optional[int] = None
