import json
from pathlib import Path

from fastapi import APIRouter, HTTPException, status

from experiments.application.internal.commandservices.experiment_command_service import ExperimentCommandService
from experiments.domain.model.commands.experiment_config import SUBCOMMAND_KINDS
from experiments.domain.model.commands.run_experiment_command import RunExperimentCommand
from experiments.infrastructure.config_parser import ConfigParser
from experiments.interfaces.rest.resources.experiment_result_resource import ExperimentResultResource
from experiments.interfaces.rest.resources.run_experiment_resource import RunExperimentResource
from shared.domain.exceptions import DecoherenceLabError
from shared.interfaces.rest.http_errors import to_http_exception

router = APIRouter(prefix="/api/v1/experiments", tags=["Experiments"])


@router.post("/{kind}", response_model=ExperimentResultResource)
def run_experiment(kind: str, resource: RunExperimentResource):
    """
    Ejecuta un experimento (validate, index, evolve, asymptotics, relaxation,
    classical) y devuelve el manifiesto escrito
    """
    if kind not in SUBCOMMAND_KINDS:
        raise HTTPException(
            status_code=status.HTTP_404_NOT_FOUND,
            detail=f"Unknown experiment '{kind}'. Available: {', '.join(SUBCOMMAND_KINDS)}"
        )
    try:
        config = ConfigParser().parse_config(resource.config_text)
        command = RunExperimentCommand(config=config, kind=SUBCOMMAND_KINDS[kind],
                                       output_dir=resource.output_dir, seed=resource.seed)
        result = ExperimentCommandService().handle_run_experiment(command)
    except DecoherenceLabError as error:
        raise to_http_exception(error)

    manifest = json.loads(Path(result.manifest_path).read_text(encoding="utf-8"))
    return ExperimentResultResource(**result.model_dump(exclude={"manifest_path"}), manifest=manifest)
