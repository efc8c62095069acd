# experiments/infrastructure/baseline_store.py

import json
import logging
from pathlib import Path

from pydantic import ValidationError

from experiments.domain.model.valueobjects.acceptance_baseline import AcceptanceBaseline
from shared.domain.exceptions import ConfigError

logger = logging.getLogger(__name__)


def load_baseline(path, expected_kind: str) -> AcceptanceBaseline:
    """Lee un baseline JSON y verifica que corresponda al tipo de experimento"""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"baseline file does not exist: {path}", field="baseline")
    try:
        baseline = AcceptanceBaseline.model_validate(json.loads(path.read_text(encoding="utf-8")))
    except json.JSONDecodeError as error:
        raise ConfigError(f"baseline {path} is not valid JSON: {error.msg}", line=error.lineno,
                          field="baseline") from error
    except ValidationError as error:
        first = error.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "baseline"
        raise ConfigError(f"baseline {path}: {first['msg']}", field=field) from error
    if baseline.kind != expected_kind:
        raise ConfigError(f"baseline {path} is for '{baseline.kind}', not '{expected_kind}'", field="baseline")
    if expected_kind == "relaxation" and baseline.check_time is None:
        raise ConfigError(f"relaxation baseline {path} needs 'check_time'", field="check_time")
    if expected_kind == "classical" and baseline.bins is None:
        raise ConfigError(f"classical baseline {path} needs 'bins'", field="bins")
    logger.info("Baseline %s loaded (threshold %g)", path, baseline.threshold)
    return baseline
