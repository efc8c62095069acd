# experiments/infrastructure/config_parser.py

import logging
import re
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ValidationError

from experiments.domain.model.commands.experiment_config import (
    ExperimentConfig, ExperimentSection, GridSection, MonteCarloSection, StateSection
)
from gaussian_states.domain.model.valueobjects.gaussian_kernel_params import GaussianKernelParamsND
from gaussian_states.infrastructure.gaussian_params_serializer import GaussianParamsSerializer
from noise.infrastructure.noise_spec_loader import NoiseSpecLoader
from phase_space.domain.model.valueobjects.phase_grid import is_power_of_two
from shared.domain.exceptions import ConfigError
from shared.infrastructure.key_value_text import Entry, parse_numbers, strip_comment

logger = logging.getLogger(__name__)

SECTIONS = ("experiment", "noise", "state", "grid", "monte_carlo")
_SECTION_PATTERN = re.compile(r"^\[(?P<name>[^\]]+)\]$")


class ConfigParser:
    """
    Configuración de experimentos en texto con secciones:

        [experiment]   kind, times, output_dir, baseline
        [noise]        claves de ruido en línea o `file`
        [state]        family = ground | gaussian_1d | gaussian_nd, parámetros o params_file
        [grid]         points, half_width
        [monte_carlo]  samples, steps, seed, block_size

    Toda clave o sección desconocida es un error con su línea.
    """

    def __init__(self, base_dir: Optional[Path] = None):
        self.base_dir = Path(base_dir) if base_dir is not None else Path.cwd()

    def parse_file(self, path) -> ExperimentConfig:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file does not exist: {path}")
        return ConfigParser(path.parent).parse_config(path.read_text(encoding="utf-8"))

    def parse_config(self, text: str) -> ExperimentConfig:
        sections = split_sections(text)
        if "noise" not in sections:
            raise ConfigError("missing required section [noise]", field="noise")

        experiment = _build(ExperimentSection, sections.get("experiment", []), _experiment_value)
        if experiment.baseline is not None and not Path(experiment.baseline).is_absolute():
            experiment = experiment.model_copy(update={"baseline": str(self.base_dir / experiment.baseline)})
        noise = self._noise(sections["noise"])
        state_entries = sections.get("state", [])
        state_section, state = self._state(state_entries, noise.dim)
        grid = _build(GridSection, sections.get("grid", []), _scalar_value)
        monte_carlo = _build(MonteCarloSection, sections.get("monte_carlo", []), _scalar_value)
        _check_powers_of_two(grid, monte_carlo, sections)

        source = {name: {key: value for _, key, value in entries} for name, entries in sections.items()}
        config = ExperimentConfig(
            experiment=experiment, noise=noise, state=state, state_family=state_section.family,
            grid=grid, monte_carlo=monte_carlo, source=source,
        )
        logger.debug("Parsed config: kind=%s, times=%s", experiment.kind, experiment.times)
        return config

    def _noise(self, entries: List[Entry]):
        loader = NoiseSpecLoader(self.base_dir)
        files = [e for e in entries if e[1] == "file"]
        if files:
            if len(entries) > 1:
                line, key, _ = next(e for e in entries if e[1] != "file")
                raise ConfigError("inline noise keys cannot be combined with 'file'", line=line, field=key)
            return loader.load_file(files[0][2] if Path(files[0][2]).is_absolute()
                                    else self.base_dir / files[0][2])
        return loader.load_entries(entries)

    def _state(self, entries: List[Entry], dim: int):
        section_keys = {"family", "params_file"}
        section = _build(StateSection, [e for e in entries if e[1] in section_keys], _scalar_value)
        parameters = [e for e in entries if e[1] not in section_keys]
        serializer = GaussianParamsSerializer()

        if section.family == "ground":
            if parameters:
                line, key, _ = parameters[0]
                raise ConfigError(f"unknown key '{key}' for the ground state", line=line, field=key)
            identity = np.eye(dim)
            return section, GaussianKernelParamsND.centered(identity, np.zeros((dim, dim)), identity)

        if section.params_file is not None:
            if parameters:
                line, key, _ = parameters[0]
                raise ConfigError("inline parameters cannot be combined with 'params_file'", line=line, field=key)
            path = Path(section.params_file)
            params = serializer.read(path if path.is_absolute() else self.base_dir / path)
        else:
            params = serializer.from_entries(parameters, family=section.family)

        params_dim = 1 if section.family == "gaussian_1d" else params.dim
        if params_dim != dim:
            raise ConfigError(f"state dimension {params_dim} differs from noise dimension {dim}", field="state")
        return section, params


def split_sections(text: str) -> Dict[str, List[Entry]]:
    sections: Dict[str, List[Entry]] = {}
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw)
        if not line:
            continue
        match = _SECTION_PATTERN.match(line)
        if match:
            current = match.group("name").strip()
            if current not in SECTIONS:
                raise ConfigError(f"unknown section [{current}]", line=number, field=current)
            sections.setdefault(current, [])
            continue
        if current is None:
            raise ConfigError("key outside of any [section]", line=number)
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected 'key = value', got '{line}'", line=number)
        sections[current].append((number, key.strip(), value.strip()))
    return sections


def _experiment_value(line, key, value):
    if key == "times":
        return parse_numbers(value, None, line, key)
    return value


def _scalar_value(line, key, value):
    return value


def _build(model: type, entries: List[Entry], convert) -> BaseModel:
    lines = {}
    data = {}
    for line, key, value in entries:
        if key in data:
            raise ConfigError(f"duplicate key '{key}'", line=line, field=key)
        lines[key] = line
        data[key] = convert(line, key, value)
    try:
        return model(**data)
    except ValidationError as error:
        first = error.errors()[0]
        field = str(first["loc"][0]) if first["loc"] else None
        if first["type"] == "extra_forbidden":
            message = f"unknown key '{field}'"
        else:
            message = first["msg"]
        raise ConfigError(message, line=lines.get(field), field=field) from error


def _check_powers_of_two(grid: GridSection, monte_carlo: MonteCarloSection, sections) -> None:
    def line_of(section, key):
        return next((line for line, k, _ in sections.get(section, []) if k == key), None)

    if grid.points is not None and not is_power_of_two(grid.points):
        raise ConfigError("grid points must be a power of two", line=line_of("grid", "points"), field="points")
    if not is_power_of_two(monte_carlo.steps):
        raise ConfigError("steps must be a power of two", line=line_of("monte_carlo", "steps"), field="steps")


def parse_config(text: str, base_dir: Optional[Path] = None) -> ExperimentConfig:
    return ConfigParser(base_dir).parse_config(text)


__all__ = ["ConfigParser", "parse_config", "split_sections"]
