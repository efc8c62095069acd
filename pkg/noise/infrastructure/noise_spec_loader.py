# noise/infrastructure/noise_spec_loader.py

import logging
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np

from noise.domain.model.aggregates.noise_spec import NoiseSpec
from noise.domain.model.valueobjects.jump_measure import JumpKind, JumpMeasure
from shared.domain.exceptions import ConfigError, DecoherenceLabError
from shared.infrastructure.key_value_text import Entry, parse_key_values, parse_matrix, parse_numbers

logger = logging.getLogger(__name__)

NOISE_KEYS = {
    "dimension",
    "diffusion",
    "atom",
    "momentum_atom",
    "position_atom",
    "momentum_density_file",
    "position_density_file",
}


class NoiseSpecLoader:
    """
    Lee especificaciones de ruido en texto key=value:

        dimension = 1
        diffusion = 1 0; 0 0
        atom = 0 1 0.5                  # x..., k..., peso
        momentum_atom = 1 0.5           # k..., peso
        position_density_file = nu.csv  # columnas: valor, densidad (d=1)

    Las filas de la matriz se separan con ';' y los números con espacios o
    comas. Las claves de átomo pueden repetirse.
    """

    def __init__(self, base_dir: Optional[Path] = None):
        self.base_dir = Path(base_dir) if base_dir is not None else Path.cwd()

    def load_file(self, path) -> NoiseSpec:
        path = self._resolve(path, None, "file")
        logger.info("Loading noise spec from %s", path)
        loader = NoiseSpecLoader(path.parent)
        return loader.load_text(path.read_text(encoding="utf-8"))

    def load_text(self, text: str) -> NoiseSpec:
        return self.load_entries(parse_key_values(text))

    def load_entries(self, entries: Iterable[Entry]) -> NoiseSpec:
        entries = list(entries)
        for line, key, _ in entries:
            if key not in NOISE_KEYS:
                raise ConfigError(f"unknown noise key '{key}'", line=line, field=key)

        dim_entries = [e for e in entries if e[1] == "dimension"]
        if not dim_entries:
            raise ConfigError("missing required key 'dimension'", field="dimension")
        line, _, value = dim_entries[-1]
        try:
            dim = int(value)
        except ValueError:
            raise ConfigError(f"dimension must be an integer, got '{value}'", line=line, field="dimension")
        if dim not in (1, 2, 3):
            raise ConfigError(f"dimension must be 1, 2 or 3, got {dim}", line=line, field="dimension")

        diffusion = None
        atoms: List[tuple] = []
        momentum_atoms: List[tuple] = []
        position_atoms: List[tuple] = []
        densities: List[JumpMeasure] = []
        for line, key, value in entries:
            if key == "diffusion":
                diffusion = parse_matrix(value, 2 * dim, line, key)
            elif key == "atom":
                numbers = parse_numbers(value, 2 * dim + 1, line, key)
                atoms.append((numbers[:dim], numbers[dim:2 * dim], numbers[-1]))
            elif key == "momentum_atom":
                numbers = parse_numbers(value, dim + 1, line, key)
                momentum_atoms.append((numbers[:dim], numbers[-1]))
            elif key == "position_atom":
                numbers = parse_numbers(value, dim + 1, line, key)
                position_atoms.append((numbers[:dim], numbers[-1]))
            elif key in ("momentum_density_file", "position_density_file"):
                densities.append(self._load_density(value, dim, line, key))

        try:
            parts = []
            if atoms:
                parts.append(JumpMeasure.atoms(dim, atoms))
            if momentum_atoms:
                parts.append(JumpMeasure.momentum_only(dim, momentum_atoms))
            if position_atoms:
                parts.append(JumpMeasure.position_only(dim, position_atoms))
            parts.extend(densities)
            jump = merge_measures(dim, parts)
            return NoiseSpec(dim, diffusion, jump)
        except DecoherenceLabError as error:
            raise ConfigError(str(error), field="noise") from error

    def _load_density(self, value: str, dim: int, line, key) -> JumpMeasure:
        if dim != 1:
            raise ConfigError("density files are supported for dimension 1 only", line=line, field=key)
        path = self._resolve(value, line, key)
        try:
            data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        except ValueError as error:
            raise ConfigError(f"cannot read density file {path}: {error}", line=line, field=key)
        if data.shape[1] != 2:
            raise ConfigError(f"density file {path} must have 2 columns (value, density)", line=line, field=key)
        try:
            if key == "momentum_density_file":
                return JumpMeasure.momentum_density(data[:, 0], data[:, 1])
            return JumpMeasure.position_density(data[:, 0], data[:, 1])
        except DecoherenceLabError as error:
            raise ConfigError(str(error), line=line, field=key) from error

    def _resolve(self, value, line, key) -> Path:
        path = Path(str(value).strip())
        if not path.is_absolute():
            path = self.base_dir / path
        if not path.exists():
            raise ConfigError(f"referenced file does not exist: {path}", line=line, field=key)
        return path


def merge_measures(dim: int, parts: List[JumpMeasure]) -> JumpMeasure:
    parts = [part for part in parts if not part.is_empty]
    if not parts:
        return JumpMeasure.empty(dim)
    if len(parts) == 1:
        return parts[0]
    rows = np.vstack([part.displacements for part in parts])
    weights = np.concatenate([part.weights for part in parts])
    kinds = {part.kind for part in parts}
    kind = kinds.pop() if len(kinds) == 1 else JumpKind.ATOMS
    return JumpMeasure(kind, dim, rows, weights, is_density=all(p.is_density for p in parts))

