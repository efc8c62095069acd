# experiments/infrastructure/artifact_writer.py

import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from experiments.domain.model.valueobjects.experiment_manifest import ExperimentManifest
from phase_space.infrastructure.grid_serializer import GridSerializer
from shared.domain.conventions import CONVENTION_HEADER

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class ArtifactWriter:
    """
    Escribe los artefactos de una corrida en un directorio: tablas CSV con
    cabecera de convenciones, mallas muestreadas y el manifiesto JSON.
    Lleva la lista de archivos escritos (rutas relativas) para el manifiesto.
    """

    def __init__(self, output_dir, grids: Optional[GridSerializer] = None):
        self.output_dir = Path(output_dir)
        self.grids = grids or GridSerializer()
        self.artifacts: List[str] = []

    def path(self, name: str) -> Path:
        return self.output_dir / name

    def table(self, name: str, columns: Sequence[str], rows: Sequence[Sequence],
              extra: Optional[Dict[str, str]] = None) -> Path:
        path = self.path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            for key, value in {**CONVENTION_HEADER, **(extra or {})}.items():
                handle.write(f"# {key}={value}\n")
            writer = csv.writer(handle)
            writer.writerow(columns)
            writer.writerows(rows)
        logger.info("Table written to %s (%d rows)", path, len(rows))
        return self._register(path)

    def charfn(self, name: str, phi, extra: Optional[Dict[str, str]] = None) -> Path:
        return self._register(self.grids.write_charfn(self.path(name), phi, extra))

    def wigner(self, name: str, wigner, extra: Optional[Dict[str, str]] = None) -> Path:
        return self._register(self.grids.write_wigner(self.path(name), wigner, extra))

    def density(self, name: str, density, extra: Optional[Dict[str, str]] = None) -> Path:
        path = self.grids.write_density(self.path(name), density.values, density.x_axis,
                                        density.v_axis, density.dim, extra)
        return self._register(path)

    def manifest(self, manifest: ExperimentManifest) -> Path:
        path = self.path(MANIFEST_NAME)
        path.parent.mkdir(parents=True, exist_ok=True)
        manifest = manifest.model_copy(update={"artifacts": list(self.artifacts)})
        path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info("Manifest written to %s", path)
        return path

    def _register(self, path: Path) -> Path:
        self.artifacts.append(Path(path).relative_to(self.output_dir).as_posix())
        return path


def read_table(path) -> tuple[Dict[str, str], List[Dict[str, str]]]:
    """Cabecera '#' y filas de una tabla escrita por ArtifactWriter.table"""
    header: Dict[str, str] = {}
    with Path(path).open(encoding="utf-8", newline="") as handle:
        lines = handle.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            header[key.strip()] = value.strip()
        else:
            body.append(line)
    return header, list(csv.DictReader(body))
