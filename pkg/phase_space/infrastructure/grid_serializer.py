# phase_space/infrastructure/grid_serializer.py

import logging
from pathlib import Path
from typing import Dict, Sequence

import numpy as np

from phase_space.domain.model.valueobjects.characteristic_function import SampledCharFn
from phase_space.domain.model.valueobjects.phase_grid import PhaseGrid
from phase_space.domain.model.valueobjects.wigner_function import WignerFn
from shared.domain.conventions import CONVENTION_HEADER

logger = logging.getLogger(__name__)


class GridSerializer:
    """
    Serializa arreglos muestreados a CSV autodescriptivo.

    Las primeras líneas empiezan con '#' y contienen key=value (dimensión,
    rangos, conteos, convención de medida); luego viene la cabecera de
    columnas y una fila por punto de malla en orden C.
    """

    @staticmethod
    def _write(path: Path, header: Dict[str, str], columns: Sequence[str], data: np.ndarray) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            for key, value in header.items():
                handle.write(f"# {key}={value}\n")
            handle.write(",".join(columns) + "\n")
            np.savetxt(handle, data, delimiter=",", fmt="%.17g")
        logger.info("Grid written to %s (%d rows)", path, data.shape[0])
        return path

    @staticmethod
    def _read_header(path: Path) -> tuple[Dict[str, str], int]:
        header: Dict[str, str] = {}
        skip = 0
        with Path(path).open(encoding="utf-8") as handle:
            for line in handle:
                if not line.startswith("#"):
                    break
                key, _, value = line[1:].strip().partition("=")
                header[key.strip()] = value.strip()
                skip += 1
        return header, skip + 1

    def write_charfn(self, path, phi: SampledCharFn, extra: Dict[str, str] | None = None) -> Path:
        grid = phi.grid
        q, p = grid.mesh()
        d = grid.dim
        data = np.column_stack([
            q.reshape(-1, d), p.reshape(-1, d),
            phi.values.real.reshape(-1), phi.values.imag.reshape(-1),
        ])
        header = {
            "kind": "charfn",
            "dim": str(d),
            "q_range": f"{-grid.half_width_q!r},{grid.half_width_q!r}",
            "p_range": f"{-grid.half_width_p!r},{grid.half_width_p!r}",
            "counts": f"{grid.points_q},{grid.points_p}",
            "is_state": str(phi.is_state).lower(),
            **CONVENTION_HEADER,
            **(extra or {}),
        }
        columns = [f"q{i + 1}" for i in range(d)] + [f"p{i + 1}" for i in range(d)] + ["re", "im"]
        return self._write(path, header, columns, data)

    def read_charfn(self, path) -> SampledCharFn:
        header, skip = self._read_header(path)
        if header.get("kind") != "charfn":
            raise ValueError(f"{path} does not contain a sampled characteristic function")
        d = int(header["dim"])
        half_q = float(header["q_range"].split(",")[1])
        half_p = float(header["p_range"].split(",")[1])
        points_q, points_p = (int(v) for v in header["counts"].split(","))
        grid = PhaseGrid(d, half_q, half_p, points_q, points_p)
        data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
        values = (data[:, -2] + 1j * data[:, -1]).reshape(grid.shape)
        return SampledCharFn(grid, values, is_state=header.get("is_state") == "true")

    def write_wigner(self, path, wigner: WignerFn, extra: Dict[str, str] | None = None) -> Path:
        d = wigner.dim
        axes = [wigner.x_axis] * d + [wigner.v_axis] * d
        mesh = np.meshgrid(*axes, indexing="ij")
        data = np.column_stack([m.reshape(-1) for m in mesh] + [wigner.values.reshape(-1)])
        header = {
            "kind": "wigner",
            "dim": str(d),
            "x_range": f"{wigner.x_axis[0]!r},{wigner.x_axis[-1]!r}",
            "v_range": f"{wigner.v_axis[0]!r},{wigner.v_axis[-1]!r}",
            "counts": f"{len(wigner.x_axis)},{len(wigner.v_axis)}",
            **CONVENTION_HEADER,
            **(extra or {}),
        }
        columns = [f"x{i + 1}" for i in range(d)] + [f"v{i + 1}" for i in range(d)] + ["W"]
        return self._write(path, header, columns, data)

    def write_density(self, path, values: np.ndarray, x_axis: np.ndarray, v_axis: np.ndarray,
                      dim: int, extra: Dict[str, str] | None = None) -> Path:
        axes = [x_axis] * dim + [v_axis] * dim
        mesh = np.meshgrid(*axes, indexing="ij")
        data = np.column_stack([m.reshape(-1) for m in mesh] + [values.reshape(-1)])
        header = {
            "kind": "classical_density",
            "dim": str(dim),
            "counts": f"{len(x_axis)},{len(v_axis)}",
            "density_normalization": "sum(density)*cell_volume=1",
            **CONVENTION_HEADER,
            **(extra or {}),
        }
        columns = [f"x{i + 1}" for i in range(dim)] + [f"v{i + 1}" for i in range(dim)] + ["density"]
        return self._write(path, header, columns, data)
