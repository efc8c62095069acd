# noise/domain/model/valueobjects/jump_measure.py

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Tuple

import numpy as np

from shared.domain.exceptions import ParameterValidationError

DENSITY_SYMMETRY_TOLERANCE = 1e-9


class JumpKind(str, Enum):
    EMPTY = "EMPTY"
    ATOMS = "ATOMS"
    MOMENTUM_ONLY = "MOMENTUM_ONLY"
    POSITION_ONLY = "POSITION_ONLY"
    GRID_DENSITY = "GRID_DENSITY"


@dataclass(frozen=True, eq=False)
class JumpMeasure:
    """
    Medida de saltos μ sobre ℝ^{2d}, guardada como lista de átomos.

    `displacements` tiene filas (x, k) y `weights` las intensidades. Los
    átomos dados por el usuario se guardan en pares ± con el mismo peso; las
    densidades se discretizan por punto medio (peso = densidad × celda) y se
    exige simetría respecto al origen.
    """
    kind: JumpKind
    dim: int
    displacements: np.ndarray
    weights: np.ndarray
    is_density: bool = False

    def __post_init__(self):
        displacements = np.asarray(self.displacements, dtype=float).reshape(-1, 2 * self.dim)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if len(weights) != len(displacements):
            raise ParameterValidationError(["atom count and weight count differ"])
        if np.any(weights <= 0):
            raise ParameterValidationError(["jump weights must be > 0"])
        if not np.all(np.isfinite(displacements)):
            raise ParameterValidationError(["jump displacements must be finite"])
        displacements.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "displacements", displacements)
        object.__setattr__(self, "weights", weights)

    # ------------------------------------------------------------------
    # Constructores
    # ------------------------------------------------------------------

    @classmethod
    def empty(cls, dim: int) -> "JumpMeasure":
        return cls(JumpKind.EMPTY, dim, np.zeros((0, 2 * dim)), np.zeros(0))

    @classmethod
    def atoms(cls, dim: int, entries: Iterable[Tuple[Sequence[float], Sequence[float], float]]) -> "JumpMeasure":
        """Cada entrada (x, k, w) aporta los átomos ±(x, k), ambos con peso w"""
        rows, weights = _mirrored(dim, [
            (np.concatenate([np.atleast_1d(np.asarray(x, float)), np.atleast_1d(np.asarray(k, float))]), w)
            for x, k, w in entries
        ])
        if not rows:
            return cls.empty(dim)
        return cls(_classify(np.array(rows), dim), dim, np.array(rows), np.array(weights))

    @classmethod
    def momentum_only(cls, dim: int, entries: Iterable[Tuple[Sequence[float], float]]) -> "JumpMeasure":
        """μ = δ(x)ν(k) con ν atómica: entradas (k, w), reflejadas en ±k"""
        return cls._single_block(dim, entries, momentum=True)

    @classmethod
    def position_only(cls, dim: int, entries: Iterable[Tuple[Sequence[float], float]]) -> "JumpMeasure":
        """μ = ν(x)δ(k) con ν atómica: entradas (x, w), reflejadas en ±x"""
        return cls._single_block(dim, entries, momentum=False)

    @classmethod
    def _single_block(cls, dim, entries, momentum: bool) -> "JumpMeasure":
        rows = []
        for value, weight in entries:
            value = np.atleast_1d(np.asarray(value, float))
            zeros = np.zeros(dim)
            rows.append((np.concatenate([zeros, value]) if momentum else np.concatenate([value, zeros]), weight))
        mirrored_rows, weights = _mirrored(dim, rows)
        if not mirrored_rows:
            return cls.empty(dim)
        kind = JumpKind.MOMENTUM_ONLY if momentum else JumpKind.POSITION_ONLY
        return cls(kind, dim, np.array(mirrored_rows), np.array(weights))

    @classmethod
    def momentum_density(cls, axis: np.ndarray, density: np.ndarray) -> "JumpMeasure":
        """ν(k) muestreada en una malla regular de ℝ^d (mismo eje en cada componente)"""
        return cls._block_density(axis, density, momentum=True)

    @classmethod
    def position_density(cls, axis: np.ndarray, density: np.ndarray) -> "JumpMeasure":
        return cls._block_density(axis, density, momentum=False)

    @classmethod
    def _block_density(cls, axis, density, momentum: bool) -> "JumpMeasure":
        axis = np.asarray(axis, float)
        density = np.asarray(density, float)
        dim = density.ndim
        points, weights = _discretize_density([axis] * dim, density)
        zeros = np.zeros_like(points)
        rows = np.hstack([zeros, points]) if momentum else np.hstack([points, zeros])
        kind = JumpKind.MOMENTUM_ONLY if momentum else JumpKind.POSITION_ONLY
        if len(weights) == 0:
            return cls.empty(dim)
        return cls(kind, dim, rows, weights, is_density=True)

    @classmethod
    def grid_density(cls, x_axis: np.ndarray, k_axis: np.ndarray, density: np.ndarray) -> "JumpMeasure":
        """Densidad sobre una caja de ℝ^{2d}, ejes (x₁..x_d, k₁..k_d)"""
        density = np.asarray(density, float)
        if density.ndim % 2:
            raise ParameterValidationError(["grid density must have 2d axes"])
        dim = density.ndim // 2
        axes = [np.asarray(x_axis, float)] * dim + [np.asarray(k_axis, float)] * dim
        rows, weights = _discretize_density(axes, density)
        if len(weights) == 0:
            return cls.empty(dim)
        return cls(JumpKind.GRID_DENSITY, dim, rows, weights, is_density=True)

    # ------------------------------------------------------------------
    # Consultas estructurales
    # ------------------------------------------------------------------

    @property
    def position_jumps(self) -> np.ndarray:
        return self.displacements[:, :self.dim]

    @property
    def momentum_jumps(self) -> np.ndarray:
        return self.displacements[:, self.dim:]

    @property
    def total_rate(self) -> float:
        return float(np.sum(self.weights))

    @property
    def is_empty(self) -> bool:
        return len(self.weights) == 0

    def moves_position(self) -> bool:
        return bool(np.any(self.position_jumps != 0.0))

    def moves_momentum(self) -> bool:
        return bool(np.any(self.momentum_jumps != 0.0))

    def describe(self) -> dict:
        return {
            "kind": self.kind.value,
            "atoms": int(len(self.weights)),
            "total_rate": self.total_rate,
            "is_density": self.is_density,
        }


def _mirrored(dim, rows):
    out_rows, out_weights = [], []
    for row, weight in rows:
        if row.size != 2 * dim:
            raise ParameterValidationError([f"atom {row.tolist()} does not have {2 * dim} coordinates"])
        if weight <= 0:
            raise ParameterValidationError([f"atom weight must be > 0, got {weight}"])
        out_rows.extend([row, -row])
        out_weights.extend([float(weight), float(weight)])
    return out_rows, out_weights


def _classify(rows: np.ndarray, dim: int) -> JumpKind:
    if np.all(rows[:, :dim] == 0.0):
        return JumpKind.MOMENTUM_ONLY
    if np.all(rows[:, dim:] == 0.0):
        return JumpKind.POSITION_ONLY
    return JumpKind.ATOMS


def _discretize_density(axes, density):
    for axis_index, axis in enumerate(axes):
        if density.shape[axis_index] != len(axis):
            raise ParameterValidationError([f"density axis {axis_index} has wrong length"])
        if not np.allclose(axis, -axis[::-1], atol=DENSITY_SYMMETRY_TOLERANCE):
            raise ParameterValidationError([f"density axis {axis_index} is not symmetric about 0"])
        if len(axis) < 2 or not np.allclose(np.diff(axis), axis[1] - axis[0]):
            raise ParameterValidationError([f"density axis {axis_index} must be uniform"])
    if np.any(density < 0):
        raise ParameterValidationError(["density must be nonnegative"])
    reflected = density[tuple(slice(None, None, -1) for _ in range(density.ndim))]
    if np.max(np.abs(reflected - density)) > DENSITY_SYMMETRY_TOLERANCE:
        raise ParameterValidationError(["density is not symmetric about the origin"])
    cell = float(np.prod([axis[1] - axis[0] for axis in axes]))
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.column_stack([m.reshape(-1) for m in mesh])
    weights = density.reshape(-1) * cell
    keep = weights > 0
    return points[keep], weights[keep]
