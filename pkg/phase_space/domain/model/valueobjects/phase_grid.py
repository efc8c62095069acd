# phase_space/domain/model/valueobjects/phase_grid.py

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

import numpy as np

from shared.domain.exceptions import GridError

SUPPORTED_GRID_DIMENSIONS = (1, 2)


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class PhaseGrid:
    """
    Malla uniforme del espacio de fases (q, p) con d componentes por eje.

    Los puntos de cada eje son (j - N/2)·Δ con Δ = 2L/N, de modo que el
    origen pertenece a la malla y el índice N/2 le corresponde.

    `frame` es una matriz opcional 2d×2d: las coordenadas de malla w se
    llevan al espacio de fases con z = frame·w. Solo se usa para cuadraturas
    en coordenadas blanqueadas; las transformadas FFT exigen frame=None.
    """
    dim: int
    half_width_q: float
    half_width_p: float
    points_q: int
    points_p: int
    frame: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dim not in SUPPORTED_GRID_DIMENSIONS:
            raise GridError(
                f"Grid transforms support d in {SUPPORTED_GRID_DIMENSIONS}, got d={self.dim}"
            )
        for name, n in (("points_q", self.points_q), ("points_p", self.points_p)):
            if n < 8 or not is_power_of_two(n):
                raise GridError(f"{name} must be a power of two >= 8, got {n}")
        if self.half_width_q <= 0 or self.half_width_p <= 0:
            raise GridError("Half-widths must be positive")
        if self.frame is not None:
            frame = np.array(self.frame, dtype=float)
            if frame.shape != (2 * self.dim, 2 * self.dim):
                raise GridError(f"Frame must be {2 * self.dim}x{2 * self.dim}")
            if abs(np.linalg.det(frame)) == 0.0:
                raise GridError("Frame must be invertible")
            frame.setflags(write=False)
            object.__setattr__(self, "frame", frame)

    @classmethod
    def square(cls, dim: int, half_width: float, points: int,
               frame: Optional[np.ndarray] = None) -> "PhaseGrid":
        return cls(dim, half_width, half_width, points, points, frame)

    # ------------------------------------------------------------------
    # Geometría
    # ------------------------------------------------------------------

    @property
    def spacing_q(self) -> float:
        return 2.0 * self.half_width_q / self.points_q

    @property
    def spacing_p(self) -> float:
        return 2.0 * self.half_width_p / self.points_p

    def axis_q(self) -> np.ndarray:
        return (np.arange(self.points_q) - self.points_q // 2) * self.spacing_q

    def axis_p(self) -> np.ndarray:
        return (np.arange(self.points_p) - self.points_p // 2) * self.spacing_p

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.points_q,) * self.dim + (self.points_p,) * self.dim

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def jacobian(self) -> float:
        return 1.0 if self.frame is None else float(abs(np.linalg.det(self.frame)))

    @property
    def cell_volume(self) -> float:
        return (self.spacing_q ** self.dim) * (self.spacing_p ** self.dim) * self.jacobian

    @property
    def is_axis_aligned(self) -> bool:
        return self.frame is None

    @property
    def origin_index(self) -> Tuple[int, ...]:
        return (self.points_q // 2,) * self.dim + (self.points_p // 2,) * self.dim

    def wigner_axes(self) -> Tuple[np.ndarray, np.ndarray]:
        """Ejes (x, v) conjugados: x es conjugado de p y v de q"""
        dx = 2.0 * math.pi / (self.points_p * self.spacing_p)
        dv = 2.0 * math.pi / (self.points_q * self.spacing_q)
        x_axis = (np.arange(self.points_p) - self.points_p // 2) * dx
        v_axis = (np.arange(self.points_q) - self.points_q // 2) * dv
        return x_axis, v_axis

    # ------------------------------------------------------------------
    # Puntos
    # ------------------------------------------------------------------

    def points_at(self, flat_indices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Coordenadas (q, p), cada una (n, d), de los índices planos dados"""
        multi = np.unravel_index(flat_indices, self.shape)
        d = self.dim
        w = np.empty((len(flat_indices), 2 * d))
        for axis in range(2 * d):
            spacing, n = (self.spacing_q, self.points_q) if axis < d else (self.spacing_p, self.points_p)
            w[:, axis] = (multi[axis] - n // 2) * spacing
        z = w if self.frame is None else w @ self.frame.T
        return z[:, :d], z[:, d:]

    def boundary_flat_indices(self) -> np.ndarray:
        """Índices planos de las caras de la malla (primer y último punto de cada eje)"""
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(2 * self.dim):
            edge = [slice(None)] * (2 * self.dim)
            edge[axis] = 0
            mask[tuple(edge)] = True
            edge[axis] = -1
            mask[tuple(edge)] = True
        return np.flatnonzero(mask)

    def tiles(self, tile_points: int) -> Iterator[np.ndarray]:
        """Particiona los índices planos en bloques contiguos"""
        for start in range(0, self.size, tile_points):
            yield np.arange(start, min(start + tile_points, self.size))

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """Malla completa con forma shape + (d,) para q y p"""
        q, p = self.points_at(np.arange(self.size))
        return q.reshape(self.shape + (self.dim,)), p.reshape(self.shape + (self.dim,))

    # ------------------------------------------------------------------
    # Variantes y comparación
    # ------------------------------------------------------------------

    def expanded(self, factor: float = 2.0) -> "PhaseGrid":
        return PhaseGrid(self.dim, self.half_width_q * factor, self.half_width_p * factor,
                         self.points_q, self.points_p, self.frame)

    def same_as(self, other: "PhaseGrid") -> bool:
        if (self.dim, self.points_q, self.points_p) != (other.dim, other.points_q, other.points_p):
            return False
        if not (math.isclose(self.half_width_q, other.half_width_q, rel_tol=1e-12)
                and math.isclose(self.half_width_p, other.half_width_p, rel_tol=1e-12)):
            return False
        if self.frame is None or other.frame is None:
            return self.frame is None and other.frame is None
        return bool(np.allclose(self.frame, other.frame, rtol=1e-12, atol=0.0))

    def describe(self) -> dict:
        return {
            "dim": self.dim,
            "q_range": [-self.half_width_q, self.half_width_q],
            "p_range": [-self.half_width_p, self.half_width_p],
            "counts": [self.points_q, self.points_p],
            "whitened": self.frame is not None,
        }
