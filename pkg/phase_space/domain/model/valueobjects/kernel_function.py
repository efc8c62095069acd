from dataclasses import dataclass
from typing import Sequence

import numpy as np

from shared.domain.exceptions import GridError


@dataclass(frozen=True, eq=False)
class KernelFn:
    """
    Núcleo integral ρ(x₁, x₂) en la base de posiciones (solo d=1).

    Los puntos son x_j = (j - N/2)·Δx con Δx = 2L/N.
    """
    values: np.ndarray
    half_width: float
    points: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.points, self.points):
            raise GridError(f"Kernel must be {self.points}x{self.points}, got {values.shape}")
        if self.half_width <= 0:
            raise GridError("Kernel half-width must be positive")
        object.__setattr__(self, "values", values)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    def axis(self) -> np.ndarray:
        return (np.arange(self.points) - self.points // 2) * self.spacing

    def trace(self) -> complex:
        return complex(self.spacing * np.trace(self.values))

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.values)).copy()

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.values - np.conj(self.values.T))))

    def represents_state(self, tolerance: float = 1e-6) -> bool:
        return abs(self.trace() - 1.0) <= tolerance and self.hermitian_defect() <= 1e-9

    def scaled(self, factor: float) -> "KernelFn":
        return KernelFn(self.values * factor, self.half_width, self.points)

    @staticmethod
    def combine(weights: Sequence[float], kernels: Sequence["KernelFn"]) -> "KernelFn":
        first = kernels[0]
        if any(k.points != first.points or k.half_width != first.half_width for k in kernels):
            raise GridError("Kernels must share the same position grid")
        values = sum(w * k.values for w, k in zip(weights, kernels))
        return KernelFn(values, first.half_width, first.points)
