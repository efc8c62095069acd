from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class ClassicalDensity:
    """Histograma normalizado p_t(x, v) sobre los ejes de Wigner de una malla"""
    values: np.ndarray
    x_axis: np.ndarray
    v_axis: np.ndarray
    dim: int
    in_range_fraction: float

    @property
    def cell_volume(self) -> float:
        return float(((self.x_axis[1] - self.x_axis[0]) * (self.v_axis[1] - self.v_axis[0])) ** self.dim)

    def total(self) -> float:
        return float(np.sum(self.values) * self.cell_volume)

    def momentum_marginal(self) -> np.ndarray:
        """∫ p_t dx, sobre el eje v (solo d=1)"""
        return np.sum(self.values, axis=0) * (self.x_axis[1] - self.x_axis[0])
