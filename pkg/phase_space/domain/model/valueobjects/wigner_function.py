from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class WignerFn:
    """
    Función de Wigner W(x, v) real sobre la malla conjugada.

    Los ejes del arreglo son (x₁..x_d, v₁..v_d); `imaginary_residue` guarda el
    máximo residuo imaginario descartado en la transformada.
    """
    values: np.ndarray
    x_axis: np.ndarray
    v_axis: np.ndarray
    dim: int
    imaginary_residue: float = 0.0

    @property
    def spacing_x(self) -> float:
        return float(self.x_axis[1] - self.x_axis[0])

    @property
    def spacing_v(self) -> float:
        return float(self.v_axis[1] - self.v_axis[0])

    @property
    def cell_volume(self) -> float:
        return (self.spacing_x ** self.dim) * (self.spacing_v ** self.dim)

    def total(self) -> float:
        return float(np.sum(self.values) * self.cell_volume)

    def same_axes(self, x_axis: np.ndarray, v_axis: np.ndarray) -> bool:
        return (len(x_axis) == len(self.x_axis) and len(v_axis) == len(self.v_axis)
                and np.allclose(x_axis, self.x_axis, rtol=1e-12, atol=1e-12)
                and np.allclose(v_axis, self.v_axis, rtol=1e-12, atol=1e-12))
