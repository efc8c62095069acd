from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    """
    B = ∫dμ (x,k)⊗(x,k), en el orden (x, k).

    `slot_matrix` reordena B al orden de los argumentos (q, p) de ψ_μ:
    como ψ_μ depende de q·k + p·x, el bloque B^{k,k} acompaña a q y B^{x,x}
    a p.
    """
    matrix: np.ndarray
    dim: int

    @property
    def xx(self) -> np.ndarray:
        return self.matrix[:self.dim, :self.dim]

    @property
    def xk(self) -> np.ndarray:
        return self.matrix[:self.dim, self.dim:]

    @property
    def kx(self) -> np.ndarray:
        return self.matrix[self.dim:, :self.dim]

    @property
    def kk(self) -> np.ndarray:
        return self.matrix[self.dim:, self.dim:]

    def slot_matrix(self) -> np.ndarray:
        return np.block([[self.kk, self.kx], [self.xk, self.xx]])
