# gaussian_states/domain/model/valueobjects/gaussian_kernel_params.py

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict


class GaussianKernelParams1D(BaseModel):
    """
    ρ(x₁,x₂) = (2√C/√π) exp(-A(x₁-x₂)² - iB(x₁²-x₂²) - C(x₁+x₂)²
                             - iD(x₁-x₂) - E(x₁+x₂) - F)
    """
    model_config = ConfigDict(frozen=True)

    A: float
    B: float = 0.0
    C: float
    D: float = 0.0
    E: float = 0.0
    F: float = 0.0

    @classmethod
    def ground_state(cls) -> "GaussianKernelParams1D":
        return cls(A=0.25, C=0.25)


@dataclass(frozen=True, eq=False)
class GaussianKernelParamsND:
    """
    ρ(x₁,x₂) ∝ exp(-¼⟨u|a u⟩ - (i/2)⟨u|b w⟩ - ¼⟨w|c w⟩ + i m_k·u)
    con u = x₁ - x₂ y w = x₁ + x₂ - 2 m_x.
    """
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    m_x: np.ndarray
    m_k: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.a, dtype=float))
        d = a.shape[0]
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", np.atleast_2d(np.asarray(self.b, dtype=float)))
        object.__setattr__(self, "c", np.atleast_2d(np.asarray(self.c, dtype=float)))
        object.__setattr__(self, "m_x", np.zeros(d) if self.m_x is None
                           else np.atleast_1d(np.asarray(self.m_x, dtype=float)))
        object.__setattr__(self, "m_k", np.zeros(d) if self.m_k is None
                           else np.atleast_1d(np.asarray(self.m_k, dtype=float)))

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    @classmethod
    def centered(cls, a, b, c) -> "GaussianKernelParamsND":
        return cls(a, b, c, None, None)

    def as_tuple(self) -> tuple:
        return self.a, self.b, self.c
