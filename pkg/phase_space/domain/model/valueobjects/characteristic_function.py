# phase_space/domain/model/valueobjects/characteristic_function.py

"""
Funciones características cuánticas φ(q,p) = Tr[exp(i q·K + i p·X) ρ].

Hay tres representaciones:
- AnalyticCharFn: un callable vectorizado, opcionalmente con gradiente.
- GaussianCharFn: exp(-½ zᵀMz + i ζ·z) con z = (q, p), cerrada bajo la
  evolución sin saltos.
- SampledCharFn: arreglo complejo sobre una PhaseGrid.
"""

from abc import ABC, abstractmethod
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from phase_space.domain.model.valueobjects.phase_grid import PhaseGrid
from shared.domain.exceptions import UnsupportedOperationError

PointFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
GradientFn = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]

STATE_NORMALIZATION_TOLERANCE = 1e-9


class CharFn(ABC):
    """Contrato común de las funciones características"""

    def __init__(self, dim: int, is_state: bool):
        self.dim = dim
        self.is_state = is_state

    # --- evaluación en lotes (n, d) -------------------------------------

    @abstractmethod
    def evaluate(self, q: np.ndarray, p: np.ndarray) -> np.ndarray:
        """Evalúa en lotes: q y p con forma (n, d); devuelve (n,) complejo"""

    def evaluate_gradient(self, q: np.ndarray, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        raise UnsupportedOperationError(
            f"{type(self).__name__} has no registered gradient"
        )

    def evaluate_with_gradient(self, q: np.ndarray, p: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        grad_q, grad_p = self.evaluate_gradient(q, p)
        return self.evaluate(q, p), grad_q, grad_p

    @property
    def has_gradient(self) -> bool:
        return False

    @property
    def envelope(self) -> Optional[np.ndarray]:
        """Precisión 2d×2d de la envolvente gaussiana de |φ|, si se conoce"""
        return None

    # --- interfaz de conveniencia --------------------------------------

    def _batch(self, q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        if self.dim == 1:
            q, p = np.broadcast_arrays(q, p)
            batch_shape = q.shape
            return q.reshape(-1, 1), p.reshape(-1, 1), batch_shape
        q = np.atleast_1d(q)
        p = np.atleast_1d(p)
        q, p = np.broadcast_arrays(q, p)
        batch_shape = q.shape[:-1]
        return q.reshape(-1, self.dim), p.reshape(-1, self.dim), batch_shape

    def __call__(self, q, p):
        qb, pb, batch_shape = self._batch(q, p)
        values = self.evaluate(qb, pb).reshape(batch_shape)
        return complex(values) if batch_shape == () else values

    def gradient(self, q, p) -> Tuple[np.ndarray, np.ndarray]:
        """(∇_q φ, ∇_p φ) con forma batch + (d,)"""
        qb, pb, batch_shape = self._batch(q, p)
        grad_q, grad_p = self.evaluate_gradient(qb, pb)
        return (grad_q.reshape(batch_shape + (self.dim,)),
                grad_p.reshape(batch_shape + (self.dim,)))

    def value_at_origin(self) -> complex:
        zero = np.zeros((1, self.dim))
        return complex(self.evaluate(zero, zero)[0])

    def check_state(self) -> bool:
        return abs(self.value_at_origin() - 1.0) <= STATE_NORMALIZATION_TOLERANCE

    def hermitian_defect(self, q: np.ndarray, p: np.ndarray) -> float:
        """max |φ(-z) - conj φ(z)| sobre los puntos dados"""
        forward = self.evaluate(q, p)
        backward = self.evaluate(-q, -p)
        return float(np.max(np.abs(backward - np.conj(forward)))) if len(forward) else 0.0


class AnalyticCharFn(CharFn):
    """Callable arbitrario con gradiente y envolvente opcionales"""

    def __init__(self, dim: int, fn: PointFn, is_state: bool = True,
                 gradient_fn: Optional[GradientFn] = None,
                 envelope: Optional[np.ndarray] = None):
        super().__init__(dim, is_state)
        self._fn = fn
        self._gradient_fn = gradient_fn
        self._envelope = None if envelope is None else np.asarray(envelope, dtype=float)

    def evaluate(self, q, p):
        return np.asarray(self._fn(q, p), dtype=complex)

    def evaluate_gradient(self, q, p):
        if self._gradient_fn is None:
            return super().evaluate_gradient(q, p)
        return self._gradient_fn(q, p)

    @property
    def has_gradient(self) -> bool:
        return self._gradient_fn is not None

    @property
    def envelope(self):
        return self._envelope

    @classmethod
    def zero(cls, dim: int) -> "AnalyticCharFn":
        return cls(dim, lambda q, p: np.zeros(len(q), dtype=complex), is_state=False,
                   gradient_fn=lambda q, p: (np.zeros(q.shape, dtype=complex),
                                             np.zeros(p.shape, dtype=complex)))

    @classmethod
    def mixture(cls, weights: Sequence[float], components: Sequence[CharFn]) -> "AnalyticCharFn":
        """Combinación convexa (o lineal) de funciones características"""
        weights = [float(w) for w in weights]
        components = list(components)
        dim = components[0].dim
        if any(c.dim != dim for c in components):
            raise ValueError("All components must share the same dimension")

        def fn(q, p):
            return sum(w * c.evaluate(q, p) for w, c in zip(weights, components))

        gradient_fn = None
        if all(c.has_gradient for c in components):
            def gradient_fn(q, p):
                grads = [c.evaluate_gradient(q, p) for c in components]
                return (sum(w * g[0] for w, g in zip(weights, grads)),
                        sum(w * g[1] for w, g in zip(weights, grads)))

        envelopes = [c.envelope for c in components if c.envelope is not None]
        envelope = None
        if len(envelopes) == len(components):
            # la envolvente más ancha domina el soporte
            envelope = min(envelopes, key=lambda m: np.linalg.det(m))
        is_state = abs(sum(weights) - 1.0) <= STATE_NORMALIZATION_TOLERANCE and all(
            c.is_state for c in components)
        return cls(dim, fn, is_state, gradient_fn, envelope)


class GaussianCharFn(CharFn):
    """φ(z) = exp(-½ zᵀ M z + i ζ·z), M simétrica semidefinida positiva"""

    def __init__(self, precision: np.ndarray, linear: np.ndarray):
        precision = np.array(precision, dtype=float)
        linear = np.array(linear, dtype=float).reshape(-1)
        if precision.shape != (linear.size, linear.size) or linear.size % 2:
            raise ValueError("Precision must be 2d×2d and linear term 2d")
        super().__init__(linear.size // 2, True)
        self.precision = 0.5 * (precision + precision.T)
        self.linear = linear

    def evaluate(self, q, p):
        z = np.hstack([q, p])
        quadratic = np.einsum("ni,ij,nj->n", z, self.precision, z)
        return np.exp(-0.5 * quadratic + 1j * (z @ self.linear))

    def evaluate_gradient(self, q, p):
        z = np.hstack([q, p])
        values = self.evaluate(q, p)
        grad = (-(z @ self.precision) + 1j * self.linear) * values[:, None]
        return grad[:, :self.dim], grad[:, self.dim:]

    @property
    def has_gradient(self) -> bool:
        return True

    @property
    def envelope(self):
        return self.precision

    # --- transformaciones cerradas --------------------------------------

    def sheared(self, t: float) -> "GaussianCharFn":
        """z ↦ φ(q + t·p, p)"""
        shear = shear_matrix(self.dim, t)
        return GaussianCharFn(shear.T @ self.precision @ shear, shear.T @ self.linear)

    def with_added_precision(self, extra: np.ndarray) -> "GaussianCharFn":
        return GaussianCharFn(self.precision + extra, self.linear)

    def dilated(self, scale: float) -> "GaussianCharFn":
        """z ↦ φ(scale·q, p/scale): cambio de la unidad de longitud"""
        d = self.dim
        diag = np.diag(np.concatenate([np.full(d, scale), np.full(d, 1.0 / scale)]))
        return GaussianCharFn(diag @ self.precision @ diag, diag @ self.linear)

    def displaced(self, shift_x: np.ndarray, shift_k: np.ndarray) -> "GaussianCharFn":
        shift = np.concatenate([-np.asarray(shift_k, float).reshape(-1),
                                np.asarray(shift_x, float).reshape(-1)])
        return GaussianCharFn(self.precision, self.linear + shift)

    @property
    def mean_position(self) -> np.ndarray:
        return self.linear[self.dim:].copy()

    @property
    def mean_momentum(self) -> np.ndarray:
        return -self.linear[:self.dim].copy()


class SampledCharFn(CharFn):
    """Arreglo complejo sobre una malla sin marco (ejes alineados)"""

    def __init__(self, grid: PhaseGrid, values: np.ndarray, is_state: Optional[bool] = None):
        values = np.asarray(values, dtype=complex)
        if values.shape != grid.shape:
            raise ValueError(f"Values shape {values.shape} does not match grid {grid.shape}")
        if not grid.is_axis_aligned:
            raise ValueError("Sampled characteristic functions live on axis-aligned grids")
        self.grid = grid
        self.values = values
        if is_state is None:
            is_state = abs(values[grid.origin_index] - 1.0) <= STATE_NORMALIZATION_TOLERANCE
        super().__init__(grid.dim, is_state)

    def evaluate(self, q, p):
        indices = self._exact_indices(q, p)
        return self.values[indices]

    def _exact_indices(self, q, p):
        """Índices de malla de puntos que caen exactamente sobre la malla"""
        coords = np.hstack([q, p])
        idx = []
        for axis in range(2 * self.dim):
            spacing, n = ((self.grid.spacing_q, self.grid.points_q) if axis < self.dim
                          else (self.grid.spacing_p, self.grid.points_p))
            raw = coords[:, axis] / spacing + n // 2
            rounded = np.rint(raw)
            if np.any(np.abs(raw - rounded) > 1e-9) or np.any((rounded < 0) | (rounded >= n)):
                raise UnsupportedOperationError(
                    "Sampled characteristic functions are only defined on their grid points"
                )
            idx.append(rounded.astype(int))
        return tuple(idx)

    def value_at_origin(self) -> complex:
        return complex(self.values[self.grid.origin_index])

    def hermitian_grid_defect(self) -> float:
        """Defecto de simetría hermítica sobre la malla (excluye la fila -L sin pareja)"""
        inner = tuple(slice(1, None) for _ in range(2 * self.dim))
        block = self.values[inner]
        mirrored = block[tuple(slice(None, None, -1) for _ in range(2 * self.dim))]
        return float(np.max(np.abs(mirrored - np.conj(block))))

    def with_values(self, values: np.ndarray, is_state: Optional[bool] = None) -> "SampledCharFn":
        return SampledCharFn(self.grid, values, self.is_state if is_state is None else is_state)


def shear_matrix(dim: int, t: float) -> np.ndarray:
    """S tal que S·(q, p) = (q + t·p, p)"""
    shear = np.eye(2 * dim)
    shear[:dim, dim:] = t * np.eye(dim)
    return shear
