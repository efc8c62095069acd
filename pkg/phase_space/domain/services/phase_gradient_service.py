# phase_space/domain/services/phase_gradient_service.py

from enum import Enum
from typing import Tuple

import numpy as np

from phase_space.domain.model.valueobjects.characteristic_function import (
    AnalyticCharFn, CharFn, SampledCharFn
)
from shared.domain.exceptions import GridError, UnsupportedOperationError


class PhaseAxis(str, Enum):
    Q = "q"
    P = "p"


class PhaseGradientService:
    """
    Gradientes de funciones características: analíticos cuando están
    registrados, espectrales (FFT) sobre mallas muestreadas.
    """

    def phase_gradient(self, phi: CharFn, axis: PhaseAxis, component: int = 0) -> CharFn:
        axis = PhaseAxis(axis)
        if not 0 <= component < phi.dim:
            raise GridError(f"Component {component} out of range for d={phi.dim}")
        if isinstance(phi, SampledCharFn):
            array_axis = component if axis is PhaseAxis.Q else phi.dim + component
            spacing = phi.grid.spacing_q if axis is PhaseAxis.Q else phi.grid.spacing_p
            derivative = spectral_derivative(phi.values, array_axis, spacing)
            return SampledCharFn(phi.grid, derivative, is_state=False)
        if not phi.has_gradient:
            raise UnsupportedOperationError(
                f"{type(phi).__name__} is analytic but has no registered derivative"
            )
        slot = 0 if axis is PhaseAxis.Q else 1

        def fn(q, p):
            return phi.evaluate_gradient(q, p)[slot][:, component]

        return AnalyticCharFn(phi.dim, fn, is_state=False)

    def origin_gradient(self, phi: CharFn) -> Tuple[np.ndarray, np.ndarray]:
        """(v_q, v_p) = (∇_q φ(0,0), ∇_p φ(0,0))"""
        if phi.has_gradient:
            zero = np.zeros((1, phi.dim))
            grad_q, grad_p = phi.evaluate_gradient(zero, zero)
            return grad_q[0], grad_p[0]
        if isinstance(phi, SampledCharFn):
            return self._stencil_origin_gradient(phi)
        raise UnsupportedOperationError("Origin gradient needs a registered gradient or a sampled grid")

    @staticmethod
    def _stencil_origin_gradient(phi: SampledCharFn) -> Tuple[np.ndarray, np.ndarray]:
        # 5 puntos centrados con h = espaciado de malla
        grid = phi.grid
        origin = grid.origin_index
        gradients = np.zeros(2 * phi.dim, dtype=complex)
        for axis in range(2 * phi.dim):
            h = grid.spacing_q if axis < phi.dim else grid.spacing_p

            def at(offset):
                index = list(origin)
                index[axis] += offset
                return phi.values[tuple(index)]

            gradients[axis] = (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h)
        return gradients[:phi.dim], gradients[phi.dim:]


def spectral_derivative(values: np.ndarray, axis: int, spacing: float) -> np.ndarray:
    n = values.shape[axis]
    wavenumbers = 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)
    wavenumbers[n // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = n
    spectrum = np.fft.fft(values, axis=axis)
    return np.fft.ifft(1j * wavenumbers.reshape(shape) * spectrum, axis=axis)
