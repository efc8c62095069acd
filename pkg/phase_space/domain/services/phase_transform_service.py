# phase_space/domain/services/phase_transform_service.py

import logging
import math
from typing import Optional

import numpy as np

from phase_space.domain.model.valueobjects.characteristic_function import (
    AnalyticCharFn, CharFn, GaussianCharFn, SampledCharFn
)
from phase_space.domain.model.valueobjects.kernel_function import KernelFn
from phase_space.domain.model.valueobjects.phase_grid import PhaseGrid
from phase_space.domain.model.valueobjects.wigner_function import WignerFn
from phase_space.domain.services.phase_quadrature_service import (
    PhaseQuadratureService, check_sampled_decay
)
from shared.domain.exceptions import GridError, RangeError

logger = logging.getLogger(__name__)


class PhaseTransformService:
    """
    Transformadas núcleo ↔ función característica ↔ Wigner.

    Convención: φ(q,p) = e^{-(i/2)q·p} ∫dx e^{ip·x} ρ(x-q, x) y
    W(x,v) = (2π)^{-2d} ∫dq dp e^{-ip·x - iq·v} φ(q,p).
    """

    def __init__(self, quadrature: Optional[PhaseQuadratureService] = None):
        self.quadrature = quadrature or PhaseQuadratureService()

    # ------------------------------------------------------------------
    # Núcleo → función característica
    # ------------------------------------------------------------------

    @staticmethod
    def grid_for_kernel(kernel: KernelFn) -> PhaseGrid:
        """
        Malla cuyo eje q coincide con el eje del núcleo y cuyo eje x de Wigner
        reproduce las posiciones del núcleo (Δp = 2π/(N·Δx)).
        """
        half_width_p = math.pi / kernel.spacing
        return PhaseGrid(1, kernel.half_width, half_width_p, kernel.points, kernel.points)

    def kernel_to_charfn(self, kernel: KernelFn, grid: PhaseGrid) -> SampledCharFn:
        if grid.dim != 1 or not grid.is_axis_aligned:
            raise GridError("Kernel transforms need an axis-aligned d=1 grid")
        ratio = grid.spacing_q / kernel.spacing
        stride = int(round(ratio))
        if stride < 1 or abs(ratio - stride) > 1e-9 * ratio:
            raise RangeError(
                f"q spacing {grid.spacing_q:g} must be an integer multiple of the kernel "
                f"spacing {kernel.spacing:g}"
            )
        if grid.half_width_q > kernel.half_width * (1 + 1e-12):
            raise RangeError(
                f"q half-width {grid.half_width_q:g} exceeds the kernel half-width {kernel.half_width:g}",
                suggested_bounds=(-kernel.half_width, kernel.half_width),
            )

        x = kernel.axis()
        columns = np.arange(kernel.points)
        shifts = (np.arange(grid.points_q) - grid.points_q // 2) * stride
        rows = columns[None, :] - shifts[:, None]
        inside = (rows >= 0) & (rows < kernel.points)
        # shifted[i, j] = ρ(x_j - q_i, x_j)
        shifted = np.where(inside, kernel.values[np.clip(rows, 0, kernel.points - 1), columns[None, :]], 0.0)

        q_axis = grid.axis_q()
        p_axis = grid.axis_p()
        fourier = np.exp(1j * np.outer(x, p_axis)) * kernel.spacing
        values = (shifted @ fourier) * np.exp(-0.5j * np.outer(q_axis, p_axis))
        is_state = abs(kernel.trace() - 1.0) <= 1e-6
        return SampledCharFn(grid, values, is_state=is_state)

    @staticmethod
    def kernel_hs_norm(kernel: KernelFn) -> float:
        return math.sqrt(float(np.sum(np.abs(kernel.values) ** 2)) * kernel.spacing ** 2)

    # ------------------------------------------------------------------
    # Función característica → Wigner
    # ------------------------------------------------------------------

    def charfn_to_wigner(self, phi: CharFn, grid: Optional[PhaseGrid] = None) -> WignerFn:
        if isinstance(phi, SampledCharFn):
            sampled = phi
        else:
            if grid is None:
                raise GridError("Analytic characteristic functions need a grid for the Wigner transform")
            sampled = self.quadrature.sample(phi, grid)
        check_sampled_decay(sampled)

        grid = sampled.grid
        d = grid.dim
        axes = tuple(range(2 * d))
        transformed = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(sampled.values, axes=axes), axes=axes), axes=axes)
        transformed *= (grid.spacing_q * grid.spacing_p) ** d / (2.0 * math.pi) ** (2 * d)
        # ejes q → v y p → x; se reordenan a (x, v)
        transformed = np.transpose(transformed, list(range(d, 2 * d)) + list(range(d)))
        residue = float(np.max(np.abs(transformed.imag)))
        x_axis, v_axis = grid.wigner_axes()
        return WignerFn(np.ascontiguousarray(transformed.real), x_axis, v_axis, d, residue)

    @staticmethod
    def wigner_position_marginal(wigner: WignerFn) -> np.ndarray:
        """∫W(x,v) dv sobre el eje x"""
        d = wigner.dim
        return np.sum(wigner.values, axis=tuple(range(d, 2 * d))) * wigner.spacing_v ** d

    # ------------------------------------------------------------------
    # Desplazamientos de Weyl
    # ------------------------------------------------------------------

    @staticmethod
    def weyl_displace(phi: CharFn, shift_x, shift_k) -> CharFn:
        """
        Conjuga el estado con el desplazamiento (shift_x, shift_k):
        φ ↦ φ·exp(i(p·shift_x - q·shift_k)).
        """
        shift_x = np.asarray(shift_x, dtype=float).reshape(phi.dim)
        shift_k = np.asarray(shift_k, dtype=float).reshape(phi.dim)
        if isinstance(phi, GaussianCharFn):
            return phi.displaced(shift_x, shift_k)
        if isinstance(phi, SampledCharFn):
            q, p = phi.grid.mesh()
            phase = np.exp(1j * (p @ shift_x - q @ shift_k))
            return phi.with_values(phi.values * phase)

        def fn(q, p):
            return phi.evaluate(q, p) * np.exp(1j * (p @ shift_x - q @ shift_k))

        gradient_fn = None
        if phi.has_gradient:
            def gradient_fn(q, p):
                phase = np.exp(1j * (p @ shift_x - q @ shift_k))
                values = phi.evaluate(q, p)
                grad_q, grad_p = phi.evaluate_gradient(q, p)
                return ((grad_q - 1j * shift_k * values[:, None]) * phase[:, None],
                        (grad_p + 1j * shift_x * values[:, None]) * phase[:, None])

        return AnalyticCharFn(phi.dim, fn, phi.is_state, gradient_fn, phi.envelope)
