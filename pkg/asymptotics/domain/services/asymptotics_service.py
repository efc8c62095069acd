# asymptotics/domain/services/asymptotics_service.py

import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from asymptotics.domain.model.valueobjects.asymptotic_prediction import (
    AsymptoticPrediction, NoiseRegime, PowerLawFit
)
from gaussian_states.domain.model.valueobjects.gaussian_kernel_params import (
    GaussianKernelParams1D, GaussianKernelParamsND
)
from gaussian_states.domain.services.gaussian_state_service import GaussianStateService
from noise.domain.model.aggregates.noise_spec import NoiseSpec
from noise.domain.services.levy_exponent_service import LevyExponentService
from phase_space.domain.model.valueobjects.characteristic_function import (
    AnalyticCharFn, CharFn, SampledCharFn
)
from phase_space.domain.services.phase_quadrature_service import PhaseQuadratureService
from shared.domain.exceptions import (
    DomainError, SingularMatrixError, TruncationError, UnsupportedOperationError, UnsupportedRegimeError
)
from shared.infrastructure.settings import settings

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 4

InitialState = Union[CharFn, GaussianKernelParams1D, GaussianKernelParamsND]


class AsymptoticsService:
    """
    Predicciones cerradas para los tres regímenes de ruido y diagnósticos
    de relajación:

    - saltos/difusión solo en momento (slot q): S ≈ √3·tr(Σ_q⁻¹)^{1/2}/tr(Σ_q)^{1/2}·t^{-2}
    - solo en posición (slot p): S ≈ tr(Σ_p⁻¹)^{1/2}/(2√2·σ_ρ)·t^{-1/2}
    - ambos: misma ley que el primer caso

    con Σ_q = A^{x,x} + B^{x,x} y Σ_p = A^{k,k} + B^{k,k} en el
    emparejamiento de slots adoptado, y σ_ρ la dispersión de |ρ(k,k)|²
    alrededor de ⟨K⟩. Para t grande φ_t(q,p) ≈ e^{-t⟨p|Σ_p p⟩/2}φ₀(q+tp, 0):
    el conmutador crece como t^{1/2} por el ancho en p y el anticonmutador
    como t·‖∂φ₀(·,0)‖, que es σ_ρ por Parseval.
    """

    def __init__(self, levy: Optional[LevyExponentService] = None,
                 states: Optional[GaussianStateService] = None,
                 quadrature: Optional[PhaseQuadratureService] = None):
        self.levy = levy or LevyExponentService()
        self.states = states or GaussianStateService(self.levy)
        self.quadrature = quadrature or PhaseQuadratureService()

    # ------------------------------------------------------------------
    # Clasificación
    # ------------------------------------------------------------------

    def classify(self, noise: NoiseSpec) -> NoiseRegime:
        q_active = bool(np.any(noise.xx != 0.0)) or noise.jump.moves_momentum()
        p_active = bool(np.any(noise.kk != 0.0)) or noise.jump.moves_position()
        cross = bool(np.any(noise.xk != 0.0))
        if q_active and p_active:
            return NoiseRegime.BOTH
        if cross:
            raise UnsupportedRegimeError(
                "cross-diffusion A^{x,k} without both diagonal sectors active is outside the three regimes"
            )
        if q_active:
            return NoiseRegime.MOMENTUM_JUMPS
        if p_active:
            return NoiseRegime.POSITION_JUMPS
        raise UnsupportedRegimeError("zero noise has no decoherence asymptotics")

    def slot_blocks(self, noise: NoiseSpec) -> Tuple[np.ndarray, np.ndarray]:
        """(Σ_q, Σ_p): bloques diagonales de A + B en el orden de slots"""
        d = noise.dim
        combined = noise.diffusion + self.levy.second_moment_matrix(noise.jump).slot_matrix()
        return combined[:d, :d], combined[d:, d:]

    def classify_and_predict(self, noise: NoiseSpec, initial: Optional[InitialState] = None) -> AsymptoticPrediction:
        regime = self.classify(noise)
        sigma_q, sigma_p = self.slot_blocks(noise)
        if regime is NoiseRegime.POSITION_JUMPS:
            if initial is None:
                raise DomainError("the position-jump law needs the initial state")
            inverse_trace = _inverse_trace(sigma_p, "A^{k,k}+B^{k,k}")
            self._warn_if_not_definite(noise.kk, "A^{k,k}")
            spread = self.momentum_spread(self._as_charfn(initial))
            if spread <= 0:
                raise DomainError("the initial momentum diagonal has zero spread")
            coefficient = math.sqrt(inverse_trace) / (2.0 * math.sqrt(2.0) * spread)
            prediction = AsymptoticPrediction(regime=regime, power=-0.5, coefficient=coefficient, error_order=-1.0)
        else:
            inverse_trace = _inverse_trace(sigma_q, "A^{x,x}+B^{x,x}")
            self._warn_if_not_definite(noise.xx, "A^{x,x}")
            coefficient = math.sqrt(3.0) * math.sqrt(inverse_trace) / math.sqrt(float(np.trace(sigma_q)))
            prediction = AsymptoticPrediction(regime=regime, power=-2.0, coefficient=coefficient, error_order=-2.5)
        logger.info("Regime %s: S(t) ~ %.6g t^%g", regime.value, prediction.coefficient, prediction.power)
        return prediction

    @staticmethod
    def _warn_if_not_definite(block: np.ndarray, name: str) -> None:
        if float(np.min(np.linalg.eigvalsh(block))) <= 0:
            logger.warning("%s is not positive definite; the law relies on the jump second moments", name)

    def _as_charfn(self, initial: InitialState) -> CharFn:
        if isinstance(initial, CharFn):
            return initial
        return self.states.gaussian_charfn(initial)

    # ------------------------------------------------------------------
    # Diagonal en momentos
    # ------------------------------------------------------------------

    def momentum_diagonal(self, phi: CharFn, points: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        ρ(k,k) = (2π)^{-d} ∫ dq e^{-iq·k} φ(q, 0) por FFT. Devuelve el eje k
        y el arreglo real con forma (N,)*d.
        """
        d = phi.dim
        if d > 2:
            raise UnsupportedOperationError("momentum diagonals are available for d <= 2")
        points = points or (settings.GRID_POINTS_1D if d == 1 else settings.GRID_POINTS_2D)
        if isinstance(phi, SampledCharFn):
            return self._sampled_momentum_diagonal(phi)
        half_width = settings.DEFAULT_HALF_WIDTH
        if phi.envelope is not None:
            smallest = float(np.min(np.linalg.eigvalsh(phi.envelope[:d, :d])))
            if smallest > 0:
                half_width = settings.QUADRATURE_HALF_WIDTH / math.sqrt(smallest)
        for _ in range(settings.MAX_WIDTH_DOUBLINGS + 1):
            axis = (np.arange(points) - points // 2) * (2.0 * half_width / points)
            mesh = np.meshgrid(*([axis] * d), indexing="ij")
            q = np.column_stack([m.reshape(-1) for m in mesh])
            values = phi.evaluate(q, np.zeros_like(q)).reshape((points,) * d)
            boundary = _edge_magnitude(values)
            if boundary < settings.BOUNDARY_TOLERANCE:
                return _slice_to_diagonal(values, axis, d)
            half_width *= 2.0
        raise TruncationError(
            f"phi(q, 0) does not decay below {settings.BOUNDARY_TOLERANCE:g} on the momentum slice",
            boundary_magnitude=boundary,
        )

    @staticmethod
    def _sampled_momentum_diagonal(phi: SampledCharFn):
        grid = phi.grid
        d = grid.dim
        index = (slice(None),) * d + (grid.points_p // 2,) * d
        values = phi.values[index]
        if _edge_magnitude(values) >= settings.BOUNDARY_TOLERANCE:
            raise TruncationError("sampled momentum slice does not decay at the grid boundary")
        return _slice_to_diagonal(values, grid.axis_q(), d)

    def momentum_spread(self, phi: CharFn) -> float:
        """(∫|ρ(k,k)|²|k - ⟨K⟩|² / ∫|ρ(k,k)|²)^{1/2}"""
        k_axis, diagonal = self.momentum_diagonal(phi)
        d = phi.dim
        mesh = np.meshgrid(*([k_axis] * d), indexing="ij")
        k = np.stack(mesh, axis=-1)
        cell = (k_axis[1] - k_axis[0]) ** d
        mean = np.tensordot(diagonal, k, axes=(tuple(range(d)), tuple(range(d)))) * cell
        weight = diagonal ** 2
        spread = np.sum(weight * np.sum((k - mean) ** 2, axis=-1)) / np.sum(weight)
        return math.sqrt(float(spread))

    # ------------------------------------------------------------------
    # Relajación
    # ------------------------------------------------------------------

    def relaxation_distance(self, phi_t: CharFn, noise: NoiseSpec, t: float) -> float:
        """‖φ_t - φ_{ρ̃_t}‖₂ / ‖φ_{ρ̃_t}‖₂"""
        if t <= 0:
            raise DomainError(f"time must be > 0, got {t}")
        regime = self.classify(noise)
        if regime is NoiseRegime.POSITION_JUMPS:
            raise UnsupportedRegimeError("relaxation toward the Gaussian family needs momentum-sector noise")
        reference = self.states.relaxation_charfn(noise, t)
        reference_norm = self.quadrature.hs_norm(reference)
        if isinstance(phi_t, SampledCharFn):
            sampled_reference = self.quadrature.sample(reference, phi_t.grid)
            difference = phi_t.with_values(phi_t.values - sampled_reference.values, is_state=False)
        else:
            difference = AnalyticCharFn.mixture([1.0, -1.0], [phi_t, reference])
        distance = self.quadrature.hs_norm(difference) / reference_norm
        logger.debug("Relaxation distance at t=%g: %.6e", t, distance)
        return distance

    # ------------------------------------------------------------------
    # Ajuste de leyes de potencia
    # ------------------------------------------------------------------

    @staticmethod
    def powerlaw_fit(series: Sequence[Tuple[float, float]]) -> PowerLawFit:
        data = np.asarray(series, dtype=float).reshape(-1, 2)
        if len(data) < MIN_FIT_POINTS:
            raise DomainError(f"power-law fits need at least {MIN_FIT_POINTS} points, got {len(data)}")
        times, values = data[:, 0], data[:, 1]
        if np.any(values <= 0) or np.any(times <= 0):
            raise DomainError("power-law fits need positive times and values")
        if np.any(np.diff(times) <= 0):
            raise DomainError("times must be strictly increasing")
        tail_t, tail_s = times[len(data) // 2:], values[len(data) // 2:]
        power, intercept = np.polyfit(np.log(tail_t), np.log(tail_s), 1)
        coefficient = math.exp(intercept)
        residual = float(np.max(np.abs(coefficient * tail_t ** power / tail_s - 1.0)))
        return PowerLawFit(power=float(power), coefficient=coefficient, residual=residual,
                           points_used=len(tail_t))


def _inverse_trace(block: np.ndarray, name: str) -> float:
    try:
        np.linalg.cholesky(block)
    except np.linalg.LinAlgError as error:
        raise SingularMatrixError(f"{name} must be positive definite") from error
    return float(np.trace(np.linalg.inv(block)))


def _edge_magnitude(values: np.ndarray) -> float:
    return max(float(np.max(np.abs(np.take(values, edge, axis=axis))))
               for axis in range(values.ndim) for edge in (0, -1))


def _slice_to_diagonal(values: np.ndarray, q_axis: np.ndarray, d: int):
    n = len(q_axis)
    spacing = q_axis[1] - q_axis[0]
    axes = tuple(range(d))
    # ρ(k,k) = (2π)^{-d} Σ φ(q,0) e^{-iq·k} Δq^d
    spectrum = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(values, axes=axes), axes=axes), axes=axes)
    diagonal = np.real(spectrum) * (spacing / (2.0 * math.pi)) ** d
    k_axis = (np.arange(n) - n // 2) * (2.0 * math.pi / (n * spacing))
    return k_axis, diagonal
