# gaussian_states/domain/services/gaussian_state_service.py

import logging
import math
from typing import List, Tuple, Union

import numpy as np

from coherence.domain.model.valueobjects.index_report import IndexReport
from gaussian_states.domain.model.valueobjects.gaussian_kernel_params import (
    GaussianKernelParams1D, GaussianKernelParamsND
)
from noise.domain.model.aggregates.noise_spec import NoiseSpec
from noise.domain.services.levy_exponent_service import LevyExponentService
from phase_space.domain.model.valueobjects.characteristic_function import GaussianCharFn
from phase_space.domain.model.valueobjects.kernel_function import KernelFn
from shared.domain.exceptions import DomainError, ParameterValidationError, SingularMatrixError

logger = logging.getLogger(__name__)

GaussianParams = Union[GaussianKernelParams1D, GaussianKernelParamsND]

F_TOLERANCE = 1e-12
SYMMETRY_TOLERANCE = 1e-12
PSD_TOLERANCE = 1e-12

# Unidad de longitud de las fórmulas cerradas del estado de relajación
# respecto al propagador: φ_prop(q, p) = φ_formula(q/√2, √2·p)
RELAXATION_LENGTH_SCALE = 2.0 ** -0.5


class GaussianStateService:
    """
    Motor gaussiano único: valida parámetros de núcleo, los traduce a
    funciones características exp(-½zᵀMz + iζ·z) y de vuelta, y da las
    formas cerradas de los índices y de los estados límite.

    Diccionario 1-d → N-d: a = 4A, b = 2B, c = 4C, m_x = -E/(4C),
    m_k = EB/(2C) - D.

    Núcleo → función característica:
        M_qq = ½a + ½ b c⁻¹ bᵀ,  M_qp = ½ b c⁻¹,  M_pp = ½ c⁻¹,
        ζ = (-m_k, m_x).
    """

    def __init__(self, levy: LevyExponentService = None):
        self.levy = levy or LevyExponentService()

    # ------------------------------------------------------------------
    # Validación
    # ------------------------------------------------------------------

    def validate(self, params: GaussianParams) -> List[str]:
        """Lista de desigualdades violadas; vacía si los parámetros son válidos"""
        if isinstance(params, GaussianKernelParams1D):
            return _violations_1d(params)
        return _violations_nd(params)

    def ensure_valid(self, params: GaussianParams) -> GaussianKernelParamsND:
        violations = self.validate(params)
        if violations:
            raise ParameterValidationError(violations)
        return self.to_nd(params)

    @staticmethod
    def to_nd(params: GaussianParams) -> GaussianKernelParamsND:
        if isinstance(params, GaussianKernelParamsND):
            return params
        A, B, C, D, E = params.A, params.B, params.C, params.D, params.E
        return GaussianKernelParamsND(
            a=[[4.0 * A]], b=[[2.0 * B]], c=[[4.0 * C]],
            m_x=[-E / (4.0 * C)], m_k=[E * B / (2.0 * C) - D],
        )

    # ------------------------------------------------------------------
    # Función característica
    # ------------------------------------------------------------------

    def gaussian_charfn(self, params: GaussianParams) -> GaussianCharFn:
        nd = self.ensure_valid(params)
        precision, linear = charfn_coefficients(nd)
        return GaussianCharFn(precision, linear)

    @staticmethod
    def params_from_charfn(phi: GaussianCharFn) -> GaussianKernelParamsND:
        """Inversa del mapa núcleo → (M, ζ)"""
        d = phi.dim
        m = phi.precision
        m_qq, m_qp, m_pp = m[:d, :d], m[:d, d:], m[d:, d:]
        try:
            c = 0.5 * np.linalg.inv(m_pp)
        except np.linalg.LinAlgError as error:
            raise SingularMatrixError("M_pp block is singular") from error
        b = 2.0 * m_qp @ c
        a = 2.0 * m_qq - b @ np.linalg.solve(c, b.T)
        return GaussianKernelParamsND(
            a=_symmetrized(a), b=b, c=_symmetrized(c),
            m_x=phi.linear[d:], m_k=-phi.linear[:d],
        )

    def momentum_basis_params(self, params: GaussianParams) -> GaussianKernelParamsND:
        """
        Parámetros del mismo operador en la base de momentos. En términos de
        la función característica es el cambio q' = p, p' = -q.
        """
        phi = GaussianCharFn(*charfn_coefficients(self.to_nd(params)))
        d = phi.dim
        m = phi.precision
        rotated = np.block([
            [m[d:, d:], -m[d:, :d]],
            [-m[:d, d:], m[:d, :d]],
        ])
        linear = np.concatenate([phi.linear[d:], -phi.linear[:d]])
        return self.params_from_charfn(GaussianCharFn(rotated, linear))

    # ------------------------------------------------------------------
    # Índices en forma cerrada
    # ------------------------------------------------------------------

    def closed_form_index(self, params: GaussianParams) -> IndexReport:
        """Para 1-d: C_X = 1/(2√A), D_X = 1/(2√C), S_X = √(C/A)"""
        return gaussian_index(self.gaussian_charfn(params))

    # ------------------------------------------------------------------
    # Estados de relajación
    # ------------------------------------------------------------------

    def relaxation_block(self, noise: NoiseSpec) -> np.ndarray:
        """A^{x,x} + B^{x,x}: bloque del slot q de A + B"""
        d = noise.dim
        slot = self.levy.second_moment_matrix(noise.jump).slot_matrix()
        block = noise.xx + slot[:d, :d]
        try:
            np.linalg.cholesky(block)
        except np.linalg.LinAlgError as error:
            raise SingularMatrixError(
                "A^{x,x}+B^{x,x} must be positive definite for the relaxation state"
            ) from error
        return block

    def limit_state_position(self, noise: NoiseSpec, t: float) -> GaussianKernelParamsND:
        """a_t = tΣ, b_t = (3/t)I, c_t = (3/t³)Σ⁻¹ con Σ = A^{x,x} + B^{x,x}"""
        _check_positive_time(t)
        sigma = self.relaxation_block(noise)
        identity = np.eye(noise.dim)
        return GaussianKernelParamsND.centered(
            t * sigma, 3.0 / t * identity, 3.0 / t ** 3 * np.linalg.inv(sigma)
        )

    def limit_state_momentum(self, noise: NoiseSpec, t: float) -> GaussianKernelParamsND:
        """a'_t = (t³/12)Σ, b'_t = -(t/4)I, c'_t = (1/(4t))Σ⁻¹"""
        _check_positive_time(t)
        sigma = self.relaxation_block(noise)
        identity = np.eye(noise.dim)
        return GaussianKernelParamsND.centered(
            t ** 3 / 12.0 * sigma, -t / 4.0 * identity, 1.0 / (4.0 * t) * np.linalg.inv(sigma)
        )

    def relaxation_charfn(self, noise: NoiseSpec, t: float) -> GaussianCharFn:
        """Función característica de ρ̃_t en las unidades del propagador"""
        # para t⁴ < 3 la familia no cumple a ≥ c; se construye sin validar
        phi = GaussianCharFn(*charfn_coefficients(self.limit_state_position(noise, t)))
        return phi.dilated(RELAXATION_LENGTH_SCALE)

    # ------------------------------------------------------------------
    # Núcleos muestreados
    # ------------------------------------------------------------------

    def sample_kernel(self, params: GaussianParams, half_width: float, points: int) -> KernelFn:
        """ρ(x₁,x₂) en una malla de posiciones (d=1), prefactor det(c)^{1/2}/π^{d/2}"""
        nd = self.ensure_valid(params)
        if nd.dim != 1:
            raise DomainError("Sampled kernels are available for d=1 only")
        a, b, c = (float(v[0, 0]) for v in nd.as_tuple())
        m_x, m_k = float(nd.m_x[0]), float(nd.m_k[0])
        x = (np.arange(points) - points // 2) * (2.0 * half_width / points)
        x1, x2 = np.meshgrid(x, x, indexing="ij")
        u = x1 - x2
        w = x1 + x2 - 2.0 * m_x
        exponent = -0.25 * a * u ** 2 - 0.5j * b * u * w - 0.25 * c * w ** 2 + 1j * m_k * u
        prefactor = math.sqrt(c / math.pi)
        return KernelFn(prefactor * np.exp(exponent), half_width, points)


# ----------------------------------------------------------------------
# Funciones del motor gaussiano
# ----------------------------------------------------------------------

def charfn_coefficients(params: GaussianKernelParamsND) -> Tuple[np.ndarray, np.ndarray]:
    a, b, c = params.as_tuple()
    c_inv = np.linalg.inv(c)
    m_qq = 0.5 * a + 0.5 * b @ c_inv @ b.T
    m_qp = 0.5 * b @ c_inv
    m_pp = 0.5 * c_inv
    precision = np.block([[m_qq, m_qp], [m_qp.T, m_pp]])
    linear = np.concatenate([-params.m_k, params.m_x])
    return _symmetrized(precision), linear


def gaussian_index(phi: GaussianCharFn) -> IndexReport:
    """
    Índices exactos de una función característica gaussiana:
    C_X² = tr((2M)⁻¹)_qq, D_X² = 2 tr M_pp, C_K² = tr((2M)⁻¹)_pp,
    D_K² = 2 tr M_qq y ‖ρ‖₂² = 2^{-d} det(M)^{-1/2}.
    """
    d = phi.dim
    m = phi.precision
    try:
        covariance = np.linalg.inv(2.0 * m)
    except np.linalg.LinAlgError as error:
        raise SingularMatrixError("Gaussian precision is singular") from error
    c_x = math.sqrt(max(float(np.trace(covariance[:d, :d])), 0.0))
    c_k = math.sqrt(max(float(np.trace(covariance[d:, d:])), 0.0))
    d_x = math.sqrt(2.0 * float(np.trace(m[d:, d:])))
    d_k = math.sqrt(2.0 * float(np.trace(m[:d, :d])))
    hs = math.sqrt(2.0 ** (-d) / math.sqrt(float(np.linalg.det(m))))
    return IndexReport(
        c_x=c_x, d_x=d_x, s_x=c_x / d_x,
        c_k=c_k, d_k=d_k, s_k=c_k / d_k,
        hs_norm=hs,
        mean_position=phi.mean_position.tolist(),
        mean_momentum=phi.mean_momentum.tolist(),
        metadata={"method": "closed_form"},
    )


def _violations_1d(params: GaussianKernelParams1D) -> List[str]:
    violations = []
    values = [params.A, params.B, params.C, params.D, params.E, params.F]
    if not all(math.isfinite(v) for v in values):
        return ["all parameters must be finite reals"]
    if params.C <= 0:
        violations.append("C > 0")
    if params.A < params.C:
        violations.append("A ≥ C")
    if params.C > 0 and abs(params.F - params.E ** 2 / (4.0 * params.C)) > F_TOLERANCE * max(1.0, abs(params.F)):
        violations.append("F = E²/(4C)")
    return violations


def _violations_nd(params: GaussianKernelParamsND) -> List[str]:
    d = params.dim
    for name, matrix in (("a", params.a), ("b", params.b), ("c", params.c)):
        if matrix.shape != (d, d):
            return [f"{name} must be {d}x{d}"]
        if not np.all(np.isfinite(matrix)):
            return [f"{name} must be finite"]
    if params.m_x.shape != (d,) or params.m_k.shape != (d,):
        return [f"means must have {d} components"]
    violations = []
    for name, matrix in (("a", params.a), ("c", params.c)):
        scale = max(1.0, float(np.max(np.abs(matrix))))
        if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOLERANCE * scale:
            violations.append(f"{name} symmetric")
        elif float(np.min(np.linalg.eigvalsh(matrix))) <= 0:
            violations.append(f"{name} positive definite")
    gap = _symmetrized(params.a - params.c)
    if float(np.min(np.linalg.eigvalsh(gap))) < -PSD_TOLERANCE * max(1.0, float(np.max(np.abs(params.a)))):
        violations.append("a - c positive semidefinite")
    return violations


def _symmetrized(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def _check_positive_time(t: float) -> None:
    if t <= 0:
        raise DomainError(f"time must be > 0, got {t}")
