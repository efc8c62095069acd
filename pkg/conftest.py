"""
conftest.py - Configuración compartida de fixtures para tests de integración
Este archivo es automáticamente detectado por pytest y sus fixtures están
disponibles para todos los archivos de test en el directorio.
"""

import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from asymptotics.domain.services.asymptotics_service import AsymptoticsService
from classical_limit.domain.services.classical_comparison_service import ClassicalComparisonService
from classical_limit.domain.services.levy_path_sampler import LevyPathSampler
from coherence.domain.services.coherence_service import CoherenceService
from gaussian_states.domain.model.valueobjects.gaussian_kernel_params import GaussianKernelParams1D
from gaussian_states.domain.services.gaussian_state_service import GaussianStateService
from noise.domain.model.aggregates.noise_spec import NoiseSpec
from noise.domain.model.valueobjects.jump_measure import JumpMeasure
from noise.domain.services.levy_exponent_service import LevyExponentService
from phase_space.domain.model.valueobjects.characteristic_function import AnalyticCharFn
from phase_space.domain.services.phase_gradient_service import PhaseGradientService
from phase_space.domain.services.phase_quadrature_service import PhaseQuadratureService
from phase_space.domain.services.phase_transform_service import PhaseTransformService
from propagation.domain.services.propagator_service import PropagatorService


# ============================================================================
# FIXTURES DE SERVICIOS DE DOMINIO
# ============================================================================

@pytest.fixture
def levy_service():
    return LevyExponentService()


@pytest.fixture
def quadrature_service():
    return PhaseQuadratureService()


@pytest.fixture
def transform_service(quadrature_service):
    return PhaseTransformService(quadrature_service)


@pytest.fixture
def gradient_service():
    return PhaseGradientService()


@pytest.fixture
def gaussian_state_service(levy_service):
    return GaussianStateService(levy_service)


@pytest.fixture
def path_sampler():
    return LevyPathSampler()


@pytest.fixture
def propagator_service(levy_service, path_sampler):
    return PropagatorService(levy_service, path_sampler)


@pytest.fixture
def coherence_service(quadrature_service):
    return CoherenceService(quadrature_service)


@pytest.fixture
def asymptotics_service(levy_service, gaussian_state_service, quadrature_service):
    return AsymptoticsService(levy_service, gaussian_state_service, quadrature_service)


@pytest.fixture
def comparison_service(levy_service):
    return ClassicalComparisonService(levy_service)


# ============================================================================
# FIXTURES DE ESTADOS
# ============================================================================

@pytest.fixture
def ground_params():
    """Estado fundamental: ρ(x₁,x₂) = π^{-1/2} exp(-(x₁² + x₂²)/2)"""
    return GaussianKernelParams1D.ground_state()


@pytest.fixture
def ground_charfn(gaussian_state_service, ground_params):
    """φ(q,p) = exp(-(q² + p²)/4)"""
    return gaussian_state_service.gaussian_charfn(ground_params)


@pytest.fixture
def analytic_ground_charfn():
    """El estado fundamental como callable con gradiente, sin estructura gaussiana"""

    def fn(q, p):
        return np.exp(-0.25 * (np.sum(q ** 2, axis=1) + np.sum(p ** 2, axis=1))).astype(complex)

    def gradient_fn(q, p):
        values = fn(q, p)[:, None]
        return -0.5 * q * values, -0.5 * p * values

    return AnalyticCharFn(1, fn, gradient_fn=gradient_fn, envelope=0.5 * np.eye(2))


@pytest.fixture
def random_gaussian_params():
    """Generador de parámetros gaussianos 1-d válidos (A ≥ C > 0, F = E²/(4C))"""

    def build(rng: np.random.Generator) -> GaussianKernelParams1D:
        c = float(rng.uniform(0.1, 1.0))
        a = c + float(rng.uniform(0.0, 1.5))
        b = float(rng.uniform(-0.5, 0.5))
        d = float(rng.uniform(-0.5, 0.5))
        e = float(rng.uniform(-0.5, 0.5))
        return GaussianKernelParams1D(A=a, B=b, C=c, D=d, E=e, F=e ** 2 / (4.0 * c))

    return build


# ============================================================================
# FIXTURES DE RUIDO
# ============================================================================

@pytest.fixture
def zero_noise():
    return NoiseSpec.zero(1)


@pytest.fixture
def case1_noise():
    """Difusión solo en momento: A^{x,x} = 1"""
    return NoiseSpec.from_blocks(xx=[[1.0]])


@pytest.fixture
def case2_noise():
    """Difusión solo en posición: A^{k,k} = 1"""
    return NoiseSpec.from_blocks(kk=[[1.0]])


@pytest.fixture
def momentum_atoms():
    """Átomos ±(0, 1) con peso ½ cada uno (tasa total 1)"""
    return JumpMeasure.atoms(1, [((0.0,), (1.0,), 0.5)])


@pytest.fixture
def atoms_noise(momentum_atoms):
    return NoiseSpec(1, jump=momentum_atoms)


@pytest.fixture
def mixed_noise(momentum_atoms):
    return NoiseSpec.from_blocks(xx=[[1.0]], kk=[[0.5]], jump=momentum_atoms)


@pytest.fixture
def grid_density_measure():
    """Densidad gaussiana simétrica en (x, k) discretizada por punto medio"""
    axis = np.linspace(-3.0, 3.0, 31)
    x, k = np.meshgrid(axis, axis, indexing="ij")
    density = np.exp(-(x ** 2 + k ** 2)) / math.pi
    return JumpMeasure.grid_density(axis, axis, density)


# ============================================================================
# FIXTURES DE CONFIGURACIÓN Y API
# ============================================================================

CASE1_CONFIG = """
[experiment]
times = 15, 20, 30, 40, 60

[noise]
dimension = 1
diffusion = 1 0; 0 0

[state]
family = ground
"""


@pytest.fixture
def case1_config_text():
    return CASE1_CONFIG


@pytest.fixture
def api_client():
    from main import app

    with TestClient(app) as client:
        yield client
