from fastapi import APIRouter

from coherence.domain.services.coherence_service import CoherenceService
from coherence.interfaces.rest.resources.gaussian_1d_resource import Gaussian1DResource
from coherence.interfaces.rest.resources.index_comparison_resource import IndexComparisonResource
from gaussian_states.domain.model.valueobjects.gaussian_kernel_params import GaussianKernelParams1D
from gaussian_states.domain.services.gaussian_state_service import GaussianStateService
from shared.domain.exceptions import DecoherenceLabError
from shared.interfaces.rest.http_errors import to_http_exception

router = APIRouter(prefix="/api/v1/coherence", tags=["Coherence Index"])

INDEX_FIELDS = ("c_x", "d_x", "s_x", "c_k", "d_k", "s_k")


@router.post("/gaussian-1d", response_model=IndexComparisonResource)
def gaussian_1d_index(resource: Gaussian1DResource):
    """
    Índice de coherencia de un estado gaussiano en d=1, en forma cerrada y por
    cuadratura sobre la malla blanqueada
    """
    params = GaussianKernelParams1D(**resource.model_dump(exclude={"points"}))
    states = GaussianStateService()
    coherence = CoherenceService()
    try:
        phi = states.gaussian_charfn(params)
        closed_form = states.closed_form_index(params)
        grid = coherence.quadrature.fit_grid(phi, resource.points)
        numeric = coherence.coherence_index(phi, grid)
    except DecoherenceLabError as error:
        raise to_http_exception(error)

    deviation = max(abs(getattr(numeric, f) - getattr(closed_form, f)) / getattr(closed_form, f)
                    for f in INDEX_FIELDS)
    return IndexComparisonResource(closed_form=closed_form, numeric=numeric, max_relative_deviation=deviation)
