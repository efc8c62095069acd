# propagation/domain/model/valueobjects/evolved_charfn.py

from typing import Optional

import numpy as np

from noise.domain.model.aggregates.noise_spec import NoiseSpec
from noise.domain.services.levy_exponent_service import LevyExponentService
from phase_space.domain.model.valueobjects.characteristic_function import CharFn, shear_matrix


class EvolvedCharFn(CharFn):
    """
    φ_t(q, p) = exp(∫₀ᵗ ℓ(q + u·p, p) du) · φ₀(q + t·p, p).

    Se evalúa punto a punto; el gradiente existe si φ₀ lo tiene.
    """

    def __init__(self, initial: CharFn, noise: NoiseSpec, t: float,
                 levy: Optional[LevyExponentService] = None):
        super().__init__(initial.dim, initial.is_state)
        self.initial = initial
        self.noise = noise
        self.t = float(t)
        self.levy = levy or LevyExponentService()

    def evaluate(self, q, p):
        exponent = self.levy.integrated_batch(self.noise, q, p, self.t)
        return np.exp(exponent) * self.initial.evaluate(q + self.t * p, p)

    def evaluate_gradient(self, q, p):
        _, grad_q, grad_p = self.evaluate_with_gradient(q, p)
        return grad_q, grad_p

    def evaluate_with_gradient(self, q, p):
        exponent, grad_q, grad_p = self.levy.integrated_with_gradient(self.noise, q, p, self.t)
        sheared_q = q + self.t * p
        base, base_q, base_p = self.initial.evaluate_with_gradient(sheared_q, p)
        factor = np.exp(exponent)
        values = factor * base
        return (values,
                factor[:, None] * (grad_q * base[:, None] + base_q),
                factor[:, None] * (grad_p * base[:, None] + self.t * base_q + base_p))

    @property
    def has_gradient(self) -> bool:
        return self.initial.has_gradient

    @property
    def envelope(self):
        initial = self.initial.envelope
        if initial is None:
            return None
        shear = shear_matrix(self.dim, self.t)
        return shear.T @ initial @ shear + self.levy.envelope_matrix(self.noise, self.t)
