# gaussian_states/infrastructure/gaussian_params_serializer.py

import logging
from pathlib import Path
from typing import Iterable, Union

from gaussian_states.domain.model.valueobjects.gaussian_kernel_params import (
    GaussianKernelParams1D, GaussianKernelParamsND
)
from shared.domain.conventions import WEYL_CONVENTION
from shared.domain.exceptions import ConfigError
from shared.infrastructure.key_value_text import (
    Entry, format_matrix, format_vector, parse_key_values, parse_matrix, parse_numbers
)

logger = logging.getLogger(__name__)

PARAMS_1D_KEYS = ("A", "B", "C", "D", "E", "F")
PARAMS_ND_KEYS = ("dimension", "a", "b", "c", "m_x", "m_k")


class GaussianParamsSerializer:
    """
    Texto key=value para familias gaussianas:

        family = gaussian_1d | gaussian_nd
        convention = phi(q,p)=Tr[exp(i q.K + i p.X) rho]
        A = 0.25 ...                 (gaussian_1d)
        dimension = 2; a = 1 0; 0 1  (gaussian_nd)
    """

    def dumps(self, params: Union[GaussianKernelParams1D, GaussianKernelParamsND]) -> str:
        lines = []
        if isinstance(params, GaussianKernelParams1D):
            lines.append("family = gaussian_1d")
            lines += [f"{key} = {getattr(params, key)!r}" for key in PARAMS_1D_KEYS]
        else:
            lines.append("family = gaussian_nd")
            lines.append(f"dimension = {params.dim}")
            lines += [f"{key} = {format_matrix(getattr(params, key))}" for key in ("a", "b", "c")]
            lines += [f"{key} = {format_vector(getattr(params, key))}" for key in ("m_x", "m_k")]
        lines.append(f"convention = {WEYL_CONVENTION}")
        return "\n".join(lines) + "\n"

    def write(self, path, params) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dumps(params), encoding="utf-8")
        logger.info("Gaussian parameters written to %s", path)
        return path

    def read(self, path):
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"parameter file does not exist: {path}", field="params_file")
        return self.loads(path.read_text(encoding="utf-8"))

    def loads(self, text: str):
        return self.from_entries(parse_key_values(text))

    def from_entries(self, entries: Iterable[Entry], family: str = None):
        values = {}
        for line, key, value in entries:
            values[key] = (line, value)
        if family is None:
            family = values.pop("family", (None, "gaussian_1d"))[1]
        else:
            values.pop("family", None)
        convention = values.pop("convention", None)
        if convention is not None and convention[1] != WEYL_CONVENTION:
            raise ConfigError(f"unsupported Weyl convention '{convention[1]}'",
                              line=convention[0], field="convention")
        if family == "gaussian_1d":
            return self._params_1d(values)
        if family == "gaussian_nd":
            return self._params_nd(values)
        raise ConfigError(f"unknown Gaussian family '{family}'", field="family")

    @staticmethod
    def _params_1d(values):
        _reject_unknown(values, PARAMS_1D_KEYS)
        numbers = {}
        for key in PARAMS_1D_KEYS:
            if key in values:
                line, raw = values[key]
                numbers[key] = parse_numbers(raw, 1, line, key)[0]
        for required in ("A", "C"):
            if required not in numbers:
                raise ConfigError(f"missing required key '{required}'", field=required)
        return GaussianKernelParams1D(**numbers)

    @staticmethod
    def _params_nd(values):
        _reject_unknown(values, PARAMS_ND_KEYS)
        if "dimension" not in values:
            raise ConfigError("missing required key 'dimension'", field="dimension")
        line, raw = values["dimension"]
        dim = int(parse_numbers(raw, 1, line, "dimension")[0])
        fields = {}
        for key in ("a", "b", "c"):
            if key not in values:
                raise ConfigError(f"missing required key '{key}'", field=key)
            line, raw = values[key]
            fields[key] = parse_matrix(raw, dim, line, key)
        for key in ("m_x", "m_k"):
            if key in values:
                line, raw = values[key]
                fields[key] = parse_numbers(raw, dim, line, key)
            else:
                fields[key] = None
        return GaussianKernelParamsND(**fields)


def _reject_unknown(values, allowed):
    for key, (line, _) in values.items():
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}'", line=line, field=key)
