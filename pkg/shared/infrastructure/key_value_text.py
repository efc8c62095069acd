# shared/infrastructure/key_value_text.py

"""
Lectura de texto key=value con diagnósticos de línea.

Comentarios con '#', listas de números separadas por espacios o comas y
matrices con filas separadas por ';'.
"""

from typing import List, Optional, Tuple

import numpy as np

from shared.domain.exceptions import ConfigError

# (número de línea, clave, valor)
Entry = Tuple[Optional[int], str, str]


def strip_comment(raw: str) -> str:
    return raw.split("#", 1)[0].strip()


def parse_key_values(text: str, first_line: int = 1) -> List[Entry]:
    entries = []
    for number, raw in enumerate(text.splitlines(), start=first_line):
        line = strip_comment(raw)
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected 'key = value', got '{line}'", line=number)
        entries.append((number, key.strip(), value.strip()))
    return entries


def parse_numbers(value: str, count: Optional[int], line, key) -> List[float]:
    tokens = value.replace(",", " ").split()
    try:
        numbers = [float(token) for token in tokens]
    except ValueError:
        raise ConfigError(f"'{value}' is not a list of numbers", line=line, field=key)
    if count is not None and len(numbers) != count:
        raise ConfigError(f"expected {count} numbers, got {len(numbers)}", line=line, field=key)
    return numbers


def parse_matrix(value: str, size: int, line, key) -> np.ndarray:
    rows = [row for row in value.split(";") if row.strip()]
    if len(rows) != size:
        raise ConfigError(f"matrix needs {size} rows separated by ';', got {len(rows)}", line=line, field=key)
    matrix = []
    for index, row in enumerate(rows):
        tokens = row.replace(",", " ").split()
        if len(tokens) != size:
            raise ConfigError(f"matrix row {index} has {len(tokens)} entries, expected {size}",
                              line=line, field=key)
        matrix.append(parse_numbers(row, size, line, key))
    return np.array(matrix)


def format_matrix(matrix: np.ndarray) -> str:
    return "; ".join(" ".join(repr(float(v)) for v in row) for row in np.atleast_2d(matrix))


def format_vector(vector) -> str:
    return " ".join(repr(float(v)) for v in np.atleast_1d(vector))
