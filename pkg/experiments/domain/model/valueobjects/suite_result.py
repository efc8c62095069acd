from enum import Enum

from pydantic import BaseModel


class SuiteStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"


class SuiteResult(BaseModel):
    """Fila del informe de validación: suite, estado, valor medido y tolerancia"""
    suite: str
    status: SuiteStatus
    value: float
    tolerance: float
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.status is SuiteStatus.FAIL

    def row(self) -> list:
        return [self.suite, self.status.value, self.value, self.tolerance, self.detail]


SUITE_COLUMNS = ["suite", "status", "value", "tolerance", "detail"]
