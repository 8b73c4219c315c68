from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass

import pandas as pd

logger = logging.getLogger(__name__)

PASS = "PASS"
FAIL = "FAIL"
SKIP = "SKIP"


@dataclass(frozen=True)
class AcceptanceCheck:
    name: str
    status: str
    value: float
    detail: str = ""

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def summary(self) -> str:
        text = f"{self.status} {self.value:.6g}"
        return f"{text} ({self.detail})" if self.detail else text


def bound_check(name: str, value: float, limit: float, detail: str = "") -> AcceptanceCheck:
    """PASS when ``value`` <= ``limit``."""
    status = PASS if value <= limit else FAIL
    if status == FAIL:
        logger.warning("acceptance check %s failed: %.6g > %.6g", name, value, limit)
    return AcceptanceCheck(name, status, float(value), detail or f"limit {limit:.3g}")


def skipped(name: str, reason: str) -> AcceptanceCheck:
    return AcceptanceCheck(name, SKIP, float("nan"), reason)


def any_failed(checks: Iterable[AcceptanceCheck]) -> bool:
    return any(check.failed for check in checks)


def checks_to_frame(checks: Iterable[AcceptanceCheck]) -> pd.DataFrame:
    return pd.DataFrame(
        [(c.name, c.status, c.value, c.detail) for c in checks],
        columns=["check", "status", "value", "detail"],
    )
