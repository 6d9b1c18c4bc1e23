"""Central finite-difference check of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .params import ParamStore

FD_STEP = 1e-4
# Relative errors are measured against max(|analytic|, |numeric|, floor);
# the floor keeps near-zero entries from amplifying O(step²) truncation.
REL_FLOOR = 1e-5


@dataclass
class GradCheckFailure:
    name: str
    index: tuple
    analytic: float
    numeric: float
    rel_error: float


@dataclass
class GradCheckReport:
    tolerance: float
    max_rel_error: float = 0.0
    n_checked: int = 0
    worst: tuple = ()
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def rows(self) -> list[tuple[str, str]]:
        return [
            ("n_checked", str(self.n_checked)),
            ("max_rel_error", repr(self.max_rel_error)),
            ("tolerance", repr(self.tolerance)),
            ("worst", f"{self.worst[0]}{list(self.worst[1])}" if self.worst else ""),
            ("passed", str(self.passed).lower()),
        ]


def grad_check(
    model_closure: Callable[[ParamStore], float],
    params: ParamStore,
    tolerance: float = 1e-3,
    step: float = FD_STEP,
    floor: float = REL_FLOOR,
) -> GradCheckReport:
    """Compare gradients written by ``model_closure`` against central differences.

    ``model_closure(params)`` must return the scalar loss and add its
    gradients into ``params.grads``; it is called 2·P + 1 times.
    """
    params.zero_grad()
    model_closure(params)
    analytic = {name: g.copy() for name, g in params.grads.items()}
    params.zero_grad()

    report = GradCheckReport(tolerance=tolerance)
    for name, value in params.params.items():
        for index in np.ndindex(value.shape):
            original = value[index]
            value[index] = original + step
            plus = model_closure(params)
            value[index] = original - step
            minus = model_closure(params)
            value[index] = original
            params.zero_grad()

            numeric = (plus - minus) / (2.0 * step)
            exact = float(analytic[name][index])
            rel = abs(exact - numeric) / max(abs(exact), abs(numeric), floor)
            report.n_checked += 1
            if rel > report.max_rel_error:
                report.max_rel_error = rel
                report.worst = (name, index)
            if rel >= tolerance:
                report.failures.append(GradCheckFailure(name, index, exact, numeric, rel))
    return report
