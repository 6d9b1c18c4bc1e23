"""Two-cell chi-square goodness of fit and Welch's two-sample t-test."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from ..errors import InsufficientSamplesError

CRITICAL_VALUE_5PCT = 3.84
T_TEST_ALPHA = 0.1


@dataclass(frozen=True)
class ChiSquareResult:
    observed: tuple[int, int]
    expected: tuple[float, float]
    statistic: float
    critical_value: float
    p_value: float

    @property
    def rejected(self) -> bool:
        return self.statistic > self.critical_value

    def as_row(self, label: str = "") -> dict:
        return {
            "label": label,
            "frequent": self.observed[0],
            "non_frequent": self.observed[1],
            "expected": self.expected[0],
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "rejected": self.rejected,
        }

    def summary(self, label: str = "") -> str:
        verdict = "reject null" if self.rejected else "not enough evidence"
        head = f"{label}: " if label else ""
        return (
            f"{head}observed {self.observed[0]}/{self.observed[1]}, "
            f"expected {self.expected[0]:.1f} each, chi2 = {self.statistic:.2f} "
            f"(critical {self.critical_value:.2f}) -> {verdict}"
        )


def chi_square_test(
    observed: Sequence[int], critical_value: float = CRITICAL_VALUE_5PCT
) -> ChiSquareResult:
    """Test two counts against the equal-chance null."""
    c1, c2 = (int(c) for c in observed)
    total = c1 + c2
    if total <= 0:
        raise InsufficientSamplesError("chi-square test needs a positive total count")
    expected = total / 2.0
    result = stats.chisquare([c1, c2], f_exp=[expected, expected])
    return ChiSquareResult(
        (c1, c2),
        (expected, expected),
        float(result.statistic),
        float(critical_value),
        float(result.pvalue),
    )


@dataclass(frozen=True)
class TTestResult:
    statistic: float
    p_value: float
    significant: bool


def t_test_two_sample(
    metrics_a: Sequence[float], metrics_b: Sequence[float], alpha: float = T_TEST_ALPHA
) -> TTestResult:
    """Welch's unequal-variance t-test, two-sided."""
    a = np.asarray(metrics_a, dtype=np.float64)
    b = np.asarray(metrics_b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise InsufficientSamplesError(
            f"t-test needs at least 2 samples per side, got {len(a)} and {len(b)}"
        )
    if np.var(a) == 0 and np.var(b) == 0:
        if a.mean() == b.mean():
            return TTestResult(0.0, 1.0, False)
        return TTestResult(float(np.sign(a.mean() - b.mean()) * np.inf), 0.0, True)
    result = stats.ttest_ind(a, b, equal_var=False)
    p = float(result.pvalue)
    return TTestResult(float(result.statistic), p, p < alpha)
