"""Side-feature normalization: inverse price to [0.01, 1], frequency to [0, 5]."""

from __future__ import annotations

from typing import Sequence

import numpy as np

ALPHA_MIN = 0.01
ALPHA_MAX = 1.0
FREQ_MAX = 5.0


def normalize_price(raw_prices: Sequence[float]) -> np.ndarray:
    """Min-max map prices inversely onto [0.01, 1]; the cheapest item gets 1.0.

    All-equal prices map to 1.0.
    """
    prices = np.asarray(raw_prices, dtype=np.float64)
    if prices.size == 0:
        raise ValueError("normalize_price needs at least one price")
    if not np.all(np.isfinite(prices)) or np.any(prices <= 0):
        raise ValueError("prices must be finite and positive")
    lo, hi = prices.min(), prices.max()
    if hi == lo:
        return np.full(prices.shape, ALPHA_MAX)
    alpha = ALPHA_MIN + (ALPHA_MAX - ALPHA_MIN) * (hi - prices) / (hi - lo)
    return np.clip(alpha, ALPHA_MIN, ALPHA_MAX)


def normalize_frequency(counts: Sequence[int]) -> np.ndarray:
    """Min-max map purchase counts onto [0, 5]; all-equal counts map to 2.5."""
    values = np.asarray(counts, dtype=np.float64)
    if values.size == 0:
        raise ValueError("normalize_frequency needs at least one count")
    if np.any(values < 0):
        raise ValueError("counts must be nonnegative")
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.full(values.shape, FREQ_MAX / 2)
    return FREQ_MAX * (values - lo) / (hi - lo)
