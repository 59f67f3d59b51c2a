"""Binomial bounds and uniformity checks used by reports and tests."""

import math

from scipy import stats as _st


def detection_probability(delta: int, edges: int = 1) -> float:
    """Chance that decoys catch an attacker on ``edges`` edges, delta decoys each."""
    return 1 - 0.75 ** (delta * edges)


def sigma(p: float, n: int) -> float:
    return math.sqrt(p * (1 - p) / n)


def three_sigma_bounds(p: float, n: int) -> tuple[float, float]:
    s = 3 * sigma(p, n)
    return max(0.0, p - s), min(1.0, p + s)


def within_three_sigma(hits: int, n: int, p: float) -> bool:
    lo, hi = three_sigma_bounds(p, n)
    return lo <= hits / n <= hi


def chi2_uniform(counts) -> float:
    """p-value of Pearson's chi-squared test against the uniform distribution."""
    return float(_st.chisquare(list(counts)).pvalue)


# pinned significance level for every uniformity verdict
CHI2_ALPHA = 1e-3
