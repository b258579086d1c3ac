"""Statistics of random-state fidelities and protocol failure rates.

Two fidelity densities ship side by side: the exact Haar law, used as the
oracle, and the large-dimension exponential approximation, which is what the
failure-rate estimate is built on.  Keeping both lets tests separate an
implementation bug from the approximation being coarse at small dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FidelityDistParams:
    """Dimension of the subspace being compared and shots per setting."""

    D: int
    N: int

    def __post_init__(self):
        if self.D < 2:
            raise ValueError("D must be >= 2")
        if self.N < 1:
            raise ValueError("N must be >= 1")


def fidelity_pdf_exact(F: float, D: int) -> float:
    """Exact density of |<a|b>|^2 for independent Haar states in D dimensions:
    (D-1)(1-F)^(D-2), the Beta(1, D-1) law."""
    if not (0.0 <= F <= 1.0):
        raise ValueError("F must lie in [0, 1]")
    if D < 2:
        raise ValueError("D must be >= 2")
    return float((D - 1) * (1.0 - F) ** (D - 2))


def fidelity_pdf_paper(F: float, D: int) -> float:
    """Large-D exponential approximation of the same density, normalized on
    [0, 1]: D exp(-F D) / (1 - exp(-D))."""
    if not (0.0 <= F <= 1.0):
        raise ValueError("F must lie in [0, 1]")
    if D < 1:
        raise ValueError("D must be >= 1")
    return float(D * math.exp(-F * D) / (1.0 - math.exp(-D)))


def fidelity_cdf_exact(F: float, D: int) -> float:
    """CDF of the exact Haar fidelity law: 1 - (1-F)^(D-1)."""
    if not (0.0 <= F <= 1.0):
        raise ValueError("F must lie in [0, 1]")
    return float(1.0 - (1.0 - F) ** (D - 1))


def fidelity_cdf_paper(F: float, D: int) -> float:
    """CDF of the exponential approximation."""
    if not (0.0 <= F <= 1.0):
        raise ValueError("F must lie in [0, 1]")
    return float((1.0 - math.exp(-F * D)) / (1.0 - math.exp(-D)))


def failure_probability(D: int, N: int) -> float:
    """Probability that two random same-block vectors overlap more strongly
    than the 1 - 1/sqrt(N) fidelity expected of the repeated direction:

        (exp(D/sqrt(N)) - 1) / (exp(D) - 1),

    the tail mass of the exponential fidelity law above 1 - 1/sqrt(N).
    Scales as O(1/sqrt(N)); treat it as an order-of-magnitude estimate since
    the 1 - 1/sqrt(N) input is itself a heuristic.
    """
    if D < 2:
        raise ValueError("D must be >= 2")
    if N < 1:
        raise ValueError("N must be >= 1")
    return float(math.expm1(D / math.sqrt(N)) / math.expm1(D))


def confidence_band(
    samples: np.ndarray, levels: tuple[float, ...] = (0.63, 0.95)
) -> dict[float, tuple[float, float]]:
    """Central empirical quantile intervals of the samples.

    Level L maps to the [(1-L)/2, 1-(1-L)/2] quantiles, computed with linear
    interpolation between order statistics (numpy's default, type 7), so band
    edges are reproducible bit for bit given the same input.  Requires at
    least 50 samples.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 50:
        raise ValueError(f"need at least 50 samples, got {samples.size}")
    bands: dict[float, tuple[float, float]] = {}
    for level in levels:
        if not (0.0 < level < 1.0):
            raise ValueError("levels must lie in (0, 1)")
        alpha = (1.0 - level) / 2.0
        lo, hi = np.quantile(samples, [alpha, 1.0 - alpha])
        bands[level] = (float(lo), float(hi))
    return bands


def two_peak_summary(fidelities: np.ndarray) -> dict[str, float]:
    """Fractions of fidelities in the low peak [0, 0.1], the high peak
    [0.9, 1], and the remainder.  The three masses sum to one."""
    fidelities = np.asarray(fidelities, dtype=float)
    if fidelities.size == 0:
        raise ValueError("empty fidelity list")
    n = fidelities.size
    low = float(np.count_nonzero(fidelities <= 0.1)) / n
    high = float(np.count_nonzero(fidelities >= 0.9)) / n
    return {"mass_low": low, "mass_high": high, "mass_mid": 1.0 - low - high}
