"""Brute-force Gaussian smoothing reference for regression coefficient tables.

Smoothing happens on the log2-frequency axis with a kernel normalised over
the sample grid, so edge samples are averaged over the one-sided neighbourhood
actually present.  The double loop below is the definition; the library must
match it with whatever vectorisation it uses.
"""

from __future__ import annotations

import math

__all__ = ["gaussian_smooth_log2"]


def gaussian_smooth_log2(freqs_hz: list[float], values: list[float],
                         sigma: float) -> list[float]:
    xs = [math.log2(f) for f in freqs_hz]
    out = []
    for xi in xs:
        num = 0.0
        den = 0.0
        for xj, vj in zip(xs, values):
            w = math.exp(-((xi - xj) ** 2) / (2.0 * sigma ** 2))
            num += w * vj
            den += w
        out.append(num / den)
    return out
