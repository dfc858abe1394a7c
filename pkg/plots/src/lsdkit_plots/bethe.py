"""Closed-form mean percolation cluster size on a regular tree.

Reimplemented here so the plotting package depends only on the decoder's
file formats, never on its code.
"""

from __future__ import annotations


def bethe_avg_cluster(p: float, theta: float) -> float:
    if theta < 2:
        raise ValueError("theta must be at least 2")
    if p < 0 or p * (theta - 1) >= 1.0:
        raise ValueError("p must lie in [0, 1/(theta-1))")
    return (1.0 + p) / (1.0 - (theta - 1.0) * p)
