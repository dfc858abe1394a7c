"""Ordered-statistics decoding.

Columns are eliminated in order of increasing LLR so the pivot columns form
the most-likely information set; dependent-column patterns of bounded
weight are then swept to improve on the order-0 solution.  Serves as a
standalone baseline and as the local reprocessing engine inside cluster
decoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import numpy as np

from .gf2 import NotInImageError, PluFactorization, SparseBinaryMatrix


@dataclass(frozen=True)
class OsdMethod:
    kind: str          # "osd0" | "osd_e" | "osd_cs"
    order: int = 0

    def __post_init__(self):
        if self.kind not in ("osd0", "osd_e", "osd_cs"):
            raise ValueError(f"unknown OSD method {self.kind!r}")
        if self.order < 0:
            raise ValueError("order must be non-negative")
        if self.kind == "osd0" and self.order != 0:
            raise ValueError("osd0 is order 0 by definition")


def osd_decode(h: SparseBinaryMatrix, syndrome_support: Iterable[int],
               llrs: np.ndarray, method: OsdMethod | None = None) -> np.ndarray:
    """Solve h . e = s preferring low-LLR faults; returns sorted fault ids.

    The candidate with minimum total LLR on its support wins; ties fall back
    to Hamming weight, then to lexicographic support.  Raises
    :class:`NotInImageError` if the syndrome is not decodable.
    """
    method = method or OsdMethod("osd0")
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape != (h.num_cols,):
        raise ValueError("llrs length must equal the column count")

    order = sorted(range(h.num_cols), key=lambda j: (llrs[j], j))
    fact = PluFactorization()
    for j in order:
        fact.add_column(j, h.column(j))
    for r in syndrome_support:
        fact.xor_syndrome_bit(int(r))
    if not fact.syndrome_in_image():
        raise NotInImageError("syndrome is not in the image of the matrix")

    base_residue = frozenset(fact.eliminated_syndrome)
    # Reduced dependent columns are supported on pivot rows, so toggling a
    # dependent fault shifts the residue without leaving the image.
    dep_positions = sorted(fact.dependent_cols)
    dep_ids = [fact.col_order[pos] for pos in dep_positions]
    dep_residues = [fact.u_cols[pos] for pos in dep_positions]

    def solution_for(pattern: tuple[int, ...]) -> np.ndarray:
        residue = set(base_residue)
        support = []
        for idx in pattern:
            residue.symmetric_difference_update(dep_residues[idx])
            support.append(dep_ids[idx])
        pivot_part = fact._select_pivot_columns(residue)
        return np.array(sorted(support + pivot_part.tolist()), dtype=np.int64)

    best = solution_for(())
    best_key = _rank_key(best, llrs)
    for pattern in _patterns(method, len(dep_ids)):
        cand = solution_for(pattern)
        key = _rank_key(cand, llrs)
        if key < best_key:
            best, best_key = cand, key
    return best


def _rank_key(support: np.ndarray, llrs: np.ndarray):
    return (float(llrs[support].sum()), len(support), tuple(support.tolist()))


def _patterns(method: OsdMethod, num_dep: int):
    """Dependent-column toggles to sweep, beyond the empty pattern.

    osd_e tries every pattern of weight up to the order; osd_cs tries all
    single toggles and then all pairs among the `order` lowest-LLR
    dependent positions.
    """
    if method.kind == "osd0":
        return
    if method.kind == "osd_e":
        for w in range(1, min(method.order, num_dep) + 1):
            yield from combinations(range(num_dep), w)
        return
    # combination sweep
    yield from combinations(range(num_dep), 1)
    head = min(method.order, num_dep)
    yield from combinations(range(head), 2)
