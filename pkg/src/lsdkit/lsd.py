"""Localized statistics decoding.

One cluster is seeded per flipped detector.  Invalid clusters repeatedly
absorb their lowest-LLR candidate fault; clusters that reach a common
detector are merged through the union-find forest, concatenating their
elimination states instead of re-eliminating, and every cluster tracks the
image of its local syndrome so validity is a constant-time query.  Once all
clusters are valid the local solutions are concatenated (faults outside the
clusters stay zero) into a correction that reproduces the syndrome exactly.

Higher-order mode grows each valid cluster a bounded number of extra steps
and then reruns ordered-statistics reprocessing locally inside each
cluster.
"""

from __future__ import annotations

import heapq
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .gf2 import PluFactorization, SparseBinaryMatrix
from .model import DetectorModel
from .osd import OsdMethod, osd_decode


class LsdError(Exception):
    """Base class for decode-time failures."""


class UnsatisfiableSyndromeError(LsdError):
    """A cluster exhausted every reachable fault while still invalid."""


@dataclass(frozen=True)
class LsdConfig:
    mu: int = 0
    mu_fraction: float | None = None
    reprocess: OsdMethod | None = None
    parallel: bool = False

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be non-negative")
        if self.mu_fraction is not None and not 0.0 <= self.mu_fraction <= 1.0:
            raise ValueError("mu_fraction must lie in [0, 1]")

    def growth_budget(self, num_faults: int) -> int:
        if self.mu_fraction is not None:
            return int(np.ceil(self.mu_fraction * num_faults))
        return self.mu


@dataclass(frozen=True)
class ClusterSummary:
    fault_nodes: tuple[int, ...]
    detector_nodes: tuple[int, ...]


@dataclass(frozen=True)
class LsdOutcome:
    support: np.ndarray
    nu: int
    kappa: int
    kappa_alpha: float
    clusters: tuple[ClusterSummary, ...]
    sweeps: int


class Cluster:
    """One decoding region: fault columns, enclosed detectors, and the
    incrementally eliminated sub-matrix of the check matrix."""

    __slots__ = ("id", "model", "syndrome", "llrs", "fault_nodes",
                 "detector_nodes", "local_syndrome", "fact", "_heap",
                 "candidate_set", "valid")

    def __init__(self, cid: int, model: DetectorModel, syndrome: np.ndarray,
                 llrs: np.ndarray, seed_detector: int):
        self.id = cid
        self.model = model
        self.syndrome = syndrome
        self.llrs = llrs
        self.fault_nodes: set[int] = set()
        self.detector_nodes: set[int] = set()
        self.local_syndrome: set[int] = set()
        self.fact = PluFactorization()
        self._heap: list[tuple[float, int]] = []
        self.candidate_set: set[int] = set()
        self.valid = False
        self._enclose_detector(seed_detector, owner=None)

    def _enclose_detector(self, d: int, owner: dict[int, int] | None) -> None:
        if d in self.detector_nodes:
            return
        self.detector_nodes.add(d)
        if owner is not None:
            owner[d] = self.id
        self.fact.enclose_row(d)
        if self.syndrome[d]:
            self.fact.xor_syndrome_bit(d)
            self.local_syndrome.add(d)
        for f in self.model.h.row(d):
            f = int(f)
            if f not in self.fault_nodes and f not in self.candidate_set:
                self.candidate_set.add(f)
                heapq.heappush(self._heap, (float(self.llrs[f]), f))

    def select_growth_fault(self) -> int | None:
        """Pop the lowest-(LLR, index) live candidate; None when exhausted."""
        while self._heap:
            _, f = heapq.heappop(self._heap)
            if f in self.candidate_set and f not in self.fault_nodes:
                self.candidate_set.discard(f)
                return f
        return None

    def absorb_fault(self, f: int, owner: dict[int, int] | None) -> None:
        """Add one fault column: enclose its detectors, extend the
        factorization, refresh candidates and validity."""
        assert f not in self.fault_nodes
        rows = self.model.h.column(f)
        for d in rows:
            self._enclose_detector(int(d), owner)
        self.fact.add_column(f, rows)
        self.fault_nodes.add(f)
        self.candidate_set.discard(f)
        self.valid = self.fact.syndrome_in_image()

    @property
    def boundary(self) -> set[int]:
        """Detectors of the cluster with at least one fault outside it."""
        return {d for d in self.detector_nodes
                if any(int(f) not in self.fault_nodes
                       for f in self.model.h.row(d))}

    @property
    def candidates(self) -> set[int]:
        return set(self.candidate_set)

    def local_solution(self) -> np.ndarray:
        return self.fact.solve_tracked()


def grow_cluster(cluster: Cluster) -> int:
    """Grow an isolated cluster by its best candidate and return the fault.

    Collision handling is the forest's job; this primitive is for clusters
    evolving alone.
    """
    f = cluster.select_growth_fault()
    if f is None:
        raise UnsatisfiableSyndromeError(
            f"cluster {cluster.id} has no candidates left")
    cluster.absorb_fault(f, owner=None)
    return f


class ClusterForest:
    """Union-find forest over live clusters plus detector ownership."""

    def __init__(self, model: DetectorModel, syndrome: np.ndarray,
                 llrs: np.ndarray):
        self.model = model
        self.syndrome = syndrome
        self.llrs = llrs
        self.clusters: dict[int, Cluster] = {}
        self.owner: dict[int, int] = {}
        self._parent: dict[int, int] = {}
        self.sweeps = 0

    def seed(self) -> None:
        for d in np.nonzero(self.syndrome)[0]:
            cid = len(self.clusters)
            cluster = Cluster(cid, self.model, self.syndrome, self.llrs,
                              int(d))
            self.clusters[cid] = cluster
            self.owner[int(d)] = cid
            self._parent[cid] = cid

    def find(self, cid: int) -> int:
        root = cid
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[cid] != root:
            self._parent[cid], cid = root, self._parent[cid]
        return root

    def _union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        lo, hi = min(ra, rb), max(ra, rb)
        self._parent[hi] = lo
        return lo

    def live_roots(self) -> list[int]:
        return sorted(self.clusters)

    def invalid_roots(self) -> list[int]:
        return sorted(cid for cid, cl in self.clusters.items() if not cl.valid)


def detect_and_merge(forest: ClusterForest,
                     grown: Sequence[tuple[int, int]]) -> list[int]:
    """Merge clusters colliding through this step's chosen faults and add
    the fault columns; returns the affected root ids.

    Collisions are resolved transitively within the step: the lowest id of
    each connected group becomes the root, its factorization forms the left
    block, and higher-id members are concatenated in ascending order before
    the new columns are eliminated.
    """
    claimed: dict[int, int] = {}
    for cid, f in grown:
        for d in forest.model.h.column(f):
            d = int(d)
            prev_owner = forest.owner.get(d)
            if prev_owner is not None:
                forest._union(cid, prev_owner)
            first = claimed.setdefault(d, cid)
            if first != cid:
                forest._union(cid, first)

    groups: dict[int, list[int]] = {}
    for cid, _ in grown:
        groups.setdefault(forest.find(cid), []).append(cid)
    # A group may also swallow clusters that did not grow this step.
    for cid in list(forest.clusters):
        root = forest.find(cid)
        if root != cid and root in groups:
            groups[root].append(cid)

    affected = []
    for root in sorted(groups):
        members = sorted(set(groups[root]) | {root})
        base = forest.clusters[members[0]]
        for other_id in members[1:]:
            other = forest.clusters.pop(other_id)
            base.fact.absorb_disjoint(other.fact)
            base.fault_nodes |= other.fault_nodes
            base.detector_nodes |= other.detector_nodes
            base.local_syndrome |= other.local_syndrome
            base.candidate_set |= other.candidate_set
            base._heap.extend(other._heap)
        if len(members) > 1:
            heapq.heapify(base._heap)
            base.candidate_set -= base.fault_nodes
        faults = []
        seen = set()
        for cid, f in sorted((c, f) for c, f in grown
                             if forest.find(c) == root):
            if f not in seen:
                seen.add(f)
                faults.append(f)
        for f in faults:
            base.absorb_fault(f, forest.owner)
        base.valid = base.fact.syndrome_in_image()
        affected.append(root)
    return affected


_POOL: ThreadPoolExecutor | None = None


def _pool() -> ThreadPoolExecutor:
    global _POOL
    if _POOL is None:
        _POOL = ThreadPoolExecutor(max_workers=min(8, os.cpu_count() or 1))
    return _POOL


def _select_step(forest: ClusterForest, roots: list[int],
                 parallel: bool) -> list[tuple[int, int]]:
    def pick(cid: int) -> tuple[int, int | None]:
        return cid, forest.clusters[cid].select_growth_fault()

    if parallel and len(roots) > 1:
        picks = list(_pool().map(pick, roots))
    else:
        picks = [pick(cid) for cid in roots]
    chosen = []
    for cid, f in picks:
        if f is None:
            raise UnsatisfiableSyndromeError(
                f"cluster {cid} is invalid with no candidates left; "
                "the syndrome is not in the image of the check matrix")
        chosen.append((cid, f))
    return chosen


def _run_growth(forest: ClusterForest, config: LsdConfig) -> None:
    """Grow invalid clusters until every cluster is valid."""
    guard = forest.model.num_faults + 2
    while True:
        roots = forest.invalid_roots()
        if not roots:
            return
        forest.sweeps += 1
        if forest.sweeps > guard:
            raise LsdError("growth failed to terminate")
        chosen = _select_step(forest, roots, config.parallel)
        detect_and_merge(forest, chosen)


def _mu_growth(forest: ClusterForest, config: LsdConfig) -> None:
    budget = config.growth_budget(forest.model.num_faults)
    for _ in range(budget):
        chosen = []
        for cid in forest.live_roots():
            f = forest.clusters[cid].select_growth_fault()
            if f is not None:
                chosen.append((cid, f))
        if not chosen:
            return
        detect_and_merge(forest, chosen)
        for cid in forest.live_roots():
            # Extra growth extends the factorization without touching the
            # tracked syndrome residue, so validity persists.
            assert forest.clusters[cid].valid


def _local_reprocess(cluster: Cluster, llrs: np.ndarray,
                     method: OsdMethod) -> np.ndarray:
    fact = cluster.fact
    col_ids = fact.col_order
    entries = []
    for pos, col_id in enumerate(col_ids):
        for d in cluster.model.h.column(col_id):
            entries.append((fact.local_row(int(d)), pos))
    local_h = SparseBinaryMatrix(len(fact.row_universe), len(col_ids), entries)
    local_synd = [fact.local_row(d) for d in cluster.local_syndrome]
    local_llrs = np.array([llrs[c] for c in col_ids])
    local = osd_decode(local_h, local_synd, local_llrs, method)
    return np.array(sorted(col_ids[p] for p in local), dtype=np.int64)


def _assemble(forest: ClusterForest, llrs: np.ndarray,
              config: LsdConfig, reprocess: bool) -> np.ndarray:
    parts: list[np.ndarray] = []
    for cid in forest.live_roots():
        cluster = forest.clusters[cid]
        if reprocess and config.reprocess is not None:
            parts.append(_local_reprocess(cluster, llrs, config.reprocess))
        else:
            parts.append(cluster.local_solution())
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.sort(np.concatenate(parts)).astype(np.int64)


def _forest_stats(forest: ClusterForest) -> tuple[int, int, float]:
    sizes = [len(forest.clusters[cid].fault_nodes)
             for cid in forest.live_roots()]
    if not sizes:
        return 0, 0, 0.0
    return len(sizes), max(sizes), float(np.mean(sizes))


def lsd_decode_detailed(model: DetectorModel, syndrome, llrs,
                        config: LsdConfig | None = None) -> LsdOutcome:
    """Full decode returning the correction plus cluster statistics.

    Statistics (cluster count, maximum and mean fault count) are taken at
    the end of the base growth phase, before any higher-order steps, so they
    describe the factorization the solver actually certified.
    """
    config = config or LsdConfig()
    syndrome = _dense_syndrome(model, syndrome)
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape != (model.num_faults,):
        raise ValueError("llrs length must equal the fault count")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("llrs must be finite")

    forest = ClusterForest(model, syndrome, llrs)
    forest.seed()
    _run_growth(forest, config)
    nu, kappa, kappa_alpha = _forest_stats(forest)

    budget = config.growth_budget(model.num_faults)
    if budget > 0:
        _mu_growth(forest, config)
        support = _assemble(forest, llrs, config, reprocess=True)
    else:
        support = _assemble(forest, llrs, config, reprocess=False)

    summaries = tuple(
        ClusterSummary(tuple(sorted(forest.clusters[cid].fault_nodes)),
                       tuple(sorted(forest.clusters[cid].detector_nodes)))
        for cid in forest.live_roots())
    return LsdOutcome(support=support, nu=nu, kappa=kappa,
                      kappa_alpha=kappa_alpha, clusters=summaries,
                      sweeps=forest.sweeps)


def lsd_decode(model: DetectorModel, syndrome, llrs,
               config: LsdConfig | None = None) -> np.ndarray:
    """Decode a syndrome; returns the sorted support of the correction."""
    return lsd_decode_detailed(model, syndrome, llrs, config).support


def lsd_mu_reprocess(model: DetectorModel, forest: ClusterForest,
                     llrs, syndrome, config: LsdConfig) -> np.ndarray:
    """Higher-order pass over a terminated forest (all clusters valid).

    Grows every cluster up to the configured budget, then reprocesses each
    cluster locally.  A zero budget returns the base solution unchanged.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if forest.invalid_roots():
        raise LsdError("higher-order pass requires a terminated forest")
    budget = config.growth_budget(model.num_faults)
    if budget == 0:
        return _assemble(forest, llrs, config, reprocess=False)
    _mu_growth(forest, config)
    return _assemble(forest, llrs, config, reprocess=True)


def _dense_syndrome(model: DetectorModel, syndrome) -> np.ndarray:
    if hasattr(syndrome, "to_dense"):
        return syndrome.to_dense(model.num_detectors)
    arr = np.asarray(syndrome, dtype=np.uint8)
    if arr.shape != (model.num_detectors,):
        raise ValueError("syndrome length must equal the detector count")
    return arr
