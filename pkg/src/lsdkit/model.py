"""Decoding-problem data model.

A detector model couples a binary check matrix (detectors x faults) with
per-fault prior probabilities and a logical-observable matrix used to score
decoding failures.  Models are read from and written to a plain-text format
(see :func:`load_model`), and this module also provides the fault-graph
projection and the partition of an error into its connected components.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from .gf2 import SparseBinaryMatrix


class DemParseError(ValueError):
    """Malformed model file; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Syndrome:
    """Support of flipped detectors."""

    bits: frozenset[int]

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Syndrome":
        return cls(frozenset(int(b) for b in bits))

    @classmethod
    def from_dense(cls, vec) -> "Syndrome":
        return cls(frozenset(int(i) for i in np.nonzero(np.asarray(vec))[0]))

    def to_dense(self, num_detectors: int) -> np.ndarray:
        out = np.zeros(num_detectors, dtype=np.uint8)
        if self.bits:
            out[sorted(self.bits)] = 1
        return out

    @property
    def weight(self) -> int:
        return len(self.bits)

    def validate(self, num_detectors: int) -> None:
        for b in self.bits:
            if not 0 <= b < num_detectors:
                raise ValueError(f"detector index {b} out of range")


@dataclass(frozen=True)
class DetectorModel:
    """Check matrix, per-fault priors, and the observable matrix.

    Immutable after construction; safe to share across concurrent decodes.
    """

    h: SparseBinaryMatrix
    priors: np.ndarray
    observables: SparseBinaryMatrix

    def __post_init__(self):
        priors = np.asarray(self.priors, dtype=np.float64)
        if priors.shape != (self.h.num_cols,):
            raise ValueError("priors length must equal the fault count")
        if not np.all((priors > 0.0) & (priors < 1.0)):
            raise ValueError("priors must lie strictly in (0, 1)")
        priors.setflags(write=False)
        object.__setattr__(self, "priors", priors)
        if self.observables.num_cols != self.h.num_cols:
            raise ValueError("observables must have one column per fault")

    @property
    def num_detectors(self) -> int:
        return self.h.num_rows

    @property
    def num_faults(self) -> int:
        return self.h.num_cols

    @property
    def num_observables(self) -> int:
        return self.observables.num_rows

    @cached_property
    def channel_llrs(self) -> np.ndarray:
        """Prior log-likelihood ratios ln((1-p)/p), one per fault."""
        out = np.log((1.0 - self.priors) / self.priors)
        out.setflags(write=False)
        return out

    @cached_property
    def edge_index(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Flat Tanner-graph edges grouped by detector.

        Returns (edge_fault, edge_segment, segment_starts, segment_detector)
        covering only detectors of nonzero degree, so every segment is
        non-empty and safe for ``reduceat``.
        """
        faults = []
        segs = []
        seg_det = []
        for d in range(self.num_detectors):
            cols = self.h.row(d)
            if len(cols) == 0:
                continue
            faults.append(cols)
            segs.append(np.full(len(cols), len(seg_det), dtype=np.int64))
            seg_det.append(d)
        if not faults:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty, empty, empty
        edge_fault = np.concatenate(faults)
        edge_seg = np.concatenate(segs)
        degrees = np.array([len(f) for f in faults], dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(degrees)[:-1]])
        return edge_fault, edge_seg, starts, np.array(seg_det, dtype=np.int64)

    def syndrome_of(self, error_support: Iterable[int]) -> np.ndarray:
        """Dense detector vector flipped by the given fault support."""
        return self.h.mul_support(error_support)

    def logical_effect(self, support: Iterable[int]) -> np.ndarray:
        """Dense observable vector flipped by the given fault support."""
        return self.observables.mul_support(support)


@dataclass(frozen=True)
class FaultGraph:
    """Projection of the Tanner graph onto fault nodes."""

    adjacency: tuple[tuple[int, ...], ...]

    def neighbors(self, fault: int) -> tuple[int, ...]:
        return self.adjacency[fault]

    @property
    def num_faults(self) -> int:
        return len(self.adjacency)

    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)


def load_model(path) -> DetectorModel:
    """Parse a detector-model file.

    Format (UTF-8, line oriented, '#' starts a comment):

        qdem 1 <num_detectors> <num_faults> <num_observables>
        f <prob> d <d0> <d1> ... [L <l0> <l1> ...]

    with one ``f`` line per fault, in column order.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_model(text)


def parse_model(text: str) -> DetectorModel:
    header = None
    fault_lines: list[tuple[int, list[str]]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if header is None:
            if tokens[0] != "qdem":
                raise DemParseError(line_no, "expected 'qdem' header")
            if len(tokens) != 5:
                raise DemParseError(line_no, "header needs 4 numeric fields")
            try:
                version, nd, nf, no = (int(t) for t in tokens[1:])
            except ValueError:
                raise DemParseError(line_no, "non-integer header field") from None
            if version != 1:
                raise DemParseError(line_no, f"unsupported version {version}")
            if nd < 0 or nf < 0 or no < 0:
                raise DemParseError(line_no, "negative count in header")
            header = (nd, nf, no)
        else:
            if tokens[0] != "f":
                raise DemParseError(line_no, f"expected fault line, got {tokens[0]!r}")
            fault_lines.append((line_no, tokens))
    if header is None:
        raise DemParseError(1, "missing 'qdem' header")
    nd, nf, no = header
    if len(fault_lines) != nf:
        raise DemParseError(
            fault_lines[-1][0] if fault_lines else 1,
            f"expected {nf} fault lines, found {len(fault_lines)}")

    priors = np.empty(nf, dtype=np.float64)
    h_entries: list[tuple[int, int]] = []
    obs_entries: list[tuple[int, int]] = []
    for col, (line_no, tokens) in enumerate(fault_lines):
        if len(tokens) < 3 or tokens[2] != "d":
            raise DemParseError(line_no, "fault line must read 'f <prob> d ...'")
        try:
            prob = float(tokens[1])
        except ValueError:
            raise DemParseError(line_no, f"bad probability {tokens[1]!r}") from None
        if not 0.0 < prob < 1.0:
            raise DemParseError(line_no, f"probability {prob} outside (0, 1)")
        priors[col] = prob
        section = "d"
        dets: list[int] = []
        obs: list[int] = []
        for tok in tokens[3:]:
            if tok == "L":
                if section == "L":
                    raise DemParseError(line_no, "duplicate 'L' marker")
                section = "L"
                continue
            try:
                idx = int(tok)
            except ValueError:
                raise DemParseError(line_no, f"bad index {tok!r}") from None
            (dets if section == "d" else obs).append(idx)
        for d in dets:
            if not 0 <= d < nd:
                raise DemParseError(line_no, f"detector index {d} out of range")
            h_entries.append((d, col))
        for l in obs:
            if not 0 <= l < no:
                raise DemParseError(line_no, f"observable index {l} out of range")
            obs_entries.append((l, col))
        if len(set(dets)) != len(dets) or len(set(obs)) != len(obs):
            raise DemParseError(line_no, "repeated index on fault line")

    h = SparseBinaryMatrix(nd, nf, h_entries)
    observables = SparseBinaryMatrix(no, nf, obs_entries)
    return DetectorModel(h=h, priors=priors, observables=observables)


def format_model(model: DetectorModel) -> str:
    lines = [f"qdem 1 {model.num_detectors} {model.num_faults} "
             f"{model.num_observables}"]
    for j in range(model.num_faults):
        parts = [f"f {float(model.priors[j])!r} d"]
        parts.extend(str(int(d)) for d in model.h.column(j))
        obs = model.observables.column(j)
        if len(obs):
            parts.append("L")
            parts.extend(str(int(l)) for l in obs)
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def save_model(model: DetectorModel, path) -> None:
    Path(path).write_text(format_model(model), encoding="utf-8")


def fault_graph(model: DetectorModel) -> FaultGraph:
    """Two faults are adjacent iff their columns share a nonzero detector row."""
    neighbor_sets: list[set[int]] = [set() for _ in range(model.num_faults)]
    for d in range(model.num_detectors):
        cols = model.h.row(d)
        for a in cols:
            sa = neighbor_sets[a]
            for b in cols:
                if a != b:
                    sa.add(int(b))
    return FaultGraph(tuple(tuple(sorted(s)) for s in neighbor_sets))


def error_clusters(model: DetectorModel,
                   error_support: Iterable[int]) -> list[set[int]]:
    """Partition an error into connected components of the fault graph.

    Components are found without materializing the full fault graph: two
    faults of the error are linked when they share a detector row.  The
    returned sets are ordered by their smallest fault index.
    """
    support = sorted(set(int(f) for f in error_support))
    parent: dict[int, int] = {f: f for f in support}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    row_first: dict[int, int] = {}
    for f in support:
        for d in model.h.column(f):
            d = int(d)
            if d in row_first:
                ra, rb = find(row_first[d]), find(f)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
            else:
                row_first[d] = f
    groups: dict[int, set[int]] = {}
    for f in support:
        groups.setdefault(find(f), set()).add(f)
    return [groups[root] for root in sorted(groups)]
