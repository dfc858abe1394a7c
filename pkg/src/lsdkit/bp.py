"""Min-sum belief propagation over the Tanner graph of a detector model.

Produces posterior log-likelihood ratios per fault together with a hard
decision; used standalone and as the soft-information source for the
cluster and ordered-statistics decoders.  Lower LLR means the fault is more
likely to be part of the error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import DetectorModel


@dataclass(frozen=True)
class BpConfig:
    max_iterations: int = 30
    scaling_factor: float = 0.625
    schedule: str = "parallel"
    clip: float = 50.0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not 0.0 < self.scaling_factor <= 1.0:
            raise ValueError("scaling_factor must lie in (0, 1]")
        if self.schedule not in ("parallel", "serial"):
            raise ValueError("schedule must be 'parallel' or 'serial'")
        if self.clip <= 0.0:
            raise ValueError("clip must be positive")


@dataclass(frozen=True)
class BpResult:
    converged: bool
    hard: np.ndarray          # dense uint8 decision vector
    llrs: np.ndarray          # posterior LLRs at termination
    iterations: int

    @property
    def hard_support(self) -> np.ndarray:
        return np.nonzero(self.hard)[0]


def bp_decode(model: DetectorModel, syndrome, config: BpConfig | None = None) -> BpResult:
    """Run min-sum BP against a dense or sparse syndrome.

    The hard decision (posterior LLR < 0, ties resolved to no-error) is
    checked against the syndrome after every iteration; the run stops at the
    first iteration where it reproduces the syndrome exactly.
    """
    config = config or BpConfig()
    syndrome = _as_dense_syndrome(model, syndrome)
    if config.schedule == "serial":
        return _bp_serial(model, syndrome, config)
    return _bp_parallel(model, syndrome, config)


def _as_dense_syndrome(model: DetectorModel, syndrome) -> np.ndarray:
    if hasattr(syndrome, "to_dense"):
        return syndrome.to_dense(model.num_detectors)
    arr = np.asarray(syndrome, dtype=np.uint8)
    if arr.shape != (model.num_detectors,):
        raise ValueError("syndrome length must equal the detector count")
    return arr


def _bp_parallel(model: DetectorModel, syndrome: np.ndarray,
                 config: BpConfig) -> BpResult:
    edge_fault, edge_seg, starts, seg_det = model.edge_index
    llr0 = model.channel_llrs
    n = model.num_faults
    clip = config.clip
    alpha = config.scaling_factor

    if len(edge_fault) == 0:
        hard = np.zeros(n, dtype=np.uint8)
        return BpResult(not syndrome.any(), hard, llr0.copy(), 1)

    # Syndrome support on detectors with no incident faults can never be
    # reproduced; those rows simply block convergence.
    uncovered = np.ones(len(syndrome), dtype=bool)
    uncovered[seg_det] = False
    covered_ok = not syndrome[uncovered].any()
    synd_seg = syndrome[seg_det]
    # -1 check-message sign for flipped detectors.
    synd_sign = 1.0 - 2.0 * synd_seg.astype(np.float64)

    v_msg = llr0[edge_fault].copy()
    posterior = llr0.copy()
    for it in range(1, config.max_iterations + 1):
        abs_v = np.abs(v_msg)
        neg = (v_msg < 0).astype(np.int64)
        parity = np.add.reduceat(neg, starts) & 1
        sign_excl = 1.0 - 2.0 * ((parity[edge_seg] ^ neg) & 1)

        min1 = np.minimum.reduceat(abs_v, starts)
        at_min = abs_v == min1[edge_seg]
        n_min = np.add.reduceat(at_min.astype(np.int64), starts)
        masked = np.where(at_min, np.inf, abs_v)
        min2 = np.minimum.reduceat(masked, starts)
        min_excl = np.where(at_min & (n_min[edge_seg] == 1),
                            min2[edge_seg], min1[edge_seg])

        c_msg = sign_excl * synd_sign[edge_seg] * \
            np.minimum(alpha * min_excl, clip)
        posterior = llr0 + np.bincount(edge_fault, weights=c_msg, minlength=n)
        v_msg = np.clip(posterior[edge_fault] - c_msg, -clip, clip)

        hard = (posterior < 0).astype(np.uint8)
        check_parity = np.add.reduceat(hard[edge_fault].astype(np.int64),
                                       starts) & 1
        if covered_ok and np.array_equal(check_parity, synd_seg.astype(np.int64)):
            return BpResult(True, hard, posterior, it)
    return BpResult(False, (posterior < 0).astype(np.uint8), posterior,
                    config.max_iterations)


def _bp_serial(model: DetectorModel, syndrome: np.ndarray,
               config: BpConfig) -> BpResult:
    # Layered schedule: checks are visited in index order and variable
    # messages are refreshed immediately after each check update.
    llr0 = model.channel_llrs
    n = model.num_faults
    clip = config.clip
    alpha = config.scaling_factor
    rows = [model.h.row(d) for d in range(model.num_detectors)]
    c_msg = {d: np.zeros(len(rows[d])) for d in range(model.num_detectors)}
    posterior = llr0.copy()

    for it in range(1, config.max_iterations + 1):
        for d in range(model.num_detectors):
            cols = rows[d]
            if len(cols) == 0:
                continue
            v = np.clip(posterior[cols] - c_msg[d], -clip, clip)
            abs_v = np.abs(v)
            sign_all = 1.0 if (v < 0).sum() % 2 == 0 else -1.0
            order = np.argsort(abs_v, kind="stable")
            m1 = abs_v[order[0]]
            m2 = abs_v[order[1]] if len(cols) > 1 else np.inf
            if (abs_v == m1).sum() > 1:
                # Repeated minimum: excluding any single edge leaves m1.
                min_excl = np.full(len(cols), m1)
            else:
                min_excl = np.where(abs_v == m1, m2, m1)
            signs = np.where(v < 0, -1.0, 1.0)
            synd_sign = -1.0 if syndrome[d] else 1.0
            new_c = sign_all * signs * synd_sign * \
                np.minimum(alpha * min_excl, clip)
            posterior[cols] += new_c - c_msg[d]
            c_msg[d] = new_c
        hard = (posterior < 0).astype(np.uint8)
        if np.array_equal(model.h.mul_support(np.nonzero(hard)[0]), syndrome):
            return BpResult(True, hard, posterior.copy(), it)
    return BpResult(False, (posterior < 0).astype(np.uint8), posterior.copy(),
                    config.max_iterations)
