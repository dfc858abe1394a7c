"""Noise sampling, Monte-Carlo estimation, windowed decoding, statistics.

Shots are seeded counter-style from (run seed, grid index, shot index), so
any shot can be reproduced in isolation and batches may execute in any
order or in parallel.  Every decoded shot is re-verified against the check
matrix; a correction that fails to reproduce its syndrome aborts the run.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .bp import BpConfig, bp_decode
from .codes import CssCode, phenomenological_model
from .gf2 import NotInImageError
from .lsd import LsdConfig, UnsatisfiableSyndromeError, lsd_decode_detailed
from .model import DetectorModel, error_clusters
from .osd import OsdMethod, osd_decode

Z95 = 1.959963984540054


@dataclass(frozen=True)
class DecoderSpec:
    """Names which pipeline decodes a shot and with what settings."""

    name: str = "bplsd"   # bplsd | bposd | lsd | osd
    bp: BpConfig = field(default_factory=BpConfig)
    lsd: LsdConfig = field(default_factory=LsdConfig)
    osd: OsdMethod = field(default_factory=lambda: OsdMethod("osd0"))

    def __post_init__(self):
        if self.name not in ("bplsd", "bposd", "lsd", "osd"):
            raise ValueError(f"unknown decoder {self.name!r}")

    def describe(self) -> str:
        parts = [self.name, f"bp_iters={self.bp.max_iterations}",
                 f"bp_alpha={self.bp.scaling_factor}",
                 f"bp_schedule={self.bp.schedule}"]
        if self.name.endswith("lsd"):
            parts.append(f"mu={self.lsd.mu}")
            if self.lsd.mu_fraction is not None:
                parts.append(f"mu_fraction={self.lsd.mu_fraction}")
            if self.lsd.reprocess is not None:
                parts.append(f"reprocess={self.lsd.reprocess.kind}:"
                             f"{self.lsd.reprocess.order}")
            if self.lsd.parallel:
                parts.append("parallel=1")
        if self.name.endswith("osd"):
            parts.append(f"osd={self.osd.kind}:{self.osd.order}")
        return ",".join(parts)


@dataclass(frozen=True)
class DecodeOutcome:
    support: np.ndarray
    bp_converged: bool
    nu: int = 0
    kappa: int = 0
    kappa_alpha: float = 0.0


def decode_one(model: DetectorModel, syndrome: np.ndarray,
               spec: DecoderSpec) -> DecodeOutcome:
    """Decode a dense syndrome with the configured pipeline."""
    if not syndrome.any():
        return DecodeOutcome(np.zeros(0, dtype=np.int64), True)
    if spec.name in ("bplsd", "bposd"):
        bp = bp_decode(model, syndrome, spec.bp)
        if bp.converged:
            return DecodeOutcome(bp.hard_support.astype(np.int64), True)
        llrs = bp.llrs
        converged = False
    else:
        llrs = model.channel_llrs
        converged = False
    if spec.name.endswith("lsd"):
        out = lsd_decode_detailed(model, syndrome, llrs, spec.lsd)
        return DecodeOutcome(out.support, converged, out.nu, out.kappa,
                             out.kappa_alpha)
    support = osd_decode(model.h, np.nonzero(syndrome)[0], llrs, spec.osd)
    return DecodeOutcome(support.astype(np.int64), converged)


# ---------------------------------------------------------------------------
# Windowed decoding


@dataclass(frozen=True)
class Window:
    start_round: int
    num_rounds: int
    model: DetectorModel
    col_map: np.ndarray       # local fault column -> global fault column
    commit_rounds: int


@dataclass(frozen=True)
class WindowPlan:
    global_model: DetectorModel
    windows: tuple[Window, ...]
    w: int
    c: int
    rounds: int
    checks: int
    n: int

    def validate(self) -> None:
        for win in self.windows:
            if win.model.h.num_rows != win.num_rounds * self.checks:
                raise ValueError("window model shape is inconsistent")
            if len(win.col_map) != win.model.num_faults:
                raise ValueError("window column map is inconsistent")


def build_window_plan(code: CssCode, side: str, p: float, rounds: int,
                      w: int, c: int) -> WindowPlan:
    """Overlapping-window layout over a repeated-measurement model.

    Interior windows keep measurement noise in every round (truncated
    boundary) so each sub-problem is satisfiable; the final window uses the
    perfect-readout convention of the global model and commits fully.
    """
    if not (w >= c >= 1):
        raise ValueError("need w >= c >= 1")
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    global_model = phenomenological_model(code, side, p, rounds)
    h = code.check_matrix(side)
    checks = h.num_rows
    n = code.n
    windows: list[Window] = []
    start = 0
    while True:
        if start + w >= rounds:
            length = rounds - start
            model = phenomenological_model(code, side, p, length,
                                           final_round_perfect=True)
            windows.append(Window(start, length, model,
                                  _window_col_map(start, length, length - 1,
                                                  n, checks, rounds),
                                  commit_rounds=length))
            break
        model = phenomenological_model(code, side, p, w,
                                       final_round_perfect=False)
        windows.append(Window(start, w, model,
                              _window_col_map(start, w, w, n, checks, rounds),
                              commit_rounds=c))
        start += c
    plan = WindowPlan(global_model, tuple(windows), w, c, rounds, checks, n)
    plan.validate()
    return plan


def _window_col_map(start: int, length: int, meas_rounds: int, n: int,
                    checks: int, rounds: int) -> np.ndarray:
    out = np.empty(length * n + meas_rounds * checks, dtype=np.int64)
    for t in range(length):
        for q in range(n):
            out[t * n + q] = (start + t) * n + q
    base = length * n
    gbase = rounds * n
    for t in range(meas_rounds):
        for ch in range(checks):
            out[base + t * checks + ch] = gbase + (start + t) * checks + ch
    return out


def overlapping_window_decode(plan: WindowPlan, syndrome: np.ndarray,
                              spec: DecoderSpec) -> DecodeOutcome:
    """Decode a full syndrome stream window by window.

    Each window decodes the residual syndrome of its rounds, commits the
    correction on its oldest rounds, and the committed faults' detector
    signature is XORed out of the stream before the next window runs.
    """
    pending = syndrome.astype(np.uint8).copy()
    committed: list[np.ndarray] = []
    converged = True
    nus: list[int] = []
    kappas: list[int] = []
    sizes: list[float] = []
    for win in plan.windows:
        lo = win.start_round * plan.checks
        hi = lo + win.num_rounds * plan.checks
        local = pending[lo:hi]
        outcome = decode_one(win.model, local, spec)
        converged &= outcome.bp_converged
        if outcome.nu:
            nus.append(outcome.nu)
            kappas.append(outcome.kappa)
            sizes.append(outcome.kappa_alpha * outcome.nu)
        commit_cols = _commit_columns(win, outcome.support, plan.n)
        if len(commit_cols):
            global_cols = win.col_map[commit_cols]
            committed.append(global_cols)
            pending ^= plan.global_model.h.mul_support(global_cols)
    support = (np.sort(np.concatenate(committed)).astype(np.int64)
               if committed else np.zeros(0, dtype=np.int64))
    nu = int(np.sum(nus)) if nus else 0
    kappa = int(np.max(kappas)) if kappas else 0
    kappa_alpha = float(np.sum(sizes) / np.sum(nus)) if nus else 0.0
    return DecodeOutcome(support, converged, nu, kappa, kappa_alpha)


def _commit_columns(win: Window, support: np.ndarray, n: int) -> np.ndarray:
    if len(support) == 0:
        return support
    data_limit = win.commit_rounds * n
    meas_base = win.num_rounds * n
    meas_limit = meas_base + win.commit_rounds * win.model.h.num_rows // win.num_rounds
    keep = (support < data_limit) | ((support >= meas_base) &
                                     (support < meas_limit))
    return support[keep]


# ---------------------------------------------------------------------------
# Monte Carlo


@dataclass
class ShotRecord:
    seed: int
    syndrome_weight: int
    bp_converged: bool
    nu: int
    kappa: int
    kappa_alpha: float
    optimal_nu: int
    optimal_kappa: int
    optimal_kappa_alpha: float
    logical_failure: bool
    decode_error: bool = False


@dataclass
class RunReport:
    config: dict
    p: float
    shots: int
    failures: int
    decode_errors: int
    p_l: float
    ci_lo: float
    ci_hi: float
    lr_lo: float
    lr_hi: float
    cycles: int
    mean_nu: float
    mean_kappa: float
    mean_kappa_alpha: float
    opt_mean_nu: float
    opt_mean_kappa: float
    opt_mean_kappa_alpha: float
    records: list[ShotRecord] = field(default_factory=list)

    @property
    def raw_failure_rate(self) -> float:
        return self.failures / self.shots if self.shots else 0.0


def sample_iid_error(priors: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Independent Bernoulli draw per fault; sorted support."""
    return np.nonzero(rng.random(len(priors)) < priors)[0].astype(np.int64)


def shot_rng(run_seed: int, grid_index: int, shot_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence((run_seed, grid_index, shot_index)))


def _cluster_stats_of(model: DetectorModel, support: Iterable[int]) -> tuple[int, int, float]:
    comps = error_clusters(model, support)
    if not comps:
        return 0, 0, 0.0
    sizes = [len(c) for c in comps]
    return len(sizes), max(sizes), float(np.mean(sizes))


def run_shot(task, grid_index: int, run_seed: int,
             shot_index: int) -> ShotRecord:
    """Sample, decode, verify, and score one shot.

    ``task`` is ("direct", model, spec) or ("window", plan, spec).
    """
    kind = task[0]
    model = task[1] if kind == "direct" else task[1].global_model
    spec = task[2]
    rng = shot_rng(run_seed, grid_index, shot_index)
    error = sample_iid_error(model.priors, rng)
    syndrome = model.syndrome_of(error)
    opt_nu, opt_kappa, opt_ka = _cluster_stats_of(model, error)

    try:
        if kind == "direct":
            outcome = decode_one(model, syndrome, spec)
        else:
            outcome = overlapping_window_decode(task[1], syndrome, spec)
    except (UnsatisfiableSyndromeError, NotInImageError):
        return ShotRecord(seed=shot_index, syndrome_weight=int(syndrome.sum()),
                          bp_converged=False, nu=0, kappa=0, kappa_alpha=0.0,
                          optimal_nu=opt_nu, optimal_kappa=opt_kappa,
                          optimal_kappa_alpha=opt_ka, logical_failure=False,
                          decode_error=True)

    residual = syndrome ^ model.syndrome_of(outcome.support)
    if residual.any():
        raise AssertionError(
            "decoder returned a correction that does not reproduce the "
            f"syndrome (shot {shot_index})")
    flipped = np.zeros(model.num_faults, dtype=np.uint8)
    flipped[error] ^= 1
    flipped[outcome.support] ^= 1
    failure = bool(model.logical_effect(np.nonzero(flipped)[0]).any())
    return ShotRecord(seed=shot_index, syndrome_weight=int(syndrome.sum()),
                      bp_converged=outcome.bp_converged, nu=outcome.nu,
                      kappa=outcome.kappa, kappa_alpha=outcome.kappa_alpha,
                      optimal_nu=opt_nu, optimal_kappa=opt_kappa,
                      optimal_kappa_alpha=opt_ka, logical_failure=failure)


def _shot_batch(args) -> list[ShotRecord]:
    task, grid_index, run_seed, start, stop = args
    return [run_shot(task, grid_index, run_seed, i) for i in range(start, stop)]


def run_monte_carlo(task_for_p: Callable[[float], tuple], p_grid: Sequence[float],
                    shots: int, seed: int, *, cycles: int = 1,
                    config_echo: dict | None = None, threads: int = 1,
                    keep_records: bool = False,
                    jsonl_stream=None) -> list[RunReport]:
    """Estimate logical failure rates over a grid of physical error rates.

    ``task_for_p`` maps a grid point to a decode task (see
    :func:`run_shot`).  Reports carry Wilson and likelihood-ratio intervals
    on the per-cycle rate when ``cycles`` exceeds one.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    reports = []
    for grid_index, p in enumerate(p_grid):
        task = task_for_p(p)
        if threads > 1 and shots > 0:
            chunk = max(1, shots // (threads * 4))
            batches = [(task, grid_index, seed, lo, min(lo + chunk, shots))
                       for lo in range(0, shots, chunk)]
            records: list[ShotRecord] = []
            with ProcessPoolExecutor(max_workers=threads) as pool:
                for batch in pool.map(_shot_batch, batches):
                    records.extend(batch)
        else:
            records = [run_shot(task, grid_index, seed, i)
                       for i in range(shots)]
        records.sort(key=lambda r: r.seed)
        if jsonl_stream is not None:
            for rec in records:
                row = asdict(rec)
                row["p"] = p
                jsonl_stream.write(json.dumps(row) + "\n")
        reports.append(_summarize(records, p, cycles, config_echo or {},
                                  keep_records))
    return reports


def _summarize(records: list[ShotRecord], p: float, cycles: int,
               config_echo: dict, keep_records: bool) -> RunReport:
    scored = [r for r in records if not r.decode_error]
    failures = sum(r.logical_failure for r in scored)
    shots = len(scored)
    raw = failures / shots if shots else 0.0
    lo, hi = wilson_interval(failures, shots)
    lr_lo, lr_hi = likelihood_ratio_interval(failures, shots)
    if cycles > 1:
        p_l = per_cycle_rate(raw, cycles)
        lo, hi = per_cycle_rate(lo, cycles), per_cycle_rate(hi, cycles)
        lr_lo, lr_hi = (per_cycle_rate(lr_lo, cycles),
                        per_cycle_rate(lr_hi, cycles))
    else:
        p_l = raw

    def mean(vals):
        vals = list(vals)
        return float(np.mean(vals)) if vals else 0.0

    lsd_shots = [r for r in scored if r.nu > 0]
    return RunReport(
        config=dict(config_echo), p=p, shots=shots, failures=failures,
        decode_errors=len(records) - shots, p_l=p_l, ci_lo=lo, ci_hi=hi,
        lr_lo=lr_lo, lr_hi=lr_hi, cycles=cycles,
        mean_nu=mean(r.nu for r in lsd_shots),
        mean_kappa=mean(r.kappa for r in lsd_shots),
        mean_kappa_alpha=mean(r.kappa_alpha for r in lsd_shots),
        opt_mean_nu=mean(r.optimal_nu for r in scored),
        opt_mean_kappa=mean(r.optimal_kappa for r in scored),
        opt_mean_kappa_alpha=mean(r.optimal_kappa_alpha for r in scored),
        records=records if keep_records else [])


def direct_task(model: DetectorModel, spec: DecoderSpec) -> tuple:
    return ("direct", model, spec)


def windowed_task(plan: WindowPlan, spec: DecoderSpec) -> tuple:
    return ("window", plan, spec)


def reprior(model: DetectorModel, p: float) -> DetectorModel:
    """Copy of the model with all priors replaced by a uniform value."""
    return DetectorModel(h=model.h,
                         priors=np.full(model.num_faults, p, dtype=np.float64),
                         observables=model.observables)


def cluster_stats(task_for_p: Callable[[float], tuple],
                  p_grid: Sequence[float], shots: int, seed: int,
                  config_echo: dict | None = None,
                  jsonl_stream=None) -> list[RunReport]:
    """Monte-Carlo run keeping per-shot records for distribution summaries."""
    return run_monte_carlo(task_for_p, p_grid, shots, seed,
                           config_echo=config_echo, keep_records=True,
                           jsonl_stream=jsonl_stream)


# ---------------------------------------------------------------------------
# Closed forms


def per_cycle_rate(total_rate: float, cycles: int) -> float:
    """Convert a whole-run failure probability to a per-cycle rate."""
    if cycles < 1:
        raise ValueError("cycles must be at least 1")
    total_rate = min(max(total_rate, 0.0), 1.0)
    return 1.0 - (1.0 - total_rate) ** (1.0 / cycles)


def wilson_interval(failures: int, shots: int,
                    z: float = Z95) -> tuple[float, float]:
    if shots == 0:
        return 0.0, 1.0
    phat = failures / shots
    denom = 1.0 + z * z / shots
    center = (phat + z * z / (2 * shots)) / denom
    half = z * math.sqrt(phat * (1 - phat) / shots +
                         z * z / (4 * shots * shots)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def likelihood_ratio_interval(failures: int, shots: int,
                              factor: float = 1000.0) -> tuple[float, float]:
    """Binomial parameters whose likelihood is within *factor* of the MLE."""
    if shots == 0:
        return 0.0, 1.0
    phat = failures / shots
    cut = -math.log(factor)

    def rel_loglik(q: float) -> float:
        if q <= 0.0:
            return 0.0 if failures == 0 else -math.inf
        if q >= 1.0:
            return 0.0 if failures == shots else -math.inf
        ll = failures * math.log(q) + (shots - failures) * math.log(1.0 - q)
        if 0.0 < phat < 1.0:
            ll -= failures * math.log(phat) + \
                (shots - failures) * math.log(1.0 - phat)
        return ll

    def bisect(lo: float, hi: float, want_rising: bool) -> float:
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if (rel_loglik(mid) >= cut) == want_rising:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    lo = 0.0 if phat == 0.0 else bisect(0.0, phat, want_rising=True)
    hi = 1.0 if phat == 1.0 else bisect(phat, 1.0, want_rising=False)
    if phat == 0.0:
        hi = bisect(0.0, 1.0, want_rising=False)
    if phat == 1.0:
        lo = bisect(0.0, 1.0, want_rising=True)
    return lo, hi


def bethe_avg_cluster(p: float, theta: float) -> float:
    """Mean percolation cluster size on the infinite degree-theta tree."""
    if theta < 2:
        raise ValueError("theta must be at least 2")
    if p < 0:
        raise ValueError("p must be non-negative")
    if p * (theta - 1) >= 1.0:
        raise ValueError("p is at or beyond the percolation pole")
    return (1.0 + p) / (1.0 - (theta - 1.0) * p)
