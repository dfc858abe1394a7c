"""Constructors for the CSS code families used in the experiments.

Provides rotated surface codes, repetition codes, hypergraph products,
bivariate bicycle codes, random regular seed matrices, and the assembly of
detector models for code-capacity and phenomenological noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .gf2 import SparseBinaryMatrix, kernel_basis, plu_decompose
from .model import DetectorModel


@dataclass(frozen=True)
class CssCode:
    """A CSS stabilizer code with one logical basis per type.

    Construction validates commutation (hx . hz^T = 0), the dimension
    identity k = n - rank(hx) - rank(hz), and that the stored logicals
    commute with the opposite checks while being independent of the check
    row spaces.
    """

    hx: SparseBinaryMatrix
    hz: SparseBinaryMatrix
    n: int
    k: int
    logicals_x: SparseBinaryMatrix
    logicals_z: SparseBinaryMatrix
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.hx.num_cols != self.n or self.hz.num_cols != self.n:
            raise ValueError("check matrices must have n columns")
        if not _commutes(self.hx, self.hz):
            raise ValueError("hx and hz do not commute")
        rank_x = plu_decompose(self.hx).rank
        rank_z = plu_decompose(self.hz).rank
        if self.k != self.n - rank_x - rank_z:
            raise ValueError("k does not match n - rank(hx) - rank(hz)")
        if self.logicals_x.num_rows != self.k or self.logicals_z.num_rows != self.k:
            raise ValueError("need k logical representatives per type")
        if not _commutes(self.logicals_x, self.hz):
            raise ValueError("X logicals must commute with Z checks")
        if not _commutes(self.logicals_z, self.hx):
            raise ValueError("Z logicals must commute with X checks")
        for logicals, checks in ((self.logicals_x, self.hx),
                                 (self.logicals_z, self.hz)):
            if self.k and _rank_of_stack(checks, logicals) != \
                    plu_decompose(checks).rank + self.k:
                raise ValueError("logicals are dependent on the check rows")

    def check_matrix(self, side: str) -> SparseBinaryMatrix:
        return self.hx if side == "x" else self.hz

    def logical_matrix(self, side: str) -> SparseBinaryMatrix:
        return self.logicals_x if side == "x" else self.logicals_z


def _commutes(a: SparseBinaryMatrix, b: SparseBinaryMatrix) -> bool:
    prod = (a.to_dense().astype(np.int64) @ b.to_dense().T.astype(np.int64)) % 2
    return not prod.any()


def _rank_of_stack(checks: SparseBinaryMatrix,
                   extra: SparseBinaryMatrix) -> int:
    stacked = np.vstack([checks.to_dense(), extra.to_dense()])
    return plu_decompose(SparseBinaryMatrix.from_dense(stacked.T)).rank


def _logical_basis(h_same: SparseBinaryMatrix,
                   h_opp: SparseBinaryMatrix) -> SparseBinaryMatrix:
    """Representatives of ker(h_same) modulo the row space of h_opp."""
    n = h_same.num_cols
    kernel = kernel_basis(h_same)
    base_rows = [h_opp.row(i) for i in range(h_opp.num_rows)]
    # Incrementally keep kernel vectors that enlarge the opposite row space.
    from .gf2 import independent_over_rows

    kept = independent_over_rows(base_rows, kernel, n)
    entries = [(i, int(c)) for i, ki in enumerate(kept) for c in kernel[ki]]
    return SparseBinaryMatrix(len(kept), n, entries)


def css_code_from_checks(hx: SparseBinaryMatrix, hz: SparseBinaryMatrix,
                         name: str = "") -> CssCode:
    """Assemble a CssCode, deriving k and the logical bases from the checks."""
    n = hx.num_cols
    k = n - plu_decompose(hx).rank - plu_decompose(hz).rank
    logicals_z = _logical_basis(hx, hz)
    logicals_x = _logical_basis(hz, hx)
    return CssCode(hx=hx, hz=hz, n=n, k=k,
                   logicals_x=logicals_x, logicals_z=logicals_z, name=name)


def repetition_code(n: int) -> CssCode:
    """Classical repetition code as a CSS code with Z checks only."""
    if n < 2:
        raise ValueError("repetition code needs n >= 2")
    hz = SparseBinaryMatrix(n - 1, n,
                            [(i, i) for i in range(n - 1)] +
                            [(i, i + 1) for i in range(n - 1)])
    hx = SparseBinaryMatrix(0, n)
    logicals_z = SparseBinaryMatrix(1, n, [(0, 0)])
    logicals_x = SparseBinaryMatrix(1, n, [(0, j) for j in range(n)])
    return CssCode(hx=hx, hz=hz, n=n, k=1,
                   logicals_x=logicals_x, logicals_z=logicals_z,
                   name=f"repetition_{n}")


def surface_code(d: int) -> CssCode:
    """Rotated surface code on a d x d qubit grid, k = 1.

    Bulk plaquettes are 2x2 blocks colored by coordinate parity; weight-2
    boundary checks alternate along the edges (Z on left/right, X on
    top/bottom).
    """
    if d < 3 or d % 2 == 0:
        raise ValueError("d must be odd and at least 3")

    def q(r: int, c: int) -> int:
        return r * d + c

    z_checks: list[list[int]] = []
    x_checks: list[list[int]] = []
    for i in range(d - 1):
        for j in range(d - 1):
            block = [q(i, j), q(i, j + 1), q(i + 1, j), q(i + 1, j + 1)]
            (z_checks if (i + j) % 2 == 0 else x_checks).append(block)
    for j in range(0, d - 2, 2):          # top X pairs, even columns
        x_checks.append([q(0, j), q(0, j + 1)])
    for j in range(1, d - 1, 2):          # bottom X pairs, odd columns
        x_checks.append([q(d - 1, j), q(d - 1, j + 1)])
    for i in range(1, d - 1, 2):          # left Z pairs, odd rows
        z_checks.append([q(i, 0), q(i + 1, 0)])
    for i in range(0, d - 2, 2):          # right Z pairs, even rows
        z_checks.append([q(i, d - 1), q(i + 1, d - 1)])

    hx = SparseBinaryMatrix(len(x_checks), d * d,
                            [(i, v) for i, chk in enumerate(x_checks) for v in chk])
    hz = SparseBinaryMatrix(len(z_checks), d * d,
                            [(i, v) for i, chk in enumerate(z_checks) for v in chk])
    logicals_z = SparseBinaryMatrix(1, d * d, [(0, q(0, c)) for c in range(d)])
    logicals_x = SparseBinaryMatrix(1, d * d, [(0, q(r, 0)) for r in range(d)])
    return CssCode(hx=hx, hz=hz, n=d * d, k=1,
                   logicals_x=logicals_x, logicals_z=logicals_z,
                   name=f"surface_{d}")


def hypergraph_product(h1: SparseBinaryMatrix,
                       h2: SparseBinaryMatrix,
                       name: str = "") -> CssCode:
    """Hypergraph product of two binary matrices.

    hx = [h1 (x) I_n2 | I_m1 (x) h2^T], hz = [I_n1 (x) h2 | h1^T (x) I_m2],
    acting on n = n1*n2 + m1*m2 qubits.
    """
    a = h1.to_dense()
    b = h2.to_dense()
    m1, n1 = a.shape
    m2, n2 = b.shape
    hx = np.concatenate([np.kron(a, np.eye(n2, dtype=np.uint8)),
                         np.kron(np.eye(m1, dtype=np.uint8), b.T)], axis=1)
    hz = np.concatenate([np.kron(np.eye(n1, dtype=np.uint8), b),
                         np.kron(a.T, np.eye(m2, dtype=np.uint8))], axis=1)
    return css_code_from_checks(SparseBinaryMatrix.from_dense(hx),
                                SparseBinaryMatrix.from_dense(hz),
                                name=name or f"hgp_{m1}x{n1}_{m2}x{n2}")


def _shift_power_sum(l: int, m: int,
                     exponents: Sequence[tuple[int, int]]) -> np.ndarray:
    """Sum over (a, b) of x^a y^b where x, y are the cyclic shifts of
    Z_l and Z_m acting on the lm-dimensional group algebra."""
    size = l * m
    out = np.zeros((size, size), dtype=np.uint8)
    for a, b in exponents:
        block = np.zeros((size, size), dtype=np.uint8)
        for i in range(l):
            for j in range(m):
                src = i * m + j
                dst = ((i + a) % l) * m + ((j + b) % m)
                block[dst, src] = 1
        out ^= block
    return out


def bivariate_bicycle(l: int, m: int,
                      a_exponents: Sequence[tuple[int, int]],
                      b_exponents: Sequence[tuple[int, int]],
                      name: str = "") -> CssCode:
    """Bivariate bicycle code: hx = [A | B], hz = [B^T | A^T] with A, B sums
    of commuting cyclic-shift monomials over Z_l x Z_m."""
    if l < 1 or m < 1:
        raise ValueError("l and m must be at least 1")
    if not a_exponents or not b_exponents:
        raise ValueError("exponent lists must be non-empty")
    a = _shift_power_sum(l, m, a_exponents)
    b = _shift_power_sum(l, m, b_exponents)
    hx = np.concatenate([a, b], axis=1)
    hz = np.concatenate([b.T, a.T], axis=1)
    return css_code_from_checks(SparseBinaryMatrix.from_dense(hx),
                                SparseBinaryMatrix.from_dense(hz),
                                name=name or f"bb_{l}x{m}")


def random_regular_ldpc(rows: int, cols: int, row_weight: int,
                        col_weight: int, seed: int,
                        max_restarts: int = 50) -> SparseBinaryMatrix:
    """Random (col_weight, row_weight)-regular full-rank binary matrix with
    Tanner-graph girth at least 6 (no two columns share two rows).

    Starts from a configuration-model matching and repairs duplicate slots
    and 4-cycles with degree-preserving slot swaps.  Deterministic per seed.
    """
    if rows * row_weight != cols * col_weight:
        raise ValueError("socket counts do not match")
    rng = np.random.default_rng(seed)
    row_sockets = np.repeat(np.arange(rows), row_weight)

    def score(cols_of: np.ndarray) -> int:
        dense = np.zeros((rows, cols), dtype=np.int64)
        for j in range(cols):
            for r in cols_of[j]:
                dense[r, j] += 1
        dup = int((dense * (dense - 1) // 2).sum())
        single = np.minimum(dense, 1)
        overlap = single.T @ single
        np.fill_diagonal(overlap, 0)
        excess = int(np.maximum(overlap - 1, 0).sum() // 2)
        return dup + excess

    for _ in range(max_restarts):
        cols_of = rng.permutation(row_sockets).reshape(cols, col_weight).copy()
        current = score(cols_of)
        for _ in range(20000):
            if current == 0:
                break
            c1, c2 = rng.integers(0, cols, size=2)
            if c1 == c2:
                continue
            s1 = rng.integers(0, col_weight)
            s2 = rng.integers(0, col_weight)
            cols_of[c1, s1], cols_of[c2, s2] = cols_of[c2, s2], cols_of[c1, s1]
            proposed = score(cols_of)
            if proposed <= current:
                current = proposed
            else:
                cols_of[c1, s1], cols_of[c2, s2] = cols_of[c2, s2], cols_of[c1, s1]
        if current != 0:
            continue
        dense = np.zeros((rows, cols), dtype=np.uint8)
        for j in range(cols):
            dense[cols_of[j], j] = 1
        if plu_decompose(SparseBinaryMatrix.from_dense(dense)).rank != rows:
            continue
        return SparseBinaryMatrix.from_dense(dense)
    raise RuntimeError("failed to sample a valid regular matrix")


def code_capacity_model(code: CssCode, side: str, p: float) -> DetectorModel:
    """Single-round model: the chosen check matrix with uniform priors and
    the same-side logical matrix as observables."""
    side = side.lower()
    if side not in ("x", "z"):
        raise ValueError("side must be 'x' or 'z'")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    h = code.check_matrix(side)
    priors = np.full(code.n, p, dtype=np.float64)
    return DetectorModel(h=h, priors=priors,
                         observables=code.logical_matrix(side))


def phenomenological_model(code: CssCode, side: str, p: float, rounds: int,
                           final_round_perfect: bool = True) -> DetectorModel:
    """Repeated measurement model with data and measurement faults.

    Detectors are XORs of consecutive measurement rounds, laid out
    round-major.  Columns are data faults round-major, then measurement
    faults round-major.  With the perfect final readout the last round
    carries no measurement faults, so the decoding problem is always
    satisfiable; without it the final round's measurement faults flip only
    their own detector (truncation boundary for windowed decoding).
    """
    side = side.lower()
    if side not in ("x", "z"):
        raise ValueError("side must be 'x' or 'z'")
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    h = code.check_matrix(side)
    logical = code.logical_matrix(side)
    n = code.n
    checks = h.num_rows
    meas_rounds = rounds - 1 if final_round_perfect else rounds
    num_faults = rounds * n + meas_rounds * checks
    num_detectors = rounds * checks

    def det(t: int, c: int) -> int:
        return t * checks + c

    entries: list[tuple[int, int]] = []
    obs_entries: list[tuple[int, int]] = []
    for t in range(rounds):
        for q in range(n):
            col = t * n + q
            for c in h.column(q):
                entries.append((det(t, int(c)), col))
            for row in range(logical.num_rows):
                if q in set(int(x) for x in logical.row(row)):
                    obs_entries.append((row, col))
    meas_base = rounds * n
    for t in range(meas_rounds):
        for c in range(checks):
            col = meas_base + t * checks + c
            entries.append((det(t, c), col))
            if t + 1 < rounds:
                entries.append((det(t + 1, c), col))
    hh = SparseBinaryMatrix(num_detectors, num_faults, entries)
    observables = SparseBinaryMatrix(logical.num_rows, num_faults, obs_entries)
    priors = np.full(num_faults, p, dtype=np.float64)
    return DetectorModel(h=hh, priors=priors, observables=observables)


# Exponent data for the [[144, 12, 12]] bivariate bicycle configuration:
# A = x^3 + y + y^2 and B = y^3 + x + x^2 over Z_12 x Z_6.  Trusted only
# after the rank-derived k = 12 check that the constructor performs.
BB_144_12_12 = {
    "l": 12,
    "m": 6,
    "a_exponents": ((3, 0), (0, 1), (0, 2)),
    "b_exponents": ((0, 3), (1, 0), (2, 0)),
}


def bb_144() -> CssCode:
    return bivariate_bicycle(BB_144_12_12["l"], BB_144_12_12["m"],
                             BB_144_12_12["a_exponents"],
                             BB_144_12_12["b_exponents"],
                             name="bb_144_12_12")
