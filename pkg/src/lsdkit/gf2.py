"""Sparse linear algebra over GF(2).

Provides the sparse binary matrix type used throughout the package and an
incrementally maintained elimination state (:class:`PluFactorization`) that
supports appending one column at a time and merging two factorizations with
disjoint row sets.  Appending a column applies the logged row operations of
all previous columns to the new column only; no earlier column is ever
re-eliminated.  Merging relabels the rows of the right operand and
concatenates state, reducing a merge to a plain column append for the
bridging column.
"""

from __future__ import annotations

from typing import Iterable, Iterator

import numpy as np


class Gf2Error(Exception):
    """Base class for errors raised by this module."""


class DuplicateColumnError(Gf2Error):
    """A column id was added to a factorization twice."""


class OverlappingRowsError(Gf2Error):
    """Two factorizations with intersecting row universes were merged."""


class NotInImageError(Gf2Error):
    """A solve was requested for a vector outside the matrix image."""


class SparseBinaryMatrix:
    """Binary matrix stored as sorted index arrays per row and per column.

    Entries are coordinate pairs with value 1; everything else is 0.
    Duplicate entries and out-of-range coordinates are rejected.
    """

    def __init__(self, num_rows: int, num_cols: int,
                 entries: Iterable[tuple[int, int]] = ()):
        if num_rows < 0 or num_cols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        self.num_rows = int(num_rows)
        self.num_cols = int(num_cols)
        col_rows: list[list[int]] = [[] for _ in range(self.num_cols)]
        row_cols: list[list[int]] = [[] for _ in range(self.num_rows)]
        seen: set[tuple[int, int]] = set()
        for r, c in entries:
            r = int(r)
            c = int(c)
            if not (0 <= r < self.num_rows and 0 <= c < self.num_cols):
                raise ValueError(f"entry ({r}, {c}) out of range")
            if (r, c) in seen:
                raise ValueError(f"duplicate entry ({r}, {c})")
            seen.add((r, c))
            col_rows[c].append(r)
            row_cols[r].append(c)
        self._col_rows = [np.array(sorted(rs), dtype=np.int64) for rs in col_rows]
        self._row_cols = [np.array(sorted(cs), dtype=np.int64) for cs in row_cols]

    @classmethod
    def from_dense(cls, arr) -> "SparseBinaryMatrix":
        a = np.asarray(arr)
        rows, cols = np.nonzero(a)
        return cls(a.shape[0], a.shape[1], zip(rows.tolist(), cols.tolist()))

    @classmethod
    def from_columns(cls, num_rows: int,
                     columns: Iterable[Iterable[int]]) -> "SparseBinaryMatrix":
        cols = [sorted(set(int(r) for r in col)) for col in columns]
        entries = [(r, j) for j, col in enumerate(cols) for r in col]
        return cls(num_rows, len(cols), entries)

    def column(self, j: int) -> np.ndarray:
        """Sorted row indices of the nonzero entries in column *j*."""
        return self._col_rows[j]

    def row(self, i: int) -> np.ndarray:
        """Sorted column indices of the nonzero entries in row *i*."""
        return self._row_cols[i]

    @property
    def nnz(self) -> int:
        return sum(len(rs) for rs in self._col_rows)

    def entries(self) -> Iterator[tuple[int, int]]:
        for j, rs in enumerate(self._col_rows):
            for r in rs:
                yield int(r), j

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.num_rows, self.num_cols), dtype=np.uint8)
        for j, rs in enumerate(self._col_rows):
            out[rs, j] = 1
        return out

    def transpose(self) -> "SparseBinaryMatrix":
        return SparseBinaryMatrix(self.num_cols, self.num_rows,
                                  ((c, r) for r, c in self.entries()))

    def mul_support(self, support: Iterable[int]) -> np.ndarray:
        """Product of the matrix with the indicator vector of *support*; dense uint8."""
        out = np.zeros(self.num_rows, dtype=np.uint8)
        for j in support:
            out[self._col_rows[j]] ^= 1
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseBinaryMatrix):
            return NotImplemented
        if (self.num_rows, self.num_cols) != (other.num_rows, other.num_cols):
            return False
        return all(np.array_equal(a, b)
                   for a, b in zip(self._col_rows, other._col_rows))

    def __repr__(self) -> str:
        return (f"SparseBinaryMatrix({self.num_rows}x{self.num_cols}, "
                f"nnz={self.nnz})")


class PluFactorization:
    """Incremental GF(2) elimination state over a growing set of columns.

    Row indices are global; the factorization assigns each enclosed row a
    local position in order of first appearance (``row_universe``).  Columns
    are identified by caller-chosen ids and keep their insertion order
    (``col_order``).  For every pivot the logged row additions clear the
    pivot's column everywhere else, so a reduced pivot column is a unit
    vector and a reduced dependent column is supported on pivot rows only.
    The residue of any vector under the logged operations therefore lies in
    the image exactly when its support is confined to pivot rows.

    A tracked syndrome image (``eliminated_syndrome``) is maintained through
    every append and merge so validity queries and solves against it are
    incremental.
    """

    def __init__(self) -> None:
        self.row_universe: list[int] = []
        self._row_pos: dict[int, int] = {}
        self.col_order: list[int] = []
        self._col_pos: dict[int, int] = {}
        # Reduced columns in local row indexing, one per col_order entry.
        self.u_cols: list[frozenset[int]] = []
        self.pivot_map: dict[int, int] = {}   # column position -> local pivot row
        self._pivot_of_row: dict[int, int] = {}  # local pivot row -> column position
        self._pivot_seq: list[int] = []       # pivot rows in creation order
        self._pivot_targets: list[tuple[int, ...]] = []
        self.dependent_cols: set[int] = set()
        self.eliminated_syndrome: set[int] = set()

    @property
    def rank(self) -> int:
        return len(self.pivot_map)

    @property
    def rowop_log(self) -> list[tuple[int, int]]:
        """Logged row additions as (target_row, source_row) pairs, in order."""
        return [(t, p) for p, targets in zip(self._pivot_seq, self._pivot_targets)
                for t in targets]

    def has_column(self, col_id: int) -> bool:
        return col_id in self._col_pos

    def has_row(self, row_id: int) -> bool:
        return row_id in self._row_pos

    def local_row(self, row_id: int) -> int:
        return self._row_pos[row_id]

    def enclose_row(self, row_id: int) -> int:
        """Add *row_id* to the row universe if absent; return its local index."""
        pos = self._row_pos.get(row_id)
        if pos is None:
            pos = len(self.row_universe)
            self.row_universe.append(row_id)
            self._row_pos[row_id] = pos
        return pos

    def _reduce(self, local_support: set[int]) -> set[int]:
        # Applies the logged eliminations in order to a local support set.
        out = set(local_support)
        for pivot, targets in zip(self._pivot_seq, self._pivot_targets):
            if pivot in out:
                out.symmetric_difference_update(targets)
        return out

    def xor_syndrome_bit(self, row_id: int) -> None:
        """Toggle one detector bit of the tracked syndrome.

        The unit vector is pushed through the logged operations so the
        tracked image stays consistent no matter when the bit arrives.
        """
        local = self.enclose_row(row_id)
        self.eliminated_syndrome.symmetric_difference_update(self._reduce({local}))

    def add_column(self, col_id: int, rows: Iterable[int]) -> "PluFactorization":
        """Append one column, eliminating it against the logged operations.

        New rows in the column's support are enclosed on the fly.  If the
        reduced column has a nonzero entry on an unpivoted row, the lowest
        such local row becomes the pivot and the clearing row additions are
        appended to the log (and replayed onto the tracked syndrome);
        otherwise the column is recorded as dependent.
        """
        if col_id in self._col_pos:
            raise DuplicateColumnError(f"column {col_id} already present")
        support = {self.enclose_row(r) for r in rows}
        reduced = self._reduce(support)
        pos = len(self.col_order)
        self.col_order.append(col_id)
        self._col_pos[col_id] = pos
        free = [r for r in reduced if r not in self._pivot_of_row]
        if not free:
            self.u_cols.append(frozenset(reduced))
            self.dependent_cols.add(pos)
            return self
        pivot = min(free)
        targets = tuple(sorted(reduced - {pivot}))
        self._pivot_seq.append(pivot)
        self._pivot_targets.append(targets)
        self.pivot_map[pos] = pivot
        self._pivot_of_row[pivot] = pos
        self.u_cols.append(frozenset((pivot,)))
        if pivot in self.eliminated_syndrome:
            self.eliminated_syndrome.symmetric_difference_update(targets)
        return self

    def absorb_disjoint(self, other: "PluFactorization") -> "PluFactorization":
        """Concatenate *other* onto this factorization.

        Row universes must be disjoint.  The other factorization's rows,
        columns, reduced columns, pivots, log and tracked syndrome are
        relabelled into this one's local indexing; no column of either side
        is re-eliminated.  *other* must not be used afterwards.
        """
        if self._row_pos.keys() & other._row_pos.keys():
            raise OverlappingRowsError("row universes intersect")
        dup = self._col_pos.keys() & other._col_pos.keys()
        if dup:
            raise DuplicateColumnError(f"columns present on both sides: {sorted(dup)}")
        row_off = len(self.row_universe)
        col_off = len(self.col_order)
        for r in other.row_universe:
            self._row_pos[r] = len(self.row_universe)
            self.row_universe.append(r)
        for c in other.col_order:
            self._col_pos[c] = len(self.col_order)
            self.col_order.append(c)
        self.u_cols.extend(frozenset(r + row_off for r in u) for u in other.u_cols)
        for pos, pivot in other.pivot_map.items():
            self.pivot_map[pos + col_off] = pivot + row_off
            self._pivot_of_row[pivot + row_off] = pos + col_off
        self._pivot_seq.extend(p + row_off for p in other._pivot_seq)
        self._pivot_targets.extend(tuple(t + row_off for t in targets)
                                   for targets in other._pivot_targets)
        self.dependent_cols.update(pos + col_off for pos in other.dependent_cols)
        self.eliminated_syndrome.update(r + row_off
                                        for r in other.eliminated_syndrome)
        return self

    def in_image(self, rows: Iterable[int]) -> bool:
        """Whether the vector supported on global *rows* lies in the span of
        the added columns.  Rows never enclosed count as zero rows of the
        assembled matrix, so support there is unexplainable."""
        local = set()
        for r in rows:
            pos = self._row_pos.get(r)
            if pos is None:
                return False
            local.add(pos)
        residue = self._reduce(local)
        return all(r in self._pivot_of_row for r in residue)

    def solve(self, rows: Iterable[int]) -> np.ndarray:
        """Column ids whose sum equals the vector supported on *rows*.

        Dependent columns are free variables and are fixed to zero, so the
        solution selects pivot columns only.  Raises
        :class:`NotInImageError` when no solution exists.
        """
        local = set()
        for r in rows:
            pos = self._row_pos.get(r)
            if pos is None:
                raise NotInImageError(f"row {r} outside the row universe")
            local.add(pos)
        residue = self._reduce(local)
        return self._select_pivot_columns(residue)

    def syndrome_in_image(self) -> bool:
        """Validity of the tracked syndrome: residue confined to pivot rows."""
        return all(r in self._pivot_of_row for r in self.eliminated_syndrome)

    def solve_tracked(self) -> np.ndarray:
        """Solve against the tracked syndrome (requires validity)."""
        return self._select_pivot_columns(self.eliminated_syndrome)

    def _select_pivot_columns(self, residue: set[int]) -> np.ndarray:
        cols = []
        for r in residue:
            pos = self._pivot_of_row.get(r)
            if pos is None:
                raise NotInImageError("residue is not confined to pivot rows")
            cols.append(self.col_order[pos])
        return np.array(sorted(cols), dtype=np.int64)


def plu_decompose(matrix: SparseBinaryMatrix) -> PluFactorization:
    """Factorize a whole matrix by appending its columns left to right."""
    fact = PluFactorization()
    for j in range(matrix.num_cols):
        fact.add_column(j, matrix.column(j))
    return fact


def merge_factorizations(left: PluFactorization, right: PluFactorization,
                         bridge_col: int,
                         bridge_rows: Iterable[int]) -> PluFactorization:
    """Merge two row-disjoint factorizations and append the bridging column.

    The left operand is extended in place and returned; the rank grows by
    exactly ``rank(right)`` plus one if the bridge column is independent of
    the concatenated columns.
    """
    left.absorb_disjoint(right)
    left.add_column(bridge_col, bridge_rows)
    return left


def kernel_basis(matrix: SparseBinaryMatrix) -> list[np.ndarray]:
    """Basis of the null space, one sorted index array per dependent column."""
    fact = plu_decompose(matrix)
    basis = []
    for pos in sorted(fact.dependent_cols):
        support = {fact.col_order[pos]}
        for r in fact.u_cols[pos]:
            support.add(fact.col_order[fact._pivot_of_row[r]])
        basis.append(np.array(sorted(support), dtype=np.int64))
    return basis


def independent_over_rows(base_rows: Iterable[Iterable[int]],
                          candidates: Iterable[Iterable[int]],
                          num_cols: int) -> list[int]:
    """Indices of *candidates* that are independent of *base_rows* and of the
    previously kept candidates, over GF(2).  Vectors are given as supports of
    length-*num_cols* rows."""
    fact = PluFactorization()
    next_id = 0
    for row in base_rows:
        fact.add_column(next_id, row)
        next_id += 1
    kept = []
    for i, row in enumerate(candidates):
        rank_before = fact.rank
        fact.add_column(next_id, row)
        next_id += 1
        if fact.rank > rank_before:
            kept.append(i)
    return kept
