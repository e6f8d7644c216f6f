# Copyright 2026 The catindep Authors
# Use of this source code is governed by a BSD-style license that can be
# found in the LICENSE file.

"""
Tabulation of coded categorical vectors into contingency tables.

Tables are dimensioned by the declared cardinalities of X and Y, not by the values that happen to
be observed, so empty rows and columns survive into the statistics. Conditional tables are split
into strata, one per joint value of the conditioning variables that actually occurs, in order of
first occurrence.
"""

from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .common import InputError


def _frozen(array: "np.ndarray") -> "np.ndarray":
    array.setflags(write=False)
    return array


class CategoryVector(NamedTuple):
    """Length-n sequence of category codes in [0, cardinality)."""

    codes: "np.ndarray"
    cardinality: int

    @classmethod
    def from_codes(cls, codes: Sequence[int], cardinality: Optional[int] = None):
        """
        Validates `codes` and wraps them. Cardinality defaults to max(codes) + 1.

        >>> CategoryVector.from_codes([0, 2, 1]).cardinality
        3
        """
        array = np.array(codes, dtype=np.int64)
        if array.ndim != 1 or array.size == 0:
            raise InputError("A category vector needs at least one observation")
        if cardinality is None:
            cardinality = int(array.max()) + 1
        if cardinality < 1:
            raise InputError(f"Cardinality must be positive, got {cardinality}")
        if array.min() < 0 or array.max() >= cardinality:
            raise InputError(
                f"Codes must lie in [0, {cardinality}), got [{array.min()}, {array.max()}]"
            )
        return cls(_frozen(array), int(cardinality))

    def __len__(self):
        return int(self.codes.size)


class ContingencyTable(NamedTuple):
    """r x c counts with cached margins."""

    counts: "np.ndarray"
    row_totals: "np.ndarray"
    col_totals: "np.ndarray"
    grand_total: int

    @classmethod
    def from_counts(cls, counts: Sequence[Sequence[int]]):
        """
        >>> ContingencyTable.from_counts([[10, 20], [30, 40]]).row_totals.tolist()
        [30, 70]
        """
        array = np.array(counts, dtype=np.int64)
        if array.ndim != 2 or array.shape[0] < 1 or array.shape[1] < 1:
            raise InputError(f"A contingency table must be a non-empty matrix, got {array.shape}")
        if (array < 0).any():
            raise InputError("Contingency table counts must be non-negative")
        return cls(
            _frozen(array),
            _frozen(array.sum(axis=1)),
            _frozen(array.sum(axis=0)),
            int(array.sum()),
        )

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.counts.shape[0]), int(self.counts.shape[1]))

    def has_zero_margin(self):
        return bool((self.row_totals == 0).any() or (self.col_totals == 0).any())


class Strata(NamedTuple):
    """Assignment of every observation to a stratum of the conditioning variables."""

    # Stratum index per observation, in [0, len(keys)).
    ids: "np.ndarray"

    # Joint conditioning value of each stratum, in order of first occurrence.
    keys: List[Tuple[int, ...]]

    @property
    def count(self):
        return len(self.keys)


class StratifiedTable(NamedTuple):
    """One r x c table per observed joint value of the conditioning variables."""

    # K x r x c counts, stratum k in position k.
    counts: "np.ndarray"
    stratum_keys: List[Tuple[int, ...]]

    @classmethod
    def from_tables(
        cls,
        tables: Sequence[ContingencyTable],
        keys: Optional[Sequence[Tuple[int, ...]]] = None,
    ):
        "Stacks tables of identical dimensions into strata."
        if not tables:
            raise InputError("A stratified table needs at least one stratum")
        shapes = {t.shape for t in tables}
        if len(shapes) != 1:
            raise InputError(f"All strata must have identical dimensions, got {sorted(shapes)}")
        if keys is None:
            keys = [(k,) for k in range(len(tables))]
        if len(keys) != len(tables):
            raise InputError("Every stratum needs exactly one key")
        counts = np.stack([t.counts for t in tables]).astype(np.int64)
        return cls(_frozen(counts), list(keys))

    @property
    def strata(self) -> List[ContingencyTable]:
        return [ContingencyTable.from_counts(c) for c in self.counts]

    @property
    def stratum_sizes(self) -> List[int]:
        "n_k of every stratum."
        return [int(n) for n in self.counts.sum(axis=(1, 2))]

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.counts.shape[1]), int(self.counts.shape[2]))

    @property
    def grand_total(self):
        return int(self.counts.sum())


def check_lengths(*vectors: CategoryVector):
    lengths = {len(v) for v in vectors}
    if len(lengths) > 1:
        raise InputError(f"All vectors must have equal length, got lengths {sorted(lengths)}")


def assign_strata(z: Sequence[CategoryVector], n: int) -> Strata:
    """
    Assigns each of `n` observations to the stratum of its joint value of `z`.

    Without conditioning variables there is a single stratum with the empty key.

    >>> assign_strata([CategoryVector.from_codes([1, 0, 1, 0])], 4).ids.tolist()
    [0, 1, 0, 1]
    """
    if not z:
        return Strata(_frozen(np.zeros(n, dtype=np.int64)), [()])
    check_lengths(*z)
    if len(z[0]) != n:
        raise InputError(f"Conditioning vectors have length {len(z[0])}, expected {n}")

    # Mixed-radix encoding of the joint value; cardinalities in practice are tiny.
    joint = np.zeros(n, dtype=np.int64)
    for vector in z:
        joint = joint * vector.cardinality + vector.codes
    _, first_index, inverse = np.unique(joint, return_index=True, return_inverse=True)

    # np.unique sorts by value, renumber strata by first occurrence instead.
    order = np.argsort(first_index, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    ids = rank[inverse.reshape(-1)]
    keys = [tuple(int(v.codes[i]) for v in z) for i in first_index[order]]
    return Strata(_frozen(ids.astype(np.int64)), keys)


def tabulate(
    x_codes: "np.ndarray",
    y_codes: "np.ndarray",
    strata_ids: "np.ndarray",
    n_strata: int,
    rows: int,
    cols: int,
) -> "np.ndarray":
    "K x r x c counts from pre-encoded codes in a single bincount."
    cells = (strata_ids * rows + x_codes) * cols + y_codes
    counts = np.bincount(cells, minlength=n_strata * rows * cols)
    return counts.reshape(n_strata, rows, cols)


def build_table(x: CategoryVector, y: CategoryVector) -> ContingencyTable:
    """
    Cross-tabulates x against y.

    >>> x = CategoryVector.from_codes([0, 0, 1, 1], 2)
    >>> y = CategoryVector.from_codes([0, 1, 0, 1], 2)
    >>> build_table(x, y).counts.tolist()
    [[1, 1], [1, 1]]
    """
    check_lengths(x, y)
    counts = tabulate(
        x.codes, y.codes, np.zeros(len(x), dtype=np.int64), 1, x.cardinality, y.cardinality
    )
    return ContingencyTable.from_counts(counts[0])


def build_stratified(
    x: CategoryVector, y: CategoryVector, z: Sequence[CategoryVector]
) -> StratifiedTable:
    "Cross-tabulates x against y within every observed stratum of z."
    check_lengths(x, y, *z)
    strata = assign_strata(z, len(x))
    return stratified_from_strata(x, y, strata)


def stratified_from_strata(x: CategoryVector, y: CategoryVector, strata: Strata):
    counts = tabulate(
        x.codes, y.codes, strata.ids, strata.count, x.cardinality, y.cardinality
    ).astype(np.int64)
    return StratifiedTable(_frozen(counts), list(strata.keys))


def expected_counts(counts: "np.ndarray") -> "np.ndarray":
    """
    E_ij = O_i+ O_+j / O_++ over the last two axes of a stack of tables.

    Tables with O_++ = 0 get all-zero expected counts.
    """
    counts = np.asarray(counts, dtype=np.float64)
    rows = counts.sum(axis=-1, keepdims=True)
    cols = counts.sum(axis=-2, keepdims=True)
    total = counts.sum(axis=(-2, -1), keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        expected = rows * cols / total
    return np.where(total > 0, expected, 0.0)


def expected_frequencies(t: ContingencyTable) -> "np.ndarray":
    """
    Expected counts under independence with the margins of `t`.

    >>> t = ContingencyTable.from_counts([[10, 20], [30, 40]])
    >>> expected_frequencies(t).tolist()
    [[12.0, 18.0], [28.0, 42.0]]
    """
    if t.grand_total == 0:
        raise InputError("Expected frequencies of an empty table are undefined")
    return expected_counts(t.counts)


class DataMatrix(NamedTuple):
    """n observations of p coded categorical columns."""

    columns: List[CategoryVector]

    @classmethod
    def from_array(cls, values: "np.ndarray", cardinalities: Optional[Sequence[int]] = None):
        "Wraps an n x p array of codes, one CategoryVector per column."
        array = np.asarray(values, dtype=np.int64)
        if array.ndim != 2:
            raise InputError(f"A data matrix must be two dimensional, got shape {array.shape}")
        cards: List[Optional[int]] = [None] * array.shape[1]
        if cardinalities is not None:
            cards = [int(c) for c in cardinalities]
        if len(cards) != array.shape[1]:
            raise InputError(f"Got {len(cards)} cardinalities for {array.shape[1]} columns")
        return cls([CategoryVector.from_codes(array[:, j], cards[j]) for j in range(len(cards))])

    @property
    def n_rows(self):
        return len(self.columns[0]) if self.columns else 0

    @property
    def n_columns(self):
        return len(self.columns)

    @property
    def cardinalities(self) -> List[int]:
        return [c.cardinality for c in self.columns]

    def validate(self):
        check_lengths(*self.columns)
        return self
