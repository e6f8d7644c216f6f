# Copyright 2026 The catindep Authors
# Use of this source code is governed by a BSD-style license that can be
# found in the LICENSE file.

"""
Exact null distributions by complete enumeration, used to validate the permutation engine.

Within a stratum with row totals r and column totals c, the n!/Π c_j! distinct arrangements of y
are grouped by the table they produce. A table O is produced by Π_i r_i!/Π_j O_ij! of them, so
its probability is that count divided by the total number of arrangements (the multivariate
hypergeometric law). Strata are independent and their statistics add up.

Only meant for tiny inputs: the enumeration is guarded by the stratum size.
"""

import math
from fractions import Fraction
from typing import Dict, Iterator, List, NamedTuple, Sequence, Tuple

import numpy as np

from .common import InputError, StatisticNotComputable
from .contingency import (
    CategoryVector,
    ContingencyTable,
    assign_strata,
    check_lengths,
    tabulate,
)
from .sim_config import Method
from .stats_tests import statistic_counts, tie_threshold

# Largest stratum the enumeration accepts.
MAX_STRATUM_SIZE = 10

# Largest number of support points after combining strata.
MAX_SUPPORT = 2_000_000


class ExactDistribution(NamedTuple):
    """Null distribution of a statistic as (value, probability) pairs sorted by value."""

    support: List[Tuple[float, float]]

    @property
    def total_mass(self):
        return math.fsum(mass for _, mass in self.support)

    def upper_tail(self, observed: float) -> float:
        "P(T >= observed) with the tie tolerance of the permutation engine."
        threshold = tie_threshold(observed)
        return min(1.0, math.fsum(mass for value, mass in self.support if value >= threshold))


def _compositions(total: int, bounds: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    "All ways to split `total` into len(bounds) parts with part j <= bounds[j]."
    if len(bounds) == 1:
        if total <= bounds[0]:
            yield (total,)
        return
    for first in range(min(total, bounds[0]) + 1):
        if total - first > sum(bounds[1:]):
            continue
        for rest in _compositions(total - first, bounds[1:]):
            yield (first, *rest)


def tables_with_margins(
    row_totals: Sequence[int], col_totals: Sequence[int]
) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    """
    Every non-negative integer table with the given margins.

    >>> len(list(tables_with_margins([2, 2], [2, 2])))
    3
    """
    if not row_totals:
        if all(c == 0 for c in col_totals):
            yield ()
        return
    for row in _compositions(row_totals[0], col_totals):
        remaining = [c - v for c, v in zip(col_totals, row)]
        for rest in tables_with_margins(row_totals[1:], remaining):
            yield (row, *rest)


def _multinomial(parts: Sequence[int]) -> int:
    result = math.factorial(sum(parts))
    for part in parts:
        result //= math.factorial(part)
    return result


def stratum_distribution(table: ContingencyTable, method: Method) -> Dict[float, Fraction]:
    "Exact distribution of the statistic over all arrangements with the margins of `table`."
    rows = [int(v) for v in table.row_totals]
    cols = [int(v) for v in table.col_totals]
    tables = list(tables_with_margins(rows, cols))
    statistics = statistic_counts(np.array(tables, dtype=np.int64), method.base)
    if np.isnan(statistics).any():
        raise StatisticNotComputable("X² is not computable for a stratum with a zero margin")

    arrangements = _multinomial(cols)
    distribution: Dict[float, Fraction] = {}
    for candidate, statistic in zip(tables, statistics):
        weight = 1
        for row in candidate:
            weight *= _multinomial(row)
        value = float(statistic)
        distribution[value] = distribution.get(value, Fraction(0)) + Fraction(weight, arrangements)
    return distribution


def exact_distribution(
    x: CategoryVector,
    y: CategoryVector,
    z: Sequence[CategoryVector],
    method: Method,
    max_stratum_size: int = MAX_STRATUM_SIZE,
) -> ExactDistribution:
    "Null distribution of the conditional statistic under within-stratum permutation of y."
    check_lengths(x, y, *z)
    strata = assign_strata(z, len(x))
    counts = tabulate(x.codes, y.codes, strata.ids, strata.count, x.cardinality, y.cardinality)

    combined: Dict[float, Fraction] = {0.0: Fraction(1)}
    for stratum in counts:
        table = ContingencyTable.from_counts(stratum)
        if table.grand_total > max_stratum_size:
            raise InputError(
                f"Stratum of size {table.grand_total} exceeds the enumeration limit "
                f"{max_stratum_size}"
            )
        part = stratum_distribution(table, method)
        if len(combined) * len(part) > MAX_SUPPORT:
            raise InputError("Exact distribution support is too large to enumerate")
        merged: Dict[float, Fraction] = {}
        for value, mass in combined.items():
            for other, other_mass in part.items():
                key = value + other
                merged[key] = merged.get(key, Fraction(0)) + mass * other_mass
        combined = merged

    return ExactDistribution([(value, float(mass)) for value, mass in sorted(combined.items())])


def observed_statistic(
    x: CategoryVector, y: CategoryVector, z: Sequence[CategoryVector], method: Method
) -> float:
    "The observed conditional statistic, summed exactly as the permutation engine sums it."
    strata = assign_strata(z, len(x))
    counts = tabulate(x.codes, y.codes, strata.ids, strata.count, x.cardinality, y.cardinality)
    value = float(statistic_counts(counts, method.base).sum())
    if math.isnan(value):
        raise StatisticNotComputable("X² is not computable for a stratum with a zero margin")
    return value


def exact_pvalue(
    x: CategoryVector,
    y: CategoryVector,
    z: Sequence[CategoryVector],
    method: Method,
    max_stratum_size: int = MAX_STRATUM_SIZE,
) -> float:
    """
    Mass of all within-stratum arrangements of y whose statistic is at least the observed one.

    >>> x = CategoryVector.from_codes([0, 0, 1, 1])
    >>> round(exact_pvalue(x, x, [], Method.G2), 4)
    0.3333
    """
    distribution = exact_distribution(x, y, z, method, max_stratum_size)
    return distribution.upper_tail(observed_statistic(x, y, z, method))


def fisher_2x2_pvalue(t: ContingencyTable) -> float:
    """
    Two-sided Fisher exact p-value: the probability of all tables with the margins of `t` that
    are no more likely than `t`.

    Point probabilities are compared as exact integers.

    >>> round(fisher_2x2_pvalue(ContingencyTable.from_counts([[5, 0], [0, 5]])), 5)
    0.00794
    """
    if t.shape != (2, 2):
        raise InputError(f"Fisher's exact test needs a 2 x 2 table, got {t.shape}")
    if t.grand_total <= 0:
        raise InputError("Fisher's exact test needs a non-empty table")
    n = t.grand_total
    row1 = int(t.row_totals[0])
    col1 = int(t.col_totals[0])

    def weight(a: int):
        return math.comb(col1, a) * math.comb(n - col1, row1 - a)

    observed = weight(int(t.counts[0, 0]))
    low, high = max(0, row1 + col1 - n), min(row1, col1)
    tail = sum(w for w in (weight(a) for a in range(low, high + 1)) if w <= observed)
    return min(1.0, float(Fraction(tail, math.comb(n, row1))))
