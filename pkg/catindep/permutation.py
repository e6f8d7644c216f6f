# Copyright 2026 The catindep Authors
# Use of this source code is governed by a BSD-style license that can be
# found in the LICENSE file.

"""
Permutation p-values with fixed row and column totals.

Only y is shuffled, and only within the strata of the conditioning variables. Each stratum keeps
its x values and the multiset of its y values, so every re-tabulated stratum has exactly the
margins of the observed one.

Replicates are drawn in blocks of REPLICATE_BLOCK. Block b uses its own generator
rng_stream(seed, (*stream, b)), which makes the permuted statistics independent of how blocks are
spread over worker threads.
"""

import logging
from multiprocessing.pool import ThreadPool
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .common import InputError
from .contingency import CategoryVector, Strata, assign_strata, check_lengths, tabulate
from .datagen import rng_stream
from .sim_config import DEFAULT_PERMUTATIONS, Method
from .stats_tests import TestResult, degrees_of_freedom, statistic_counts, tie_threshold

logger = logging.getLogger(__name__)

REPLICATE_BLOCK = 256


class PermutationPlan(NamedTuple):
    n_permutations: int = DEFAULT_PERMUTATIONS
    seed: int = 0
    statistic_method: Method = Method.G2

    # (1 + b) / (R + 1) when set, the raw proportion b / R otherwise.
    add_one: bool = True

    # Extra stream ids, e.g. the (i, j) of a pair in a batch run.
    stream: Tuple[int, ...] = ()

    def validate(self):
        if self.n_permutations < 1:
            raise InputError(f"At least one permutation is needed, got {self.n_permutations}")
        if self.statistic_method.base not in (Method.X2, Method.G2):
            raise InputError(f"Cannot permute method {self.statistic_method}")
        return self

    @property
    def result_method(self):
        return Method.PERM_X2 if self.statistic_method.base == Method.X2 else Method.PERM_G2


def permute_within_strata(
    y: CategoryVector,
    strata_assignment: Union[Strata, Sequence[int], "np.ndarray"],
    rng: "np.random.Generator",
) -> CategoryVector:
    "Shuffles y uniformly within every stratum. Nothing moves across strata."
    ids = strata_assignment.ids if isinstance(strata_assignment, Strata) else strata_assignment
    ids = np.asarray(ids, dtype=np.int64)
    if ids.shape != y.codes.shape:
        raise InputError(f"Stratum assignment has length {ids.size}, expected {len(y)}")
    shuffled = y.codes.copy()
    for stratum in np.unique(ids):
        positions = np.flatnonzero(ids == stratum)
        shuffled[positions] = rng.permutation(y.codes[positions])
    return CategoryVector.from_codes(shuffled, y.cardinality)


class _StratumSegment(NamedTuple):
    x_codes: "np.ndarray"
    y_codes: "np.ndarray"


class PermutationEngine(object):
    """
    Statistic of the observed data and of permuted replicates for one (x, y, strata) triple.

    Strata in which shuffling cannot change the table (a single observation, or a constant x or
    y) are folded into a constant contribution.
    """

    def __init__(self, x: CategoryVector, y: CategoryVector, strata: Strata, method: Method):
        check_lengths(x, y)
        if strata.ids.size != len(x):
            raise InputError(f"Stratum assignment has length {strata.ids.size}, expected {len(x)}")
        self.rows = x.cardinality
        self.cols = y.cardinality
        self.method = method.base
        self.n_strata = strata.count

        observed = tabulate(x.codes, y.codes, strata.ids, strata.count, self.rows, self.cols)
        self.per_stratum = statistic_counts(observed, self.method)
        self.observed = float(self.per_stratum.sum())

        self.segments: List[_StratumSegment] = []
        fixed: List[int] = []
        order = np.argsort(strata.ids, kind="stable")
        bounds = np.searchsorted(strata.ids[order], np.arange(strata.count + 1))
        for k in range(strata.count):
            members = order[bounds[k] : bounds[k + 1]]
            xs, ys = x.codes[members], y.codes[members]
            if members.size <= 1 or (xs == xs[0]).all() or (ys == ys[0]).all():
                fixed.append(k)
            else:
                self.segments.append(_StratumSegment(xs, ys))
        self.fixed_part = float(self.per_stratum[fixed].sum()) if fixed else 0.0

    @property
    def observed_computable(self):
        return not np.isnan(self.observed)

    def block(self, seed: int, stream: Tuple[int, ...], index: int, size: int) -> "np.ndarray":
        "Statistics of `size` replicates drawn from block `index`."
        rng = rng_stream(seed, (*stream, index))
        cells = self.rows * self.cols
        offsets = (np.arange(size, dtype=np.int64) * cells)[:, None]
        parts = np.full((size, len(self.segments) + 1), 0.0)
        parts[:, 0] = self.fixed_part
        for column, segment in enumerate(self.segments, start=1):
            shuffled = np.tile(segment.y_codes, (size, 1))
            rng.permuted(shuffled, axis=1, out=shuffled)
            index_array = segment.x_codes * self.cols + shuffled + offsets
            counts = np.bincount(index_array.ravel(), minlength=size * cells)
            parts[:, column] = statistic_counts(
                counts.reshape(size, self.rows, self.cols), self.method
            )
        return parts.sum(axis=1)


def _block_sizes(n_permutations: int):
    full, rest = divmod(n_permutations, REPLICATE_BLOCK)
    return [REPLICATE_BLOCK] * full + ([rest] if rest else [])


def _distribution(engine: PermutationEngine, plan: PermutationPlan, workers: int):
    sizes = _block_sizes(plan.n_permutations)

    def run(index: int):
        return engine.block(plan.seed, plan.stream, index, sizes[index])

    if workers > 1 and len(sizes) > 1:
        with ThreadPool(workers) as pool:
            blocks = pool.map(run, range(len(sizes)))
    else:
        blocks = [run(index) for index in range(len(sizes))]
    return np.concatenate(blocks)


def permutation_distribution(
    x: CategoryVector,
    y: CategoryVector,
    z: Sequence[CategoryVector],
    plan: PermutationPlan,
    workers: int = 1,
) -> "np.ndarray":
    "The R permuted statistics of plan.statistic_method."
    plan.validate()
    check_lengths(x, y, *z)
    engine = PermutationEngine(x, y, assign_strata(z, len(x)), plan.statistic_method)
    return _distribution(engine, plan, workers)


def exceedances(permuted: "np.ndarray", observed: float) -> int:
    """
    Number of permuted statistics at least as large as the observed one.

    Incomputable replicates count as exceeding.
    """
    threshold = tie_threshold(observed)
    return int(((permuted >= threshold) | np.isnan(permuted)).sum())


def stratified_permutation_test(
    x: CategoryVector,
    y: CategoryVector,
    strata: Strata,
    plan: PermutationPlan,
    workers: int = 1,
) -> TestResult:
    "permutation_pvalue for a precomputed stratum assignment."
    plan.validate()
    method = plan.result_method
    dof = degrees_of_freedom(x.cardinality, y.cardinality, strata.count)
    engine = PermutationEngine(x, y, strata, plan.statistic_method)
    if not engine.observed_computable:
        return TestResult.not_computable(method, dof)

    permuted = _distribution(engine, plan, workers)
    exceeding = exceedances(permuted, engine.observed)
    if plan.add_one:
        p_value = (1 + exceeding) / (plan.n_permutations + 1)
    else:
        p_value = exceeding / plan.n_permutations
    logger.debug(
        "permutation test: T=%.6g, %d of %d replicates exceed", engine.observed, exceeding,
        plan.n_permutations,
    )
    return TestResult(engine.observed, dof, float(p_value), method, True)


def permutation_pvalue(
    x: CategoryVector,
    y: CategoryVector,
    z: Sequence[CategoryVector],
    plan: Optional[PermutationPlan] = None,
    workers: int = 1,
) -> TestResult:
    """
    p = (1 + #{b : T_b >= T_obs}) / (R + 1) over R within-stratum permutations of y.

    With plan.add_one unset the raw proportion #{b : T_b >= T_obs} / R is returned instead.
    """
    plan = plan or PermutationPlan()
    check_lengths(x, y, *z)
    return stratified_permutation_test(x, y, assign_strata(z, len(x)), plan, workers)
