# Copyright 2026 The catindep Authors
# Use of this source code is governed by a BSD-style license that can be
# found in the LICENSE file.

"""
All pairwise tests over the columns of a data matrix.

Every pair goes through exactly the same pipeline as a single test (`run_test`), with the
conditioning strata computed once for the whole matrix. Permutation streams are keyed by the
pair, so results do not depend on the number of workers or on scheduling.
"""

import functools
import itertools
import logging
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

from .common import InputError, batched, worker_pool
from .contingency import (
    CategoryVector,
    DataMatrix,
    Strata,
    assign_strata,
    check_lengths,
    stratified_from_strata,
)
from .permutation import PermutationPlan, stratified_permutation_test
from .sim_config import Method
from .stats_tests import TestResult, asymptotic_test

__all__ = [
    "DataMatrix",
    "PairResultSet",
    "RejectionRate",
    "all_pairs",
    "pair_plan",
    "rejection_rate",
    "run_test",
]

logger = logging.getLogger(__name__)

PairResultSet = Dict[Tuple[int, int], TestResult]

# Pairs handed to a worker process at once.
PAIR_CHUNK = 64


class RejectionRate(NamedTuple):
    # None when no result was computable.
    rate: Optional[float]
    n_computable: int
    n_incomputable: int


def stratified_test(
    x: CategoryVector,
    y: CategoryVector,
    strata: Strata,
    method: Method,
    plan: Optional[PermutationPlan] = None,
    workers: int = 1,
) -> TestResult:
    if method.is_permutation:
        plan = (plan or PermutationPlan())._replace(statistic_method=method.base)
        return stratified_permutation_test(x, y, strata, plan, workers)
    return asymptotic_test(stratified_from_strata(x, y, strata), method)


def run_test(
    x: CategoryVector,
    y: CategoryVector,
    z: Sequence[CategoryVector],
    method: Method,
    plan: Optional[PermutationPlan] = None,
    workers: int = 1,
) -> TestResult:
    """
    Tests X independent of Y given Z with an asymptotic or a permutation p-value.

    `workers` threads share the permutation replicates. The result does not depend on it.
    """
    check_lengths(x, y, *z)
    return stratified_test(x, y, assign_strata(z, len(x)), method, plan, workers)


def pair_plan(plan: Optional[PermutationPlan], i: int, j: int) -> PermutationPlan:
    "The plan used for pair (i, j): the stream of the pair is appended to the plan's stream."
    plan = plan or PermutationPlan()
    return plan._replace(stream=(*plan.stream, i, j))


class _PairJob(NamedTuple):
    matrix: DataMatrix
    strata: Strata
    method: Method
    plan: Optional[PermutationPlan]


# Set once per worker process by _init_worker.
_job: Optional[_PairJob] = None


def _init_worker(job: _PairJob):
    global _job
    _job = job


def _test_pairs(pairs: List[Tuple[int, int]]):
    assert _job is not None
    return _run_pairs(_job, pairs)


def _run_pairs(job: _PairJob, pairs: List[Tuple[int, int]]):
    results: List[Tuple[Tuple[int, int], TestResult]] = []
    for i, j in pairs:
        plan = pair_plan(job.plan, i, j) if job.method.is_permutation else None
        result = stratified_test(
            job.matrix.columns[i], job.matrix.columns[j], job.strata, job.method, plan
        )
        results.append(((i, j), result))
    return results


def all_pairs(
    m: DataMatrix,
    method: Method,
    z_columns: Optional[Sequence[int]] = None,
    plan: Optional[PermutationPlan] = None,
    workers: int = 1,
) -> PairResultSet:
    """
    Tests every unordered pair (i, j), i < j, of the columns not used for conditioning.

    Pair (i, j) equals run_test(column i, column j, z, method, pair_plan(plan, i, j)).
    """
    m.validate()
    z_columns = list(z_columns or [])
    for index in z_columns:
        if not 0 <= index < m.n_columns:
            raise InputError(f"Conditioning column {index} out of range [0, {m.n_columns})")
    if len(set(z_columns)) != len(z_columns):
        raise InputError(f"Conditioning columns repeat: {z_columns}")
    tested = [c for c in range(m.n_columns) if c not in z_columns]
    if len(tested) < 2:
        raise InputError(f"At least two tested columns are needed, got {len(tested)}")

    strata = assign_strata([m.columns[k] for k in z_columns], m.n_rows)
    pairs = list(itertools.combinations(tested, 2))
    job = _PairJob(m, strata, method, plan)
    logger.debug("testing %d pairs with %s over %d strata", len(pairs), method.value, strata.count)

    results: PairResultSet = {}
    with worker_pool(workers, initializer=_init_worker, initargs=(job,)) as pool:
        chunks = batched(pairs, PAIR_CHUNK)
        finished: Iterable[List[Tuple[Tuple[int, int], TestResult]]]
        if pool:
            finished = pool.imap(_test_pairs, chunks)
        else:
            finished = map(functools.partial(_run_pairs, job), chunks)
        for chunk in finished:
            results.update(chunk)
    return results


def rejection_rate(
    r: Union[PairResultSet, Iterable[TestResult]], alpha: float
) -> RejectionRate:
    """
    Share of computable results with p <= alpha. Incomputable results are counted apart.

    >>> rejection_rate([], 0.05)
    RejectionRate(rate=None, n_computable=0, n_incomputable=0)
    """
    if not 0.0 < alpha < 1.0:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    results = list(r.values()) if isinstance(r, dict) else list(r)
    computable = [result for result in results if result.computable]
    rejected = sum(
        1 for result in computable if result.p_value is not None and result.p_value <= alpha
    )
    rate = rejected / len(computable) if computable else None
    return RejectionRate(rate, len(computable), len(results) - len(computable))
