# Copyright 2026 The catindep Authors
# Use of this source code is governed by a BSD-style license that can be
# found in the LICENSE file.

"""
Tests of (conditional) independence for categorical data: Pearson X², likelihood-ratio G², their
asymptotic and fixed-margin permutation p-values, an exact enumeration oracle and an engine for
all pairwise tests over the columns of a data matrix.
"""

from .batch import PairResultSet, RejectionRate, all_pairs, pair_plan, rejection_rate, run_test
from .common import CatindepError, ConfigError, InputError, StatisticNotComputable
from .contingency import (
    CategoryVector,
    ContingencyTable,
    DataMatrix,
    StratifiedTable,
    build_stratified,
    build_table,
    expected_frequencies,
)
from .datagen import AlternativeSpec, GenSpec, gen_alternative, gen_null_matrix, rng_stream
from .exact_oracle import exact_distribution, exact_pvalue, fisher_2x2_pvalue
from .permutation import PermutationPlan, permutation_distribution, permutation_pvalue
from .sim_config import Distribution, Method
from .stats_tests import (
    TestResult,
    chi_square_sf,
    conditional_statistic,
    degrees_of_freedom,
    expected_count_diagnostics,
    g2_statistic,
    x2_statistic,
)

__all__ = [
    "AlternativeSpec",
    "CatindepError",
    "CategoryVector",
    "ConfigError",
    "ContingencyTable",
    "DataMatrix",
    "Distribution",
    "GenSpec",
    "InputError",
    "Method",
    "PairResultSet",
    "PermutationPlan",
    "RejectionRate",
    "StatisticNotComputable",
    "StratifiedTable",
    "TestResult",
    "all_pairs",
    "build_stratified",
    "build_table",
    "chi_square_sf",
    "conditional_statistic",
    "degrees_of_freedom",
    "exact_distribution",
    "exact_pvalue",
    "expected_count_diagnostics",
    "expected_frequencies",
    "fisher_2x2_pvalue",
    "g2_statistic",
    "gen_alternative",
    "gen_null_matrix",
    "pair_plan",
    "permutation_distribution",
    "permutation_pvalue",
    "rejection_rate",
    "rng_stream",
    "run_test",
    "x2_statistic",
]
