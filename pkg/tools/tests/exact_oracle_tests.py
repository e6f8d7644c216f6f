#!/usr/bin/env python3
# Copyright 2026 The catindep Authors
# Use of this source code is governed by a BSD-style license that can be
# found in the LICENSE file.

import math
import sys
import unittest
from fractions import Fraction
from pathlib import Path
from typing import Dict

sys.path.append(str(Path(__file__).resolve().parents[2]))

from catindep.common import InputError, StatisticNotComputable
from catindep.contingency import CategoryVector, ContingencyTable
from catindep.datagen import rng_stream
from catindep.exact_oracle import (
    exact_distribution,
    exact_pvalue,
    fisher_2x2_pvalue,
    stratum_distribution,
    tables_with_margins,
)
from catindep.permutation import PermutationPlan, permutation_pvalue
from catindep.sim_config import Method


def vector(codes, cardinality=None):
    return CategoryVector.from_codes(codes, cardinality)


class EnumerationTests(unittest.TestCase):
    def test_tables_with_margins(self):
        self.assertEqual(
            sorted(tables_with_margins([2, 2], [2, 2])),
            [((0, 2), (2, 0)), ((1, 1), (1, 1)), ((2, 0), (0, 2))],
        )
        # Permutation matrices.
        self.assertEqual(len(list(tables_with_margins([1, 1, 1], [1, 1, 1]))), 6)

    def test_stratum_distribution_is_hypergeometric(self):
        table = ContingencyTable.from_counts([[2, 1], [1, 2]])
        distribution = stratum_distribution(table, Method.G2)
        self.assertEqual(sum(distribution.values()), Fraction(1))
        # O_11 = 0, 1, 2, 3 are produced by 1, 9, 9, 1 of the 20 arrangements.
        masses: Dict[float, Fraction] = {}
        for value, mass in distribution.items():
            masses[round(value, 9)] = masses.get(round(value, 9), Fraction(0)) + mass
        self.assertEqual(sorted(masses.values()), [Fraction(1, 10), Fraction(9, 10)])

    def test_total_mass(self):
        x = vector([0, 1, 2, 0, 1, 2, 0])
        y = vector([1, 1, 0, 0, 1, 0, 1])
        z = vector([0, 0, 0, 1, 1, 1, 1])
        self.assertAlmostEqual(exact_distribution(x, y, [z], Method.G2).total_mass, 1.0, places=12)


class ExactPValueTests(unittest.TestCase):
    def test_perfect_dependence(self):
        x = vector([0, 0, 1, 1])
        self.assertAlmostEqual(exact_pvalue(x, x, [], Method.G2), 1 / 3, places=12)
        self.assertAlmostEqual(exact_pvalue(x, x, [], Method.X2), 1 / 3, places=12)
        x = vector([0, 0, 0, 1, 1, 1])
        self.assertAlmostEqual(exact_pvalue(x, x, [], Method.G2), 0.1, places=12)

    def test_strata_are_independent(self):
        x = vector([0, 0, 1, 1, 0, 0, 1, 1])
        z = vector([0, 0, 0, 0, 1, 1, 1, 1])
        self.assertAlmostEqual(exact_pvalue(x, x, [z], Method.G2), 1 / 9, places=12)

    def test_independent_data(self):
        x = vector([0, 0, 1, 1])
        y = vector([0, 1, 0, 1])
        self.assertAlmostEqual(exact_pvalue(x, y, [], Method.G2), 1.0, places=12)

    def test_zero_margin(self):
        x = vector([0, 1, 0, 1], 3)
        y = vector([0, 1, 1, 0])
        with self.assertRaises(StatisticNotComputable):
            exact_pvalue(x, y, [], Method.X2)
        self.assertAlmostEqual(exact_pvalue(x, y, [], Method.G2), 1.0, places=12)

    def test_enumeration_guard(self):
        x = vector([0, 1] * 8)
        with self.assertRaises(InputError):
            exact_pvalue(x, x, [], Method.G2)
        self.assertGreater(exact_pvalue(x, x, [], Method.G2, max_stratum_size=16), 0.0)

    def test_agrees_with_permutation_on_tiny_instances(self):
        replicates = 20000
        for instance in range(12):
            rng = rng_stream(2024, instance)
            n = int(rng.integers(5, 9))
            card = int(rng.integers(2, 4))
            x = vector(rng.integers(0, card, n), card)
            y = vector(rng.integers(0, card, n), card)
            z = [vector(rng.integers(0, 2, n), 2)] if instance % 2 else []
            exact = exact_pvalue(x, y, z, Method.G2)
            plan = PermutationPlan(n_permutations=replicates, seed=instance, add_one=False)
            estimate = permutation_pvalue(x, y, z, plan).p_value
            tolerance = 4 * math.sqrt(max(exact * (1 - exact), 1e-4) / replicates)
            self.assertLess(abs(estimate - exact), tolerance, msg=instance)


class FisherTests(unittest.TestCase):
    def test_two_sided_p_value(self):
        table = ContingencyTable.from_counts([[1, 9], [9, 1]])
        self.assertAlmostEqual(fisher_2x2_pvalue(table), 202 / 184756, places=15)
        table = ContingencyTable.from_counts([[5, 0], [0, 5]])
        self.assertAlmostEqual(fisher_2x2_pvalue(table), 2 / 252, places=15)

    def test_independent_table(self):
        table = ContingencyTable.from_counts([[3, 3], [3, 3]])
        self.assertEqual(fisher_2x2_pvalue(table), 1.0)

    def test_only_2x2(self):
        with self.assertRaises(InputError):
            fisher_2x2_pvalue(ContingencyTable.from_counts([[1, 2, 3], [4, 5, 6]]))


if __name__ == "__main__":
    unittest.main()
