#!/usr/bin/env python3
# Copyright 2026 The catindep Authors
# Use of this source code is governed by a BSD-style license that can be
# found in the LICENSE file.

import sys
import unittest
from pathlib import Path

sys.path.append(str(Path(__file__).resolve().parents[2]))

from catindep.batch import all_pairs, pair_plan, rejection_rate, run_test
from catindep.common import InputError
from catindep.datagen import GenSpec, gen_null_matrix
from catindep.permutation import PermutationPlan
from catindep.sim_config import Distribution, Method
from catindep.stats_tests import TestResult


def null_matrix(n=60, card=3, columns=6, seed=17):
    spec = GenSpec(Distribution.BINOMIAL, card - 1, n, columns, seed, stream=(0,))
    return gen_null_matrix(spec)


class AllPairsTests(unittest.TestCase):
    def test_every_unordered_pair_once(self):
        results = all_pairs(null_matrix(), Method.G2)
        self.assertEqual(len(results), 15)
        self.assertTrue(all(i < j for i, j in results))

    def test_conditioning_columns_are_not_tested(self):
        results = all_pairs(null_matrix(), Method.X2, z_columns=[5])
        self.assertEqual(len(results), 10)
        self.assertFalse(any(5 in pair for pair in results))

    def test_pair_equals_single_test(self):
        matrix = null_matrix()
        plan = PermutationPlan(n_permutations=99, seed=8)
        for method in (Method.X2, Method.G2, Method.PERM_G2):
            results = all_pairs(matrix, method, [4, 5], plan)
            z = [matrix.columns[4], matrix.columns[5]]
            for (i, j), result in results.items():
                single = run_test(
                    matrix.columns[i], matrix.columns[j], z, method, pair_plan(plan, i, j)
                )
                self.assertEqual(result, single)

    def test_pair_streams(self):
        plan = PermutationPlan(seed=3, stream=(1, 2))
        self.assertEqual(pair_plan(plan, 4, 7).stream, (1, 2, 4, 7))
        self.assertEqual(pair_plan(None, 0, 1).stream, (0, 1))

    def test_workers_do_not_change_results(self):
        matrix = null_matrix(columns=8)
        plan = PermutationPlan(n_permutations=99, seed=8)
        serial = all_pairs(matrix, Method.PERM_G2, [7], plan, workers=1)
        parallel = all_pairs(matrix, Method.PERM_G2, [7], plan, workers=2)
        self.assertEqual(serial, parallel)

    def test_invalid_conditioning(self):
        matrix = null_matrix(columns=3)
        with self.assertRaises(InputError):
            all_pairs(matrix, Method.X2, z_columns=[3])
        with self.assertRaises(InputError):
            all_pairs(matrix, Method.X2, z_columns=[1, 1])
        with self.assertRaises(InputError):
            all_pairs(matrix, Method.X2, z_columns=[1, 2])


class RejectionRateTests(unittest.TestCase):
    def test_incomputable_results_are_counted_apart(self):
        results = [
            TestResult(5.0, 1, 0.01, Method.X2, True),
            TestResult(0.2, 1, 0.65, Method.X2, True),
            TestResult(3.9, 1, 0.05, Method.X2, True),
            TestResult.not_computable(Method.X2, 1),
        ]
        rate = rejection_rate(results, 0.05)
        self.assertAlmostEqual(rate.rate, 2 / 3)
        self.assertEqual(rate.n_computable, 3)
        self.assertEqual(rate.n_incomputable, 1)

    def test_result_set(self):
        rate = rejection_rate({(0, 1): TestResult.not_computable(Method.X2, 4)}, 0.05)
        self.assertIsNone(rate.rate)
        self.assertEqual(rate.n_incomputable, 1)

    def test_alpha_range(self):
        with self.assertRaises(InputError):
            rejection_rate([], 1.0)


if __name__ == "__main__":
    unittest.main()
