#!/usr/bin/env python3
# Copyright 2026 The catindep Authors
# Use of this source code is governed by a BSD-style license that can be
# found in the LICENSE file.

import math
import sys
import unittest
from pathlib import Path

import numpy as np
from scipy import integrate  # type: ignore

sys.path.append(str(Path(__file__).resolve().parents[2]))

from catindep.common import InputError
from catindep.contingency import ContingencyTable, StratifiedTable
from catindep.sim_config import Method
from catindep.stats_tests import (
    TestResult,
    asymptotic_test,
    chi_square_cdf,
    chi_square_sf,
    conditional_statistic,
    degrees_of_freedom,
    expected_count_diagnostics,
    g2_counts,
    g2_statistic,
    regularized_gamma_q,
    stratified_diagnostics,
    x2_counts,
    x2_statistic,
)

TABLE = [[10, 20], [30, 40]]
EXPECTED = [[12.0, 18.0], [28.0, 42.0]]


def hand_x2(observed, expected):
    return sum(
        (o - e) ** 2 / e for row_o, row_e in zip(observed, expected) for o, e in zip(row_o, row_e)
    )


def hand_g2(observed, expected):
    return 2 * sum(
        o * math.log(o / e)
        for row_o, row_e in zip(observed, expected)
        for o, e in zip(row_o, row_e)
        if o > 0
    )


def chi_square_density(t: float, dof: int) -> float:
    k = dof / 2.0
    return math.exp((k - 1.0) * math.log(t) - t / 2.0 - k * math.log(2.0) - math.lgamma(k))


def upper_tail_by_quadrature(x: float, dof: int) -> float:
    "Integrates the density over [x, x + 400] and the negligible rest separately."
    body, _ = integrate.quad(
        chi_square_density, x, x + 400.0, args=(dof,), epsabs=1e-13, epsrel=1e-12, limit=200
    )
    rest, _ = integrate.quad(chi_square_density, x + 400.0, math.inf, args=(dof,))
    return body + rest


def table(counts):
    return ContingencyTable.from_counts(counts)


class StatisticTests(unittest.TestCase):
    def test_pearson_statistic(self):
        self.assertAlmostEqual(x2_statistic(table(TABLE)), hand_x2(TABLE, EXPECTED), places=9)
        self.assertAlmostEqual(x2_statistic(table(TABLE)), 0.793651, places=6)

    def test_likelihood_ratio_statistic(self):
        self.assertAlmostEqual(g2_statistic(table(TABLE)), hand_g2(TABLE, EXPECTED), places=9)

    def test_statistics_vanish_when_observed_equals_expected(self):
        t = table([[1, 2], [2, 4]])
        self.assertAlmostEqual(x2_statistic(t), 0.0, places=12)
        self.assertAlmostEqual(g2_statistic(t), 0.0, places=12)

    def test_invariant_under_transposition_and_relabeling(self):
        counts = np.array([[3, 0, 7], [1, 5, 2]])
        x2, g2 = x2_statistic(table(counts)), g2_statistic(table(counts))
        variants = [counts.T, counts[::-1, ::-1], counts[:, [2, 0, 1]], counts[::-1].T]
        for variant in variants:
            self.assertAlmostEqual(float(x2_counts(variant)), x2, places=12)
            self.assertAlmostEqual(float(g2_counts(variant)), g2, places=12)
            self.assertAlmostEqual(x2_statistic(table(variant)), x2, places=12)
            self.assertAlmostEqual(g2_statistic(table(variant)), g2, places=12)

    def test_zero_margin(self):
        t = table([[3, 0], [5, 0]])
        self.assertIsNone(x2_statistic(t))
        # 0 log 0 = 0, the table is simply independent.
        self.assertAlmostEqual(g2_statistic(t), 0.0, places=12)

    def test_empty_table(self):
        with self.assertRaises(InputError):
            x2_statistic(table([[0, 0], [0, 0]]))
        with self.assertRaises(InputError):
            g2_statistic(table([[0, 0], [0, 0]]))

    def test_conditional_statistic_adds_strata(self):
        a = table([[5, 1], [2, 6]])
        b = table([[3, 4], [4, 2]])
        s = StratifiedTable.from_tables([a, b])
        self.assertAlmostEqual(
            conditional_statistic(s, Method.X2), x2_statistic(a) + x2_statistic(b), places=12
        )
        self.assertAlmostEqual(
            conditional_statistic(s, Method.G2), g2_statistic(a) + g2_statistic(b), places=12
        )

    def test_conditional_pearson_with_one_bad_stratum(self):
        s = StratifiedTable.from_tables([table([[5, 1], [2, 6]]), table([[3, 0], [4, 0]])])
        self.assertIsNone(conditional_statistic(s, Method.X2))
        self.assertIsNotNone(conditional_statistic(s, Method.G2))

    def test_degrees_of_freedom(self):
        self.assertEqual(degrees_of_freedom(2, 2), 1)
        self.assertEqual(degrees_of_freedom(5, 5, 25), 400)
        with self.assertRaises(InputError):
            degrees_of_freedom(1, 3)


class ChiSquareTests(unittest.TestCase):
    def test_against_numerical_integration(self):
        for dof in (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 15, 20, 25, 30, 40, 50, 64, 80, 100):
            for x in (0.05, 0.3, 1.0, 2.5, 4.0, 7.5, 12.0, 20.0, 35.0, 60.0):
                expected = upper_tail_by_quadrature(x, dof)
                self.assertAlmostEqual(chi_square_sf(x, dof), expected, delta=1e-8, msg=(x, dof))

    def test_two_degrees_of_freedom_closed_form(self):
        for x in (0.1, 1.0, 5.0, 40.0):
            self.assertAlmostEqual(chi_square_sf(x, 2), math.exp(-x / 2.0), places=12)

    def test_critical_values(self):
        self.assertAlmostEqual(chi_square_sf(3.841459, 1), 0.05, places=6)
        self.assertAlmostEqual(chi_square_sf(9.487729, 4), 0.05, places=6)
        self.assertAlmostEqual(chi_square_cdf(3.841459, 1), 0.95, places=6)

    def test_edges(self):
        self.assertEqual(chi_square_sf(0.0, 7), 1.0)
        self.assertLess(chi_square_sf(2000.0, 3), 1e-300)
        with self.assertRaises(InputError):
            chi_square_sf(-1.0, 1)
        with self.assertRaises(InputError):
            chi_square_sf(1.0, 0)
        with self.assertRaises(InputError):
            regularized_gamma_q(0.0, 1.0)


class AsymptoticTestTests(unittest.TestCase):
    def test_pearson_p_value(self):
        result = asymptotic_test(StratifiedTable.from_tables([table(TABLE)]), Method.X2)
        self.assertTrue(result.computable)
        self.assertEqual(result.dof, 1)
        self.assertAlmostEqual(result.p_value, 0.3730, places=4)

    def test_not_computable(self):
        result = asymptotic_test(StratifiedTable.from_tables([table([[3, 0], [5, 0]])]), Method.X2)
        self.assertEqual(result, TestResult(None, 1, None, Method.X2, False))

    def test_dof_counts_non_empty_strata(self):
        s = StratifiedTable.from_tables(
            [table([[5, 1, 2], [2, 6, 1]]), table([[0, 0, 0], [0, 0, 0]])]
        )
        self.assertEqual(asymptotic_test(s, Method.G2).dof, 2)

    def test_json(self):
        result = asymptotic_test(StratifiedTable.from_tables([table(TABLE)]), Method.G2)
        data = result.to_json()
        self.assertEqual(data["method"], "G2")
        self.assertEqual(data["dof"], 1)
        self.assertTrue(data["computable"])


class DiagnosticsTests(unittest.TestCase):
    def test_large_expected_counts(self):
        diagnostics = expected_count_diagnostics(table(TABLE))
        self.assertEqual(diagnostics.n_cells, 4)
        self.assertEqual(diagnostics.fraction_below_5, 0.0)
        self.assertEqual(diagnostics.min_expected, 12.0)
        self.assertTrue(diagnostics.rule_of_thumb_ok)

    def test_small_expected_counts(self):
        diagnostics = expected_count_diagnostics(table([[1, 2], [2, 4]]))
        self.assertEqual(diagnostics.fraction_below_5, 1.0)
        self.assertEqual(diagnostics.n_below_1, 0)
        self.assertFalse(diagnostics.rule_of_thumb_ok)

    def test_zero_margin_fails_the_rule(self):
        diagnostics = expected_count_diagnostics(table([[30, 0], [50, 0]]))
        self.assertTrue(diagnostics.has_zero_margin)
        self.assertFalse(diagnostics.rule_of_thumb_ok)

    def test_stratified_diagnostics_skip_empty_strata(self):
        s = StratifiedTable.from_tables([table(TABLE), table([[0, 0], [0, 0]])])
        diagnostics = stratified_diagnostics(s)
        self.assertEqual(diagnostics.n_cells, 4)
        self.assertTrue(diagnostics.rule_of_thumb_ok)


if __name__ == "__main__":
    unittest.main()
