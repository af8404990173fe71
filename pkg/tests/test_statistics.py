from __future__ import annotations

import json
import math
import unittest

import numpy as np
from scipy import stats

from bci_calibration.errors import CalibrationError, ErrorCode
from bci_calibration.evaluation import bonferroni_pairwise, f_survival, paired_t, rm_anova


def reference_table() -> np.ndarray:
    rng = np.random.default_rng(42)
    return rng.standard_normal((6, 3)) + np.array([0.0, 0.5, 1.0])


def regression_anova(table: np.ndarray) -> tuple[float, float]:
    """F test of method dummies over a unit-only additive least-squares model."""
    n, k = table.shape
    y = table.reshape(-1)
    units = np.kron(np.eye(n), np.ones((k, 1)))
    methods = np.kron(np.ones((n, 1)), np.eye(k)[:, 1:])
    full = np.hstack([units, methods])

    def sse(design: np.ndarray) -> float:
        beta, *_ = np.linalg.lstsq(design, y, rcond=None)
        residual = y - design @ beta
        return float(residual @ residual)

    sse_full, sse_reduced = sse(full), sse(units)
    df1, df2 = k - 1, (n - 1) * (k - 1)
    f = ((sse_reduced - sse_full) / df1) / (sse_full / df2)
    return f, float(stats.f.sf(f, df1, df2))


class TestRmAnova(unittest.TestCase):
    def test_matches_regression_reference(self):
        table = reference_table()
        result = rm_anova(table)
        f, p = regression_anova(table)
        self.assertEqual(result.df, (2, 10))
        self.assertAlmostEqual(result.f, f, delta=1e-6 * max(1.0, f))
        self.assertAlmostEqual(result.p, p, delta=1e-6)
        self.assertFalse(result.degenerate)

    def test_identical_columns(self):
        column = np.array([0.6, 0.7, 0.8, 0.75])
        result = rm_anova(np.column_stack([column, column, column]))
        self.assertEqual((result.f, result.p), (0.0, 1.0))

    def test_two_methods_equal_squared_paired_t(self):
        table = reference_table()[:, :2]
        t, _ = paired_t(table[:, 0], table[:, 1])
        self.assertAlmostEqual(rm_anova(table).f / t**2, 1.0, delta=1e-9)

    def test_invariant_under_shift_and_scale(self):
        table = reference_table()
        base = rm_anova(table).f
        self.assertAlmostEqual(rm_anova(table + 3.5).f / base, 1.0, delta=1e-9)
        self.assertAlmostEqual(rm_anova(table * 0.01).f / base, 1.0, delta=1e-9)

    def test_constant_table_is_plain_json(self):
        result = rm_anova(np.zeros((4, 3)))
        self.assertEqual((result.f, result.p), (0.0, 1.0))
        self.assertIs(type(result.degenerate), bool)
        self.assertEqual(json.loads(json.dumps(result.to_dict()))["degenerate"], True)

    def test_zero_error_variance_is_flagged(self):
        table = np.array([0.1, 0.2, 0.3])[:, None] + np.array([0.0, 0.1])
        result = rm_anova(table)
        self.assertTrue(result.degenerate)
        self.assertEqual(result.p, 0.0)
        self.assertTrue(math.isinf(result.f))

    def test_needs_two_units_and_two_methods(self):
        for table in (np.ones((1, 3)), np.ones((4, 1))):
            with self.assertRaises(CalibrationError) as ctx:
                rm_anova(table)
            self.assertEqual(ctx.exception.code, ErrorCode.INSUFFICIENT_DATA)

    def test_missing_cell(self):
        table = reference_table()
        table[2, 1] = np.nan
        with self.assertRaises(CalibrationError):
            rm_anova(table)

    def test_f_survival_matches_distribution(self):
        for f, df1, df2 in ((0.5, 2, 10), (3.2, 2, 26), (12.0, 1, 5), (0.0, 3, 9)):
            with self.subTest(f=f):
                self.assertAlmostEqual(f_survival(f, df1, df2), float(stats.f.sf(f, df1, df2)), places=12)


class TestPairwise(unittest.TestCase):
    def test_t_values_match_hand_computation(self):
        table = reference_table()
        results = bonferroni_pairwise(table, ["speccsp", "spoc", "fbcsp"])
        self.assertEqual([r.pair for r in results],
                         [("speccsp", "spoc"), ("speccsp", "fbcsp"), ("spoc", "fbcsp")])
        for result, (i, j) in zip(results, ((0, 1), (0, 2), (1, 2))):
            d = table[:, i] - table[:, j]
            t = d.mean() / (d.std(ddof=1) / math.sqrt(d.size))
            p = 2.0 * float(stats.t.sf(abs(t), d.size - 1))
            self.assertAlmostEqual(result.t, t, delta=1e-6)
            self.assertAlmostEqual(result.p, p, delta=1e-6)
            self.assertAlmostEqual(result.p_corrected, min(1.0, 3 * p), delta=1e-6)
            self.assertAlmostEqual(result.mean_difference, d.mean(), places=12)

    def test_identical_columns_are_never_significant(self):
        column = np.array([0.6, 0.7, 0.8])
        results = bonferroni_pairwise(np.column_stack([column, column, column]))
        self.assertEqual([r.p_corrected for r in results], [1.0, 1.0, 1.0])

    def test_correction_is_clipped(self):
        rng = np.random.default_rng(1)
        results = bonferroni_pairwise(rng.standard_normal((8, 3)))
        for r in results:
            self.assertLessEqual(r.p_corrected, 1.0)
            self.assertGreaterEqual(r.p_corrected, r.p)

    def test_constant_difference(self):
        t, p = paired_t(np.array([3.0, 5.0, 9.0]), np.array([2.0, 4.0, 8.0]))
        self.assertEqual((t, p), (math.inf, 0.0))


if __name__ == "__main__":
    unittest.main()
