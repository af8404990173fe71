from __future__ import annotations

import json
import math
import time
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from bci_calibration.config import PipelineConfig
from bci_calibration.errors import CalibrationError, ErrorCode
from bci_calibration.evaluation import (
    ConfusionMetrics,
    CrossValidationResult,
    EvalReport,
    confusion,
    cross_validate,
    format_mean_sd,
    merge_reports,
    plan_folds,
)
from bci_calibration.synth import SynthSpec, generate_session


def make_result(session: str, method: str, accuracies, subject: str = "") -> CrossValidationResult:
    """Ten-trial folds with the given accuracies (multiples of 0.1)."""
    folds = []
    for acc in accuracies:
        correct = int(round(acc * 10))
        tp = correct // 2
        tn = correct - tp
        folds.append(ConfusionMetrics(tp=tp, tn=tn, fp=5 - tn, fn=5 - tp))
    return CrossValidationResult(method=method, session=session, folds=folds, subject=subject, n_trials=10 * len(folds))


class TestPlanFolds(unittest.TestCase):
    def test_first_fold_with_margin(self):
        plan = plan_folds(80, 10, 5)
        fold = plan.folds[0]
        np.testing.assert_array_equal(fold.test, np.arange(0, 8))
        np.testing.assert_array_equal(fold.train, np.arange(13, 80))

    def test_middle_fold_excludes_both_sides(self):
        fold = plan_folds(80, 10, 5).folds[4]
        np.testing.assert_array_equal(fold.test, np.arange(32, 40))
        self.assertEqual(int(fold.train[fold.train < 32].max()), 26)
        self.assertEqual(int(fold.train[fold.train > 39].min()), 45)

    def test_zero_margin_trains_on_the_complement(self):
        for fold in plan_folds(80, 10, 0).folds:
            self.assertEqual(sorted(np.concatenate([fold.test, fold.train]).tolist()), list(range(80)))

    def test_over_constrained_plan(self):
        with self.assertRaises(CalibrationError) as ctx:
            plan_folds(10, 10, 5)
        self.assertEqual(ctx.exception.code, ErrorCode.INSUFFICIENT_TRAIN_TRIALS)

    def test_per_class_training_counts(self):
        labels = np.array([0] * 40 + [1] * 40)
        with self.assertRaises(CalibrationError) as ctx:
            plan_folds(80, 2, 5, labels=labels)
        self.assertEqual(ctx.exception.code, ErrorCode.INSUFFICIENT_TRAIN_TRIALS)

    def test_more_folds_than_trials(self):
        with self.assertRaises(CalibrationError) as ctx:
            plan_folds(5, 10, 0)
        self.assertEqual(ctx.exception.code, ErrorCode.INSUFFICIENT_DATA)

    @settings(max_examples=60, deadline=None)
    @given(n_trials=st.integers(30, 200), n_folds=st.integers(2, 10), margin=st.integers(0, 5))
    def test_blocks_partition_and_never_leak(self, n_trials, n_folds, margin):
        plan = plan_folds(n_trials, n_folds, margin)
        tests = np.concatenate([fold.test for fold in plan.folds])
        np.testing.assert_array_equal(tests, np.arange(n_trials))
        sizes = {fold.test.size for fold in plan.folds}
        self.assertLessEqual(max(sizes) - min(sizes), 1)
        self.assertGreater(plan.min_train_test_distance(), margin)


class TestConfusion(unittest.TestCase):
    def test_all_correct(self):
        m = confusion([1, 0, 1, 0], [1, 0, 1, 0])
        self.assertEqual((m.accuracy, m.fpr, m.fnr), (1.0, 0.0, 0.0))

    def test_complement(self):
        m = confusion([1, 0, 1, 0], [0, 1, 0, 1])
        self.assertEqual((m.accuracy, m.tpr, m.tnr), (0.0, 0.0, 0.0))

    def test_hand_counted(self):
        m = confusion([1, 1, 0, 0], [1, 0, 1, 0])
        self.assertEqual((m.tp, m.fn, m.fp, m.tn), (1, 1, 1, 1))
        for name in ("accuracy", "tpr", "tnr", "fpr", "fnr"):
            self.assertEqual(m.rate(name), 0.5)

    def test_missing_class_gives_nan_rates(self):
        m = confusion([1, 1], [1, 0])
        self.assertTrue(math.isnan(m.tnr))
        self.assertTrue(math.isnan(m.fpr))
        self.assertEqual(m.tpr, 0.5)

    def test_length_mismatch(self):
        with self.assertRaises(CalibrationError) as ctx:
            confusion([1, 0], [1])
        self.assertEqual(ctx.exception.code, ErrorCode.LENGTH_MISMATCH)

    def test_empty(self):
        with self.assertRaises(CalibrationError):
            confusion([], [])

    @settings(max_examples=100, deadline=None)
    @given(pairs=st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=60))
    def test_counts_and_complements(self, pairs):
        truth = [t for t, _ in pairs]
        pred = [p for _, p in pairs]
        m = confusion(truth, pred)
        self.assertEqual(m.tp + m.fn, sum(truth))
        self.assertEqual(m.tn + m.fp, len(truth) - sum(truth))
        if m.tp + m.fn:
            self.assertAlmostEqual(m.tpr + m.fnr, 1.0, places=15)
        if m.tn + m.fp:
            self.assertAlmostEqual(m.tnr + m.fpr, 1.0, places=15)
        self.assertEqual(m.accuracy, (m.tp + m.tn) / len(truth))


class TestCrossValidate(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.rec = generate_session(SynthSpec(seed=31))

    def test_fbcsp_on_separable_session(self):
        result = cross_validate(self.rec, "fbcsp", session="s1")
        self.assertEqual(len(result.folds), 10)
        self.assertEqual(result.n_trials, 80)
        self.assertGreaterEqual(result.mean_accuracy, 0.90)

    def test_unmodulated_session_is_at_chance(self):
        """Test every method stays inside the binomial band without any contrast."""
        rec = generate_session(SynthSpec(seed=3).with_modulation(0.0))
        for method in ("csp", "speccsp", "spoc", "fbcsp"):
            with self.subTest(method=method):
                result = cross_validate(rec, method)
                self.assertEqual(result.n_trials, 80)
                self.assertGreaterEqual(result.mean_accuracy, 0.39)
                self.assertLessEqual(result.mean_accuracy, 0.61)

    def test_default_session_for_all_methods(self):
        """Test accuracy and wall time of the three methods on the default session."""
        rec = generate_session(SynthSpec())
        start = time.perf_counter()
        results = {method: cross_validate(rec, method) for method in ("speccsp", "spoc", "fbcsp")}
        elapsed = time.perf_counter() - start
        self.assertGreaterEqual(results["fbcsp"].mean_accuracy, 0.90)
        self.assertGreaterEqual(results["speccsp"].mean_accuracy, 0.80)
        self.assertGreaterEqual(results["spoc"].mean_accuracy, 0.80)
        self.assertLess(elapsed, 300.0)
        for result in results.values():
            self.assertGreater(result.fit_ms, 0.0)

    def test_repeat_runs_are_identical(self):
        first = cross_validate(self.rec, "csp", session="s1").to_dict()
        second = cross_validate(self.rec, "csp", session="s1").to_dict()
        self.assertEqual(first, second)

    def test_parallel_folds_match_serial(self):
        serial = cross_validate(self.rec, "csp", session="s1")
        parallel = cross_validate(self.rec, "csp", session="s1", max_workers=4)
        self.assertEqual(serial.to_dict(), parallel.to_dict())

    def test_fold_failure_is_tagged(self):
        with self.assertRaises(CalibrationError) as ctx:
            cross_validate(self.rec, "csp", PipelineConfig(n_pairs=6), session="s1")
        error = ctx.exception
        self.assertEqual(error.code, ErrorCode.TOO_MANY_COMPONENTS)
        self.assertEqual(error.details["fold"], 0)
        self.assertEqual(error.details["session"], "s1")
        self.assertEqual(error.details["stage"], "spatial")


class TestEvalReport(unittest.TestCase):
    def setUp(self):
        self.report = EvalReport(
            results=[
                make_result("s1", "csp", [0.6, 0.8], subject="A"),
                make_result("s1", "spoc", [0.5, 0.5], subject="A"),
                make_result("s2", "csp", [1.0, 0.8], subject="A"),
                make_result("s2", "spoc", [0.7, 0.9], subject="A"),
                make_result("s3", "csp", [0.6, 0.6], subject="B"),
                make_result("s3", "spoc", [0.8, 1.0], subject="B"),
            ],
            methods=["csp", "spoc"],
        )

    def test_format_mean_sd(self):
        self.assertEqual(format_mean_sd([0.652 + 0.113, 0.652 - 0.113]), "65.2 ± 16.0")
        self.assertEqual(format_mean_sd([0.5]), "50.0 ± n/a")
        self.assertEqual(format_mean_sd([]), "n/a")
        self.assertEqual(format_mean_sd([0.7, math.nan, 0.9]), "80.0 ± 14.1")

    def test_accuracy_table_layout(self):
        table = self.report.accuracy_table("session")
        self.assertEqual([row[0] for row in table], ["A", "B", "Average"])
        self.assertEqual(table[0][1], "80.0 ± 14.1")
        self.assertEqual(table[1][2], "90.0 ± n/a")

    def test_fold_granularity(self):
        table = self.report.accuracy_table("fold")
        self.assertEqual(table[1][1], "60.0 ± 0.0")

    def test_wins(self):
        self.assertEqual(self.report.wins(), {"csp": 1, "spoc": 1})

    def test_statistics_per_metric(self):
        stats = self.report.statistics()
        self.assertEqual(stats["accuracy"]["n_units"], 3)
        self.assertEqual(stats["accuracy"]["anova"]["df_method"], 1)
        self.assertEqual(stats["accuracy"]["pairwise"][0]["pair"], ["csp", "spoc"])

    def test_single_method_has_no_statistics(self):
        report = EvalReport(results=[r for r in self.report.results if r.method == "csp"], methods=["csp"])
        self.assertEqual(report.statistics(), {})

    def test_subject_unit_averages_sessions(self):
        report = EvalReport(results=self.report.results, methods=["csp", "spoc"], stat_unit="subject")
        units, table = report.unit_matrix()
        self.assertEqual(units, ["A", "B"])
        np.testing.assert_allclose(table[0], [0.8, 0.65])

    def test_fold_csv(self):
        text = self.report.csv_documents()["folds.csv"]
        lines = text.splitlines()
        self.assertEqual(lines[0], "session,method,fold,acc,tpr,tnr,fpr,fnr")
        self.assertEqual(len(lines), 1 + 12)
        self.assertTrue(lines[1].startswith("s1,csp,0,0.6,"))

    def test_json_round_trip_preserves_aggregates(self):
        restored = EvalReport.from_dict(self.report.to_dict())
        self.assertEqual(restored.accuracy_table(), self.report.accuracy_table())
        self.assertEqual(restored.to_json(), self.report.to_json())

    def test_constant_rate_serializes(self):
        """Test a metric equal in every cell (FPR 0 throughout) still writes JSON."""
        results = []
        for session in ("s1", "s2", "s3"):
            for method, tp in (("csp", 4), ("spoc", 3)):
                folds = [ConfusionMetrics(tp=tp, tn=5, fp=0, fn=5 - tp)]
                results.append(CrossValidationResult(method=method, session=session, folds=folds, n_trials=10))
        report = EvalReport(results=results, methods=["csp", "spoc"])
        anova = report.statistics()["fpr"]["anova"]
        self.assertEqual((anova["f"], anova["p"]), (0.0, 1.0))
        self.assertIs(anova["degenerate"], True)
        data = json.loads(report.to_json())
        self.assertIs(data["statistics"]["fpr"]["anova"]["degenerate"], True)

    def test_timings_survive_apart_from_the_document(self):
        """Test fit times travel through the timings document, not report.json."""
        for r in self.report.results:
            r.fit_ms = 1234.0
        restored = EvalReport.from_dict(json.loads(self.report.to_json()))
        self.assertEqual(restored.fit_ms(), {"csp": 0.0, "spoc": 0.0})
        restored.apply_timings(json.loads(json.dumps(self.report.timings())))
        self.assertEqual(restored.fit_ms(), {"csp": 3702.0, "spoc": 3702.0})
        self.assertNotIn("fit_ms", self.report.to_json())

    def test_unknown_stat_unit(self):
        with self.assertRaises(CalibrationError):
            EvalReport(results=[], methods=["csp"], stat_unit="fold")

    def test_merge_by_method(self):
        csp = EvalReport(results=[r for r in self.report.results if r.method == "csp"], methods=["csp"])
        spoc = EvalReport(results=[r for r in self.report.results if r.method == "spoc"], methods=["spoc"])
        merged = merge_reports([csp, spoc])
        self.assertEqual(merged.methods, ["csp", "spoc"])
        self.assertEqual(merged.complete_sessions(), ["s1", "s2", "s3"])

    def test_merge_rejects_different_sessions(self):
        csp = EvalReport(results=[make_result("s1", "csp", [0.5])], methods=["csp"])
        spoc = EvalReport(results=[make_result("s2", "spoc", [0.5])], methods=["spoc"])
        with self.assertRaises(CalibrationError) as ctx:
            merge_reports([csp, spoc])
        self.assertEqual(ctx.exception.code, ErrorCode.SESSION_MISMATCH)


if __name__ == "__main__":
    unittest.main()
