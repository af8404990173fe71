from __future__ import annotations

import unittest

import numpy as np

from bci_calibration.config import PipelineConfig
from bci_calibration.data import REST, TASK, EpochSet
from bci_calibration.dsp import design_butterworth_bandpass, filter_forward, make_filter_bank
from bci_calibration.errors import CalibrationError, ErrorCode
from bci_calibration.pipeline import prepare_epochs
from bci_calibration.spatial import (
    SpatialMethod,
    SpatialModel,
    class_covariances,
    label_target,
    spoc_objective,
    train_csp,
    train_fbcsp,
    train_speccsp,
    train_spoc,
    trial_covariances,
)
from bci_calibration.synth import SourceSpec, SynthSpec, generate_session, ground_truth


def make_epochs(data: np.ndarray, labels, fs: float = 128.0) -> EpochSet:
    return EpochSet(
        data=data,
        labels=np.asarray(labels),
        trial_order=np.arange(data.shape[0]),
        sample_rate_hz=fs,
        channel_labels=tuple(f"c{i}" for i in range(data.shape[1])),
    )


def alternating_labels(n_trials: int) -> np.ndarray:
    return np.tile([REST, TASK], n_trials // 2)


def contrast_epochs(seed: int = 0, n_trials: int = 80, n_channels: int = 6) -> EpochSet:
    """Mixed sources whose variances change with the class by distinct factors."""
    rng = np.random.default_rng(seed)
    mixing = rng.standard_normal((n_channels, n_channels))
    task_scale = np.sqrt([4.0, 2.0, 1.3, 0.8, 0.5, 0.25][:n_channels])
    labels = alternating_labels(n_trials)
    data = np.empty((n_trials, n_channels, 256))
    for t, label in enumerate(labels):
        sources = rng.standard_normal((n_channels, 256))
        if label == TASK:
            sources *= task_scale[:, None]
        data[t] = mixing @ sources
    return make_epochs(data, labels)


def component_cosine(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b)))


class TestCsp(unittest.TestCase):
    def test_variance_contrast_on_one_channel(self):
        rng = np.random.default_rng(1)
        labels = alternating_labels(80)
        data = rng.standard_normal((80, 2, 256))
        data[labels == TASK, 0, :] *= np.sqrt(3.0)
        model = train_csp(make_epochs(data, labels), n_pairs=1)
        top = model.bands[0].filters[:, 0]
        self.assertGreaterEqual(component_cosine(top, np.array([1.0, 0.0])), 0.99)

    def test_identical_classes_give_half(self):
        rng = np.random.default_rng(2)
        epochs = make_epochs(rng.standard_normal((100, 4, 256)), alternating_labels(100))
        eigenvalues = train_csp(epochs, n_pairs=2).bands[0].eigenvalues
        np.testing.assert_allclose(eigenvalues, 0.5, atol=0.05)

    def test_eigenvalues_in_unit_interval_and_descending(self):
        eigenvalues = train_csp(contrast_epochs()).bands[0].eigenvalues
        self.assertTrue(np.all((eigenvalues >= 0.0) & (eigenvalues <= 1.0)))
        self.assertTrue(np.all(np.diff(eigenvalues) <= 0.0))

    def test_filters_are_composite_orthonormal(self):
        epochs = contrast_epochs()
        w = train_csp(epochs).bands[0].filters
        covs = class_covariances(epochs)
        gram = w.T @ (covs[TASK] + covs[REST]) @ w
        np.testing.assert_allclose(gram, np.eye(w.shape[1]), atol=1e-8)

    def test_shape_and_component_count(self):
        model = train_csp(contrast_epochs(), n_pairs=2)
        self.assertEqual(model.method, SpatialMethod.CSP)
        self.assertEqual(model.bands[0].filters.shape, (6, 4))
        self.assertEqual(model.bands[0].patterns.shape, (6, 4))
        self.assertEqual(model.n_components, 4)

    def test_sign_convention(self):
        patterns = train_csp(contrast_epochs()).bands[0].patterns
        peaks = patterns[np.argmax(np.abs(patterns), axis=0), np.arange(patterns.shape[1])]
        self.assertTrue(np.all(peaks > 0))

    def test_relabeling_mirrors_spectrum(self):
        epochs = contrast_epochs()
        flipped = epochs.with_data(epochs.data, labels=1 - epochs.labels)
        original = train_csp(epochs).bands[0].eigenvalues
        mirrored = train_csp(flipped).bands[0].eigenvalues
        np.testing.assert_allclose(np.sort(mirrored), np.sort(1.0 - original), atol=1e-10)

    def test_invertible_channel_transform_keeps_components(self):
        epochs = contrast_epochs(seed=3)
        rng = np.random.default_rng(4)
        transform = np.eye(6) + 0.3 * rng.standard_normal((6, 6))
        moved = epochs.with_data(np.einsum("dc,tcs->tds", transform, epochs.data))
        before = train_csp(epochs, normalize_trace=False).component_signals(epochs)[0]
        after = train_csp(moved, normalize_trace=False).component_signals(moved)[0]
        for k in range(before.shape[1]):
            self.assertGreaterEqual(component_cosine(before[:, k].ravel(), after[:, k].ravel()), 0.99)

    def test_trace_normalization_keeps_relative_trial_power(self):
        rng = np.random.default_rng(10)
        data = rng.standard_normal((4, 3, 256))
        data[1] *= 3.0
        epochs = make_epochs(data, alternating_labels(4))
        raw = trial_covariances(epochs, normalize_trace=False)
        scaled = trial_covariances(epochs)
        self.assertAlmostEqual(float(np.trace(scaled, axis1=1, axis2=2).mean()), 3.0, places=10)
        ratio = scaled / raw
        np.testing.assert_allclose(ratio, ratio[0, 0, 0], rtol=1e-10)

    def test_single_class_is_rejected(self):
        rng = np.random.default_rng(5)
        epochs = make_epochs(rng.standard_normal((4, 4, 64)), [TASK] * 4)
        with self.assertRaises(CalibrationError) as ctx:
            train_csp(epochs, n_pairs=1)
        self.assertEqual(ctx.exception.code, ErrorCode.SINGLE_CLASS)

    def test_too_many_pairs(self):
        with self.assertRaises(CalibrationError) as ctx:
            train_csp(contrast_epochs(), n_pairs=4)
        self.assertEqual(ctx.exception.code, ErrorCode.TOO_MANY_COMPONENTS)

    def test_channel_mismatch_on_projection(self):
        model = train_csp(contrast_epochs())
        with self.assertRaises(CalibrationError) as ctx:
            model.component_signals(make_epochs(np.zeros((2, 5, 64)), [REST, TASK]))
        self.assertEqual(ctx.exception.code, ErrorCode.FEATURE_MISMATCH)


class SyntheticSessionCase(unittest.TestCase):
    spec = SynthSpec(seed=11)

    @classmethod
    def setUpClass(cls):
        cls.config = PipelineConfig()
        cls.epochs = prepare_epochs(generate_session(cls.spec), cls.config)
        cls.truth = ground_truth(cls.spec, cls.config.task_window_s, cls.config.rest_window_s)


class TestSyntheticRecovery(SyntheticSessionCase):
    def test_truth_aligns_with_epochs(self):
        self.assertEqual(self.truth.powers.shape[0], self.epochs.n_trials)
        np.testing.assert_array_equal(self.truth.labels, self.epochs.labels)

    def test_csp_pattern_matches_mixing_column(self):
        model = train_csp(self.epochs)
        # ERD: the source dominates rest, i.e. the smallest eigenvalue
        pattern = model.bands[0].patterns[:, -1]
        self.assertGreaterEqual(component_cosine(pattern, self.truth.patterns[:, 0]), 0.95)

    def test_spoc_component_power_tracks_source_power(self):
        model = train_spoc(self.epochs)
        band = model.bands[0]
        k = int(np.argmax(np.abs(band.eigenvalues)))
        power = model.component_signals(self.epochs)[0][:, k, :].var(axis=-1)
        r = np.corrcoef(power, self.truth.powers[:, 0])[0, 1]
        self.assertGreaterEqual(r, 0.9)

    def test_fbcsp_feature_count(self):
        bank = make_filter_bank(6.0, 32.0, 4.0, self.epochs.sample_rate_hz)
        model = train_fbcsp(self.epochs, bank, n_pairs=3)
        self.assertEqual(len(model.bands), 7)
        self.assertEqual(model.n_components, 42)
        self.assertEqual(model.metadata["n_bands"], 7)

    def test_fbcsp_contrast_sits_in_alpha_band(self):
        bank = make_filter_bank(6.0, 32.0, 4.0, self.epochs.sample_rate_hz)
        model = train_fbcsp(self.epochs, bank)
        smallest = [float(b.eigenvalues.min()) for b in model.bands]
        self.assertEqual(model.bands[1].band_hz, (10.0, 14.0))
        for index in range(3, len(smallest)):
            self.assertGreaterEqual(smallest[index] - smallest[1], 0.1)


class TestFbcsp(unittest.TestCase):
    def setUp(self):
        self.epochs = contrast_epochs()

    def test_single_band_reduces_to_csp(self):
        band = design_butterworth_bandpass(2, 6.0, 32.0, 128.0)
        fb = train_fbcsp(self.epochs, [band])
        csp = train_csp(filter_forward(band, self.epochs))
        np.testing.assert_allclose(fb.bands[0].filters, csp.bands[0].filters, atol=1e-10)
        np.testing.assert_allclose(fb.bands[0].eigenvalues, csp.bands[0].eigenvalues, atol=1e-12)
        self.assertEqual(fb.bands[0].band_hz, (6.0, 32.0))

    def test_parallel_bands_merge_in_bank_order(self):
        bank = make_filter_bank(6.0, 32.0, 4.0, 128.0)
        serial = train_fbcsp(self.epochs, bank, max_workers=1)
        parallel = train_fbcsp(self.epochs, bank, max_workers=4)
        for a, b in zip(serial.bands, parallel.bands):
            self.assertEqual(a.band_hz, b.band_hz)
            np.testing.assert_allclose(a.filters, b.filters, atol=1e-12)

    def test_empty_bank(self):
        with self.assertRaises(CalibrationError) as ctx:
            train_fbcsp(self.epochs, [])
        self.assertEqual(ctx.exception.code, ErrorCode.EMPTY_FILTER_BANK)

    def test_too_many_pairs_rejected_before_any_band(self):
        bank = make_filter_bank(6.0, 32.0, 4.0, 128.0)
        with self.assertRaises(CalibrationError) as ctx:
            train_fbcsp(self.epochs, bank, n_pairs=4)
        self.assertEqual(ctx.exception.code, ErrorCode.TOO_MANY_COMPONENTS)


class TestSpecCsp(SyntheticSessionCase):
    spec = SynthSpec(seed=12, sources=(SourceSpec(center_hz=11.0, bandwidth_hz=1.0),))

    def test_weights_concentrate_on_source_frequency(self):
        model = train_speccsp(self.epochs)
        band = model.bands[0]
        freqs = band.frequencies_hz
        # last rest-end component: the most extreme rest/total ratio
        beta = band.spectral_weights[-1]
        mass = beta[(freqs >= 10.0) & (freqs <= 12.0)].sum()
        self.assertGreaterEqual(mass, 0.5)

    def test_weights_are_distributions(self):
        weights = train_speccsp(self.epochs).spectral_weights
        self.assertTrue(np.all(weights >= 0.0))
        np.testing.assert_allclose(weights.sum(axis=1), 1.0, atol=1e-12)

    def test_model_layout(self):
        model = train_speccsp(self.epochs, n_pairs=2)
        band = model.bands[0]
        self.assertEqual(model.method, SpatialMethod.SPECCSP)
        self.assertIsNone(band.band_hz)
        self.assertEqual(band.filters.shape, (11, 4))
        self.assertEqual(band.spectral_weights.shape, (4, 27))
        self.assertEqual(model.metadata["n_iterations"], 3)

    def test_zero_exponents_keep_uniform_weights(self):
        model = train_speccsp(self.epochs, p=0.0, q=0.0)
        weights = model.spectral_weights
        np.testing.assert_allclose(weights, np.full_like(weights, 1.0 / weights.shape[1]), atol=1e-12)
        broadband = train_csp(self.epochs, normalize_trace=False)
        k = 2 * model.n_pairs - 1
        cos = component_cosine(model.bands[0].filters[:, k], broadband.bands[0].filters[:, k])
        self.assertGreaterEqual(cos, 0.95)

    def test_rest_end_pattern_is_stable_across_iterations(self):
        one = train_speccsp(self.epochs, n_iterations=1)
        three = train_speccsp(self.epochs, n_iterations=3)
        k = 2 * one.n_pairs - 1
        cos = component_cosine(one.bands[0].patterns[:, k], three.bands[0].patterns[:, k])
        self.assertGreaterEqual(cos, 0.98)

    def test_invalid_iteration_count(self):
        with self.assertRaises(CalibrationError) as ctx:
            train_speccsp(self.epochs, n_iterations=0)
        self.assertEqual(ctx.exception.code, ErrorCode.INVALID_PARAMETER)

    def test_spectral_projection_and_serialization(self):
        model = train_speccsp(self.epochs)
        restored = SpatialModel.from_dict(model.to_dict())
        np.testing.assert_array_equal(restored.spectral_weights, model.spectral_weights)
        signals = restored.component_signals(self.epochs)[0]
        np.testing.assert_allclose(signals, model.component_signals(self.epochs)[0])


class TestSpoc(unittest.TestCase):
    def test_comodulating_channel_is_recovered(self):
        rng = np.random.default_rng(6)
        labels = alternating_labels(100)
        z = label_target(labels)
        data = rng.standard_normal((100, 3, 256))
        x = data[:, 0, :] - data[:, 0, :].mean(axis=1, keepdims=True)
        x /= x.std(axis=1, keepdims=True)
        data[:, 0, :] = x * np.sqrt(1.0 + z)[:, None]
        model = train_spoc(make_epochs(data, labels), n_components=2, normalize_trace=False)
        band = model.bands[0]
        self.assertGreaterEqual(component_cosine(band.filters[:, 0], np.array([1.0, 0.0, 0.0])), 0.99)
        self.assertAlmostEqual(float(band.eigenvalues[0]), 1.0, delta=0.05)

    def test_shuffled_labels_do_not_generalize(self):
        rng = np.random.default_rng(7)
        labels = alternating_labels(200)
        train = make_epochs(rng.standard_normal((200, 4, 128)), rng.permutation(labels))
        test = make_epochs(rng.standard_normal((200, 4, 128)), labels)
        model = train_spoc(train, n_components=2)
        k = int(np.argmax(np.abs(model.bands[0].eigenvalues)))
        power = model.component_signals(test)[0][:, k, :].var(axis=-1)
        r = np.corrcoef(power, label_target(test.labels))[0, 1]
        self.assertLess(abs(r), 0.25)

    def test_top_filter_dominates_random_directions(self):
        epochs = contrast_epochs(seed=8)
        model = train_spoc(epochs, n_components=2)
        covs = trial_covariances(epochs)
        z = label_target(epochs.labels)
        c_z = np.einsum("t,tcd->cd", z, covs) / z.shape[0]
        c_mean = covs.mean(axis=0)
        best = float(spoc_objective(model.bands[0].filters[:, :1], c_z, c_mean)[0])
        rng = np.random.default_rng(9)
        directions = rng.standard_normal((6, 10_000))
        directions /= np.linalg.norm(directions, axis=0)
        self.assertTrue(np.all(spoc_objective(directions, c_z, c_mean) <= best + 1e-12))

    def test_constant_target(self):
        with self.assertRaises(CalibrationError) as ctx:
            label_target(np.ones(10, dtype=int))
        self.assertEqual(ctx.exception.code, ErrorCode.ZERO_LABEL_VARIANCE)
        self.assertIn("zero label variance", str(ctx.exception))

    def test_odd_component_count(self):
        with self.assertRaises(CalibrationError) as ctx:
            train_spoc(contrast_epochs(), n_components=3)
        self.assertEqual(ctx.exception.code, ErrorCode.TOO_MANY_COMPONENTS)

    def test_needs_two_trials_per_class(self):
        rng = np.random.default_rng(10)
        epochs = make_epochs(rng.standard_normal((3, 4, 64)), [REST, TASK, TASK])
        with self.assertRaises(CalibrationError) as ctx:
            train_spoc(epochs, n_components=2)
        self.assertEqual(ctx.exception.code, ErrorCode.SINGLE_CLASS)


if __name__ == "__main__":
    unittest.main()
