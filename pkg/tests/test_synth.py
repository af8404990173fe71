"""Tests for the synthetic EEG forward model and session suites."""

from __future__ import annotations

import tempfile
import unittest
from pathlib import Path

import numpy as np
from scipy import signal

from bci_calibration.data import REST, TASK, load_recording
from bci_calibration.errors import CalibrationError, ErrorCode
from bci_calibration.synth import (
    MANIFEST_NAME,
    SourceSpec,
    SynthSpec,
    generate_session,
    generate_suite,
    ground_truth,
    random_mixing,
    read_manifest,
    simulate,
    write_suite,
)


class TestSynthSpec(unittest.TestCase):
    """Tests for SynthSpec validation."""
    def assert_invalid(self, spec: SynthSpec, field_name: str) -> None:
        with self.assertRaises(CalibrationError) as ctx:
            spec.validate()
        self.assertEqual(ctx.exception.code, ErrorCode.INVALID_SYNTH_SPEC)
        self.assertEqual(ctx.exception.details["field"], field_name)

    def test_defaults_are_valid(self):
        """Test the default spec validates."""
        spec = SynthSpec().validate()
        self.assertEqual(spec.n_channels, 11)
        self.assertEqual(spec.fs_hz, 256.0)

    def test_modulation_outside_unit_interval(self):
        """Test modulation must lie in [0, 1]."""
        self.assert_invalid(SynthSpec().with_modulation(1.5), "modulation")
        self.assert_invalid(SynthSpec().with_modulation(-0.1), "modulation")

    def test_sample_rate_must_cover_sources(self):
        """Test the sample rate must exceed twice each source's upper band edge."""
        self.assert_invalid(SynthSpec(fs_hz=20.0), "fs_hz")

    def test_mixing_shape(self):
        """Test an explicit mixing matrix must match channels and sources."""
        self.assert_invalid(SynthSpec(mixing=((1.0,), (0.0,))), "mixing")

    def test_duplicate_channel_labels(self):
        """Test channel labels must be unique."""
        self.assert_invalid(SynthSpec(channel_labels=("C3", "C3")), "channel_labels")

    def test_dict_round_trip(self):
        """Test dict serialization round trip."""
        spec = SynthSpec(sources=(SourceSpec(9.0, 2.0, 0.5), SourceSpec(20.0, 4.0, 0.0)), seed=3)
        self.assertEqual(SynthSpec.from_dict(spec.to_dict()), spec)


class TestGenerateSession(unittest.TestCase):
    """Tests for generate_session and simulate."""
    def test_same_spec_is_bit_identical(self):
        """Test the same spec gives identical samples and markers."""
        spec = SynthSpec(n_trials=5, seed=9)
        a, b = generate_session(spec), generate_session(spec)
        np.testing.assert_array_equal(a.samples, b.samples)
        self.assertEqual(a.markers, b.markers)

    def test_marker_structure(self):
        """Test start/stop markers and cue spacing."""
        spec = SynthSpec(n_trials=6)
        rec = generate_session(spec)
        self.assertEqual(len(rec.markers), 2 * spec.n_trials)
        self.assertEqual(len(rec.markers_with_label("start")), spec.n_trials)
        starts = [m.sample_index for m in rec.markers_with_label("start")]
        self.assertEqual(starts[0], int(spec.lead_in_s * spec.fs_hz))
        self.assertEqual(np.diff(starts).tolist(), [int((spec.task_s + spec.iti_s) * spec.fs_hz)] * 5)

    def test_duration(self):
        """Test session duration from lead-in and trial timing."""
        rec = generate_session(SynthSpec(n_trials=4))
        self.assertEqual(rec.duration_s, 4.0 + 4 * 8.0)

    def test_noiseless_sensors_are_mixed_sources(self):
        """Test sensors equal mixing times sources without noise."""
        sim = simulate(SynthSpec(n_trials=3, snr_db=None))
        np.testing.assert_allclose(sim.recording.samples, sim.mixing @ sim.sources, rtol=1e-5, atol=1e-4)

    def test_seeds_change_noise_not_mixing(self):
        """Test the session seed leaves the mixing matrix fixed."""
        a = ground_truth(SynthSpec(n_trials=5, seed=1))
        b = ground_truth(SynthSpec(n_trials=5, seed=2))
        np.testing.assert_array_equal(a.patterns, b.patterns)
        self.assertFalse(np.allclose(a.powers, b.powers))

    def test_random_mixing_condition_number(self):
        """Test random mixing matrices stay well conditioned."""
        for seed in range(5):
            self.assertLessEqual(np.linalg.cond(random_mixing(11, 3, seed)), 5.0 + 1e-9)

    def test_source_spectrum_peaks_in_band(self):
        """Test a source's power peaks at its centre frequency."""
        spec = SynthSpec(n_trials=10, sources=(SourceSpec(center_hz=17.0, bandwidth_hz=2.0),))
        sim = simulate(spec)
        freqs, power = signal.welch(sim.sources[0], fs=spec.fs_hz, nperseg=512)
        self.assertLessEqual(abs(float(freqs[np.argmax(power)]) - 17.0), 2.0)

    def test_amplitude_spikes(self):
        """Test injected spikes are large and sparse."""
        spec = SynthSpec(n_trials=5, seed=4)
        clean = generate_session(spec).samples
        spiky = generate_session(SynthSpec(n_trials=5, seed=4, spike_rate_hz=1.0)).samples
        difference = np.abs(spiky - clean)
        self.assertGreater(float(difference.max()), 100.0)
        self.assertLess(float(np.mean(difference > 0)), 0.05)


class TestGroundTruth(unittest.TestCase):
    """Tests for ground_truth."""
    def test_epoch_layout_matches_extraction(self):
        """Test ground truth follows the epoch layout."""
        truth = ground_truth(SynthSpec(seed=5))
        self.assertEqual(truth.powers.shape, (80, 1))
        np.testing.assert_array_equal(truth.labels[:4], [REST, TASK, REST, TASK])
        self.assertAlmostEqual(float(np.linalg.norm(truth.patterns[:, 0])), 1.0, places=12)

    def test_desynchronisation_lowers_task_power(self):
        """Test task power drops below rest power."""
        truth = ground_truth(SynthSpec(seed=6))
        task = truth.powers[truth.labels == TASK, 0].mean()
        rest = truth.powers[truth.labels == REST, 0].mean()
        self.assertLess(task, 0.2 * rest)

    def test_full_suppression(self):
        """Test modulation 1 silences the source during the task."""
        truth = ground_truth(SynthSpec(n_trials=5, snr_db=None).with_modulation(1.0))
        np.testing.assert_array_equal(truth.powers[truth.labels == TASK], 0.0)
        self.assertTrue(np.all(truth.powers[truth.labels == REST] > 0.0))


class TestSuite(unittest.TestCase):
    """Tests for multi-session suites."""
    def test_sessions_split_over_subjects(self):
        """Test sessions per subject share a mixing seed."""
        suite = generate_suite(SynthSpec(n_trials=3), n_sessions=4, n_subjects=2, seed=7)
        self.assertEqual([s.session_id for s in suite],
                         ["sub01_ses01", "sub01_ses02", "sub02_ses01", "sub02_ses02"])
        self.assertEqual(suite[0].spec.mixing_seed, suite[1].spec.mixing_seed)
        self.assertNotEqual(suite[1].spec.mixing_seed, suite[2].spec.mixing_seed)
        self.assertEqual(len({s.spec.seed for s in suite}), 4)

    def test_suite_is_seeded(self):
        """Test the suite is reproducible from its seed."""
        a = generate_suite(SynthSpec(), 3, 1, seed=7)
        b = generate_suite(SynthSpec(), 3, 1, seed=7)
        self.assertEqual(a, b)

    def test_more_subjects_than_sessions(self):
        """Test more subjects than sessions is rejected."""
        with self.assertRaises(CalibrationError) as ctx:
            generate_suite(SynthSpec(), n_sessions=2, n_subjects=3)
        self.assertEqual(ctx.exception.details["field"], "subjects")

    def test_write_and_read_manifest(self):
        """Test written sessions load back through the manifest."""
        suite = generate_suite(SynthSpec(n_trials=2), n_sessions=2, n_subjects=1, seed=1)
        with tempfile.TemporaryDirectory() as td:
            manifest = write_suite(suite, Path(td) / "new" / "dir", "bin")
            self.assertEqual(manifest.name, MANIFEST_NAME)
            entries = read_manifest(manifest)
            self.assertEqual([e["session"] for e in entries], ["sub01_ses01", "sub01_ses02"])
            rec = load_recording(entries[0]["recording"])
            np.testing.assert_array_equal(rec.samples, generate_session(suite[0].spec).samples)
            spec = SynthSpec.load(manifest.parent / entries[1]["spec"])
            self.assertEqual(spec, suite[1].spec)


if __name__ == "__main__":
    unittest.main()
