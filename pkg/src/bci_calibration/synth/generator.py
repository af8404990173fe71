"""Forward-model synthetic EEG with event-related desynchronisation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from loguru import logger

from ..data.epochs import window_samples
from ..data.recording import REST, TASK, Marker, Recording
from .spec import SynthSpec

MAX_CONDITION = 5.0
SPIKE_DURATION_S = 0.02


@dataclass(frozen=True, eq=False)
class Simulation:
    """Everything behind one generated session.

    ``sources`` is [source x time] after ERD scaling and jitter;
    ``mixing`` is [channel x source].
    """
    recording: Recording
    sources: np.ndarray
    mixing: np.ndarray
    cue_samples: np.ndarray
    task_samples: int


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Unit-norm mixing columns and realised per-epoch source power.

    ``powers`` is [epoch x source] in extract_epochs order (rest_k, task_k).
    """
    patterns: np.ndarray
    powers: np.ndarray
    labels: np.ndarray
    modulations: np.ndarray


def random_mixing(n_channels: int, n_sources: int, seed: int) -> np.ndarray:
    """[channel x source] with singular values in [1, 5] (condition number <= 5)."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n_channels, n_sources))
    u, _, vt = np.linalg.svd(g, full_matrices=False)
    singular = rng.uniform(1.0, MAX_CONDITION, size=min(n_channels, n_sources))
    singular[0] = 1.0
    return u @ np.diag(singular) @ vt


def band_limited_noise(rng: np.random.Generator, n: int, fs: float, band_hz: tuple[float, float]) -> np.ndarray:
    """Unit-variance Gaussian noise with its spectrum confined to ``band_hz``."""
    spectrum = np.fft.rfft(rng.standard_normal(n))
    freqs = np.fft.rfftfreq(n, d=1.0 / fs)
    spectrum[(freqs < band_hz[0]) | (freqs > band_hz[1])] = 0.0
    x = np.fft.irfft(spectrum, n=n)
    return x / x.std()


def pink_noise(rng: np.random.Generator, n_channels: int, n: int) -> np.ndarray:
    """Independent unit-variance 1/f noise per channel, DC removed."""
    spectrum = np.fft.rfft(rng.standard_normal((n_channels, n)), axis=-1)
    scale = np.zeros(spectrum.shape[-1])
    scale[1:] = 1.0 / np.sqrt(np.arange(1, spectrum.shape[-1]))
    x = np.fft.irfft(spectrum * scale, n=n, axis=-1)
    return x / x.std(axis=-1, keepdims=True)


def _add_spikes(rng: np.random.Generator, sensors: np.ndarray, spec: SynthSpec) -> int:
    duration_s = sensors.shape[1] / spec.fs_hz
    n_spikes = int(rng.poisson(spec.spike_rate_hz * duration_s))
    width = max(1, int(round(SPIKE_DURATION_S * spec.fs_hz)))
    shape = np.sin(np.pi * (np.arange(width) + 0.5) / width)
    for _ in range(n_spikes):
        channel = int(rng.integers(sensors.shape[0]))
        onset = int(rng.integers(0, sensors.shape[1] - width))
        sensors[channel, onset:onset + width] += spec.spike_amplitude_uv * shape * rng.choice((-1.0, 1.0))
    return n_spikes


def simulate(spec: SynthSpec) -> Simulation:
    """Generate one session; fully determined by ``spec`` (including its seeds)."""
    spec.validate()
    fs = spec.fs_hz
    lead = int(round(spec.lead_in_s * fs))
    task = int(round(spec.task_s * fs))
    iti = int(round(spec.iti_s * fs))
    n = lead + spec.n_trials * (task + iti)
    cues = lead + np.arange(spec.n_trials) * (task + iti)

    if spec.mixing is None:
        mixing = random_mixing(spec.n_channels, spec.n_sources, spec.mixing_seed)
    else:
        mixing = np.asarray(spec.mixing, dtype=np.float64)

    rng = np.random.default_rng(spec.seed)
    sources = np.empty((spec.n_sources, n))
    for j, source in enumerate(spec.sources):
        signal = band_limited_noise(rng, n, fs, source.band_hz) * spec.source_amplitude_uv
        gain = np.ones(n)
        # trial k: pre-cue interval and task share jitter[k]
        jitter = np.exp(spec.amplitude_jitter * rng.standard_normal(spec.n_trials + 1))
        gain[:lead] = jitter[0]
        for k, cue in enumerate(cues):
            gain[cue:cue + task] = jitter[k] * (1.0 - source.modulation)
            gain[cue + task:cue + task + iti] = jitter[k + 1]
        sources[j] = signal * gain

    sensors = mixing @ sources
    if spec.snr_db is not None:
        signal_power = float(np.mean(np.sum(mixing ** 2, axis=1))) * spec.source_amplitude_uv ** 2
        noise_power = signal_power / 10.0 ** (spec.snr_db / 10.0)
        sensors = sensors + np.sqrt(noise_power) * pink_noise(rng, spec.n_channels, n)
    if spec.spike_rate_hz > 0:
        n_spikes = _add_spikes(rng, sensors, spec)
        logger.debug("injected {} amplitude spikes", n_spikes)
    # float32-representable samples round-trip exactly through both file formats
    sensors = sensors.astype(np.float32).astype(np.float64)

    markers = []
    for cue in cues:
        markers.append(Marker(int(cue), "start"))
        markers.append(Marker(int(cue + task), "stop"))
    recording = Recording(channel_labels=spec.channel_labels, sample_rate_hz=fs, samples=sensors, markers=markers)
    return Simulation(recording=recording, sources=sources, mixing=mixing, cue_samples=cues, task_samples=task)


def generate_session(spec: SynthSpec) -> Recording:
    return simulate(spec).recording


def ground_truth(
    spec: SynthSpec,
    task_window_s: tuple[float, float] = (0.5, 3.5),
    rest_window_s: tuple[float, float] = (-2.5, -0.5),
) -> GroundTruth:
    """Mixing columns and realised source power per epoch.

    Windows are cut to a common length exactly as epoch extraction does;
    cues whose windows leave the session are skipped the same way.
    """
    sim = simulate(spec)
    fs = spec.fs_hz
    task_start, task_len = window_samples(task_window_s, fs)
    rest_start, rest_len = window_samples(rest_window_s, fs)
    length = min(task_len, rest_len)
    n = sim.sources.shape[1]

    windows = []
    for cue in sim.cue_samples:
        onsets = (cue + rest_start, cue + task_start)
        if min(onsets) < 0 or max(onsets) + length > n:
            continue
        windows.append((onsets[0], REST))
        windows.append((onsets[1], TASK))
    windows.sort()
    powers = np.array([sim.sources[:, onset:onset + length].var(axis=1) for onset, _ in windows])
    patterns = sim.mixing / np.linalg.norm(sim.mixing, axis=0, keepdims=True)
    return GroundTruth(
        patterns=patterns,
        powers=powers.reshape(len(windows), spec.n_sources),
        labels=np.array([label for _, label in windows]),
        modulations=np.array([s.modulation for s in spec.sources]),
    )
