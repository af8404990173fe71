"""Recording, marker and epoch data model."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import CalibrationError, ErrorCode

TASK = 1
REST = 0


@dataclass(frozen=True)
class Marker:
    """A labelled event at a sample index."""
    sample_index: int
    label: str


@dataclass(frozen=True, eq=False)
class Recording:
    """Continuous multichannel EEG in microvolts, ``samples`` is [channel x time]."""
    channel_labels: tuple[str, ...]
    sample_rate_hz: float
    samples: np.ndarray
    markers: tuple[Marker, ...] = ()

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=np.float64)
        if samples.ndim != 2:
            raise CalibrationError(ErrorCode.INVALID_RECORDING, "samples must be 2-D [channel x time]")
        labels = tuple(str(label) for label in self.channel_labels)
        if len(labels) < 1 or len(labels) != samples.shape[0]:
            raise CalibrationError(
                ErrorCode.INVALID_RECORDING,
                "channel count must be >= 1 and equal the rows of samples",
                {"channels": len(labels), "rows": samples.shape[0]},
            )
        if not self.sample_rate_hz > 0:
            raise CalibrationError(ErrorCode.INVALID_RECORDING, "sample_rate_hz must be > 0")
        markers = tuple(self.markers)
        n_samples = samples.shape[1]
        previous = -1
        for marker in markers:
            if not 0 <= marker.sample_index < n_samples:
                raise CalibrationError(
                    ErrorCode.MARKER_OUT_OF_RANGE,
                    "marker out of range",
                    {"sample_index": marker.sample_index, "n_samples": n_samples},
                )
            if marker.sample_index < previous:
                raise CalibrationError(
                    ErrorCode.NON_MONOTONIC_MARKERS,
                    "markers must be sorted by sample_index",
                    {"sample_index": marker.sample_index, "previous": previous},
                )
            previous = marker.sample_index
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "channel_labels", labels)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))
        object.__setattr__(self, "markers", markers)

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    def markers_with_label(self, label: str) -> list[Marker]:
        return [m for m in self.markers if m.label == label]

    def with_samples(
        self,
        samples: np.ndarray,
        sample_rate_hz: float | None = None,
        markers: Sequence[Marker] | None = None,
    ) -> "Recording":
        """Copy with new samples (and optionally rate and markers)."""
        return Recording(
            channel_labels=self.channel_labels,
            sample_rate_hz=self.sample_rate_hz if sample_rate_hz is None else sample_rate_hz,
            samples=samples,
            markers=tuple(self.markers if markers is None else markers),
        )


@dataclass(frozen=True, eq=False)
class EpochSet:
    """Labelled fixed-length trials, ``data`` is [trial x channel x sample].

    Trials are stored in chronological order; ``trial_order`` holds each
    trial's rank by onset time and ``cue_samples`` the cue each came from.
    """
    data: np.ndarray
    labels: np.ndarray
    trial_order: np.ndarray
    sample_rate_hz: float
    channel_labels: tuple[str, ...]
    task_window_s: tuple[float, float] = (0.5, 3.5)
    rest_window_s: tuple[float, float] = (-2.5, -0.5)
    cue_samples: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    n_skipped_cues: int = 0

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise CalibrationError(ErrorCode.INVALID_RECORDING, "epoch data must be 3-D [trial x channel x sample]")
        labels = np.array(self.labels, dtype=np.int64)
        order = np.array(self.trial_order, dtype=np.int64)
        if labels.shape != (data.shape[0],) or order.shape != (data.shape[0],):
            raise CalibrationError(
                ErrorCode.INVALID_RECORDING,
                "labels and trial_order must have one entry per trial",
                {"trials": data.shape[0], "labels": labels.shape, "order": order.shape},
            )
        if labels.size and not np.isin(labels, (REST, TASK)).all():
            raise CalibrationError(ErrorCode.INVALID_RECORDING, "labels must be 0 (rest) or 1 (task)")
        if len(self.channel_labels) != data.shape[1]:
            raise CalibrationError(
                ErrorCode.INVALID_RECORDING,
                "channel_labels must match the channel axis",
                {"labels": len(self.channel_labels), "channels": data.shape[1]},
            )
        cues = np.array(self.cue_samples, dtype=np.int64)
        if cues.size == 0:
            cues = np.full(data.shape[0], -1, dtype=np.int64)
        for array in (data, labels, order, cues):
            array.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "trial_order", order)
        object.__setattr__(self, "cue_samples", cues)
        object.__setattr__(self, "channel_labels", tuple(self.channel_labels))
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    @property
    def n_trials(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    @property
    def n_samples(self) -> int:
        return self.data.shape[2]

    def class_counts(self) -> dict[int, int]:
        return {REST: int(np.sum(self.labels == REST)), TASK: int(np.sum(self.labels == TASK))}

    def has_both_classes(self) -> bool:
        counts = self.class_counts()
        return counts[REST] > 0 and counts[TASK] > 0

    def subset(self, indices: Sequence[int] | np.ndarray) -> "EpochSet":
        """Trials at ``indices`` (positions in chronological order)."""
        idx = np.asarray(indices, dtype=np.int64)
        order = self.trial_order[idx]
        return EpochSet(
            data=self.data[idx],
            labels=self.labels[idx],
            trial_order=np.argsort(np.argsort(order, kind="stable"), kind="stable"),
            sample_rate_hz=self.sample_rate_hz,
            channel_labels=self.channel_labels,
            task_window_s=self.task_window_s,
            rest_window_s=self.rest_window_s,
            cue_samples=self.cue_samples[idx],
            n_skipped_cues=self.n_skipped_cues,
        )

    def with_data(self, data: np.ndarray, labels: np.ndarray | None = None) -> "EpochSet":
        """Same trials with transformed samples (e.g. filtered) or relabelled classes."""
        return EpochSet(
            data=data,
            labels=self.labels if labels is None else labels,
            trial_order=self.trial_order,
            sample_rate_hz=self.sample_rate_hz,
            channel_labels=self.channel_labels,
            task_window_s=self.task_window_s,
            rest_window_s=self.rest_window_s,
            cue_samples=self.cue_samples,
            n_skipped_cues=self.n_skipped_cues,
        )
