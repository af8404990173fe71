"""Cue-locked epoch extraction."""

from __future__ import annotations

import numpy as np
from loguru import logger

from ..errors import CalibrationError, ErrorCode
from .recording import REST, TASK, EpochSet, Recording


def window_samples(window_s: tuple[float, float], fs: float) -> tuple[int, int]:
    """Window as (start offset, length) in samples relative to the cue."""
    start = int(round(window_s[0] * fs))
    length = int(round((window_s[1] - window_s[0]) * fs))
    return start, length


def extract_epochs(
    rec: Recording,
    cue_label: str = "start",
    task_window_s: tuple[float, float] = (0.5, 3.5),
    rest_window_s: tuple[float, float] = (-2.5, -0.5),
) -> EpochSet:
    """One rest epoch (pre-cue) and one task epoch (post-cue) per usable cue.

    Both windows are cut to the length of the shorter one, anchored at each
    window's start, so every trial has the same length. Trials are ordered
    chronologically: rest_k precedes task_k. Cues whose windows would leave
    the recording are skipped and counted in ``n_skipped_cues``.
    """
    fs = rec.sample_rate_hz
    task_start, task_len = window_samples(task_window_s, fs)
    rest_start, rest_len = window_samples(rest_window_s, fs)
    length = min(task_len, rest_len)
    if length < 2:
        raise CalibrationError(
            ErrorCode.EPOCH_TOO_SHORT,
            "epoch windows shorter than two samples",
            {"task_window_s": task_window_s, "rest_window_s": rest_window_s},
        )
    if task_len != rest_len:
        logger.debug("task/rest windows differ ({} vs {} samples); using {}", task_len, rest_len, length)

    cues = sorted(m.sample_index for m in rec.markers_with_label(cue_label))
    windows: list[tuple[int, int, int]] = []  # (onset, label, cue)
    skipped = 0
    for cue in cues:
        rest_onset = cue + rest_start
        task_onset = cue + task_start
        onsets = (rest_onset, task_onset)
        if min(onsets) < 0 or max(onsets) + length > rec.n_samples:
            skipped += 1
            continue
        windows.append((rest_onset, REST, cue))
        windows.append((task_onset, TASK, cue))

    if skipped:
        logger.warning("skipped {} of {} '{}' cues too close to the recording edge", skipped, len(cues), cue_label)
    if not windows:
        raise CalibrationError(
            ErrorCode.NO_USABLE_CUES,
            "zero usable cues",
            {"cue_label": cue_label, "cues": len(cues), "skipped": skipped},
        )

    windows.sort(key=lambda w: (w[0], w[1]))
    data = np.stack([rec.samples[:, onset:onset + length] for onset, _, _ in windows])
    return EpochSet(
        data=data,
        labels=np.array([label for _, label, _ in windows]),
        trial_order=np.arange(len(windows)),
        sample_rate_hz=fs,
        channel_labels=rec.channel_labels,
        task_window_s=(task_window_s[0], task_window_s[0] + length / fs),
        rest_window_s=(rest_window_s[0], rest_window_s[0] + length / fs),
        cue_samples=np.array([cue for _, _, cue in windows]),
        n_skipped_cues=skipped,
    )
