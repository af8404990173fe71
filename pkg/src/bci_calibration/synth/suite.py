"""Multi-subject, multi-session synthetic suites."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger

from ..data.io import RecordingFormat, save_recording
from ..errors import CalibrationError, ErrorCode
from .generator import generate_session
from .spec import SynthSpec

MANIFEST_NAME = "sessions.json"


@dataclass(frozen=True)
class SuiteSession:
    session_id: str
    subject_id: str
    spec: SynthSpec


def generate_suite(base: SynthSpec, n_sessions: int = 14, n_subjects: int = 7, seed: int = 42) -> list[SuiteSession]:
    """Sessions split contiguously over subjects.

    Sessions of one subject share a mixing matrix; every session has its
    own noise seed. All seeds derive from ``seed``.
    """
    if n_sessions < 1 or n_subjects < 1 or n_subjects > n_sessions:
        raise CalibrationError(
            ErrorCode.INVALID_SYNTH_SPEC,
            "need 1 <= subjects <= sessions",
            {"field": "subjects", "sessions": n_sessions, "subjects": n_subjects},
        )
    rng = np.random.default_rng(seed)
    mixing_seeds = rng.integers(0, 2**31 - 1, size=n_subjects)
    session_seeds = rng.integers(0, 2**31 - 1, size=n_sessions)
    suite = []
    per_subject: dict[int, int] = {}
    for i in range(n_sessions):
        subject = i * n_subjects // n_sessions
        per_subject[subject] = per_subject.get(subject, 0) + 1
        spec = replace(base, seed=int(session_seeds[i]), mixing_seed=int(mixing_seeds[subject])).validate()
        suite.append(
            SuiteSession(
                session_id=f"sub{subject + 1:02d}_ses{per_subject[subject]:02d}",
                subject_id=f"sub{subject + 1:02d}",
                spec=spec,
            )
        )
    return suite


def write_suite(suite: list[SuiteSession], out_dir: str | Path, fmt: RecordingFormat | str = "csv") -> Path:
    """Write each session, its spec and a ``sessions.json`` manifest."""
    fmt = RecordingFormat(fmt)
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    entries: list[dict[str, Any]] = []
    for item in suite:
        recording_path = root / f"{item.session_id}.{fmt.value}"
        spec_path = root / f"{item.session_id}.spec.json"
        save_recording(generate_session(item.spec), recording_path, fmt)
        item.spec.save(spec_path)
        entries.append({
            "session": item.session_id,
            "subject": item.subject_id,
            "recording": recording_path.name,
            "spec": spec_path.name,
        })
        logger.info("wrote {}", recording_path)
    manifest = root / MANIFEST_NAME
    manifest.write_text(json.dumps({"sessions": entries}, indent=2) + "\n", encoding="utf-8")
    return manifest


def read_manifest(path: str | Path) -> list[dict[str, str]]:
    """Entries of a suite manifest with recording paths made absolute."""
    source = Path(path)
    try:
        data = json.loads(source.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CalibrationError(ErrorCode.INVALID_RECORDING, f"cannot read manifest: {exc}", {"path": str(source)}) from exc
    entries = []
    for entry in data.get("sessions", []):
        entries.append({**entry, "recording": str(source.parent / entry["recording"])})
    return entries
