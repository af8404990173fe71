"""Recording file formats: CSV text and raw little-endian float32 binary.

CSV files start with a header line ``# fs=<float>, channels=<labels>``
(optionally ``samples=<int>`` before ``channels``) followed by one row per
sample. Binary files carry one text header line
``# fs=<float>, samples=<int>, encoding=f32le, channels=<labels>`` and then
channel-major float32 values. Markers live next to either format in
``<name>.markers.csv`` as ``sample_index,label`` rows.
"""

from __future__ import annotations

import io
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger

from ..errors import ErrorCode, RecordingFormatError
from .recording import Marker, Recording


class RecordingFormat(Enum):
    """Supported on-disk formats."""
    CSV = "csv"
    RAW_BINARY = "bin"

    @classmethod
    def from_path(cls, path: Path) -> "RecordingFormat":
        suffix = path.suffix.lower().lstrip(".")
        for fmt in cls:
            if fmt.value == suffix:
                return fmt
        raise RecordingFormatError(
            ErrorCode.MALFORMED_HEADER,
            "cannot infer recording format from suffix",
            {"path": str(path)},
        )


def markers_path(path: str | Path) -> Path:
    """Companion marker file for a recording path."""
    p = Path(path)
    return p.with_name(f"{p.stem}.markers.csv")


def load_recording(path: str | Path, format: RecordingFormat | str | None = None) -> Recording:
    """Load a recording and its companion marker file."""
    p = Path(path)
    if not p.exists():
        raise RecordingFormatError(ErrorCode.INVALID_RECORDING, "recording file not found", {"path": str(p)})
    fmt = _resolve_format(p, format)
    if fmt is RecordingFormat.CSV:
        fs, labels, samples = _read_csv(p)
    else:
        fs, labels, samples = _read_binary(p)
    markers = _read_markers(markers_path(p))
    logger.debug("loaded {} ({} ch, {} samples, {} markers)", p.name, len(labels), samples.shape[1], len(markers))
    return Recording(channel_labels=tuple(labels), sample_rate_hz=fs, samples=samples, markers=tuple(markers))


def save_recording(rec: Recording, path: str | Path, format: RecordingFormat | str | None = None) -> Path:
    """Write a recording and its marker file; returns the recording path."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    fmt = _resolve_format(p, format)
    channels = ",".join(rec.channel_labels)
    if fmt is RecordingFormat.CSV:
        buffer = io.StringIO()
        buffer.write(f"# fs={rec.sample_rate_hz!r}, samples={rec.n_samples}, channels={channels}\n")
        np.savetxt(buffer, rec.samples.T, fmt="%.17g", delimiter=",")
        p.write_text(buffer.getvalue(), encoding="utf-8")
    else:
        header = f"# fs={rec.sample_rate_hz!r}, samples={rec.n_samples}, encoding=f32le, channels={channels}\n"
        body = np.ascontiguousarray(rec.samples, dtype="<f4").tobytes()
        p.write_bytes(header.encode("utf-8") + body)
    lines = [f"{m.sample_index},{m.label}" for m in rec.markers]
    markers_path(p).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    return p


def _resolve_format(path: Path, format: RecordingFormat | str | None) -> RecordingFormat:
    if format is None:
        return RecordingFormat.from_path(path)
    if isinstance(format, RecordingFormat):
        return format
    aliases = {"csv": RecordingFormat.CSV, "bin": RecordingFormat.RAW_BINARY, "raw-binary": RecordingFormat.RAW_BINARY}
    try:
        return aliases[format.lower()]
    except KeyError:
        raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, "unknown recording format", {"format": format}) from None


def parse_header(line: str) -> dict[str, Any]:
    """Parse ``# key=value, ..., channels=a,b,c`` into a dict (channels last)."""
    text = line.strip()
    if not text.startswith("#"):
        raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, "header must start with '#'", {"header": line[:80]})
    text = text[1:].strip()
    marker = "channels="
    pos = text.find(marker)
    if pos < 0:
        raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, "header lacks channels=", {"header": line[:80]})
    labels = [c.strip() for c in text[pos + len(marker):].split(",") if c.strip()]
    fields: dict[str, Any] = {"channels": labels}
    for item in text[:pos].split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, "header field without '='", {"field": item})
        fields[key.strip()] = value.strip()
    if "fs" not in fields:
        raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, "header lacks fs=", {"header": line[:80]})
    try:
        fields["fs"] = float(fields["fs"])
        if "samples" in fields:
            fields["samples"] = int(fields["samples"])
    except ValueError as exc:
        raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, f"non-numeric header field: {exc}") from exc
    if not labels:
        raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, "header declares no channels")
    return fields


def _read_csv(path: Path) -> tuple[float, list[str], np.ndarray]:
    with open(path, encoding="utf-8") as f:
        header = parse_header(f.readline())
        try:
            table = np.loadtxt(f, delimiter=",", comments="#", ndmin=2)
        except ValueError as exc:
            raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, f"unparseable sample row: {exc}") from exc
    labels = header["channels"]
    if table.size == 0:
        table = np.zeros((0, len(labels)))
    if table.shape[1] != len(labels):
        raise RecordingFormatError(
            ErrorCode.SAMPLE_COUNT_MISMATCH,
            "column count differs from declared channels",
            {"columns": table.shape[1], "channels": len(labels)},
        )
    declared = header.get("samples")
    if declared is not None and declared != table.shape[0]:
        raise RecordingFormatError(
            ErrorCode.SAMPLE_COUNT_MISMATCH,
            "sample count mismatch",
            {"declared": declared, "rows": table.shape[0]},
        )
    return header["fs"], labels, table.T


def _read_binary(path: Path) -> tuple[float, list[str], np.ndarray]:
    raw = path.read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, "binary file lacks a header line")
    header = parse_header(raw[:newline].decode("utf-8"))
    if header.get("encoding") != "f32le":
        raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, "unsupported encoding", {"encoding": header.get("encoding")})
    if "samples" not in header:
        raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, "binary header lacks samples=")
    labels = header["channels"]
    body = raw[newline + 1:]
    expected = len(labels) * header["samples"] * 4
    if len(body) != expected:
        raise RecordingFormatError(
            ErrorCode.SAMPLE_COUNT_MISMATCH,
            "sample count mismatch",
            {"expected_bytes": expected, "actual_bytes": len(body)},
        )
    values = np.frombuffer(body, dtype="<f4").astype(np.float64)
    return header["fs"], labels, values.reshape(len(labels), header["samples"])


def _read_markers(path: Path) -> list[Marker]:
    if not path.exists():
        return []
    markers: list[Marker] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        index, sep, label = line.partition(",")
        if not sep:
            raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, "marker row needs sample_index,label", {"line": lineno})
        try:
            sample_index = int(index)
        except ValueError:
            if lineno == 1:
                continue  # header row
            raise RecordingFormatError(ErrorCode.MALFORMED_HEADER, "non-integer marker index", {"line": lineno}) from None
        markers.append(Marker(sample_index=sample_index, label=label.strip()))
    return markers
