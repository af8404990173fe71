from .epochs import extract_epochs, window_samples
from .io import RecordingFormat, load_recording, markers_path, save_recording
from .recording import REST, TASK, EpochSet, Marker, Recording

__all__ = [
    "REST",
    "TASK",
    "EpochSet",
    "Marker",
    "Recording",
    "RecordingFormat",
    "extract_epochs",
    "load_recording",
    "markers_path",
    "save_recording",
    "window_samples",
]
