from .tracing import configure_logging, logger, stage

__all__ = [
    "configure_logging",
    "logger",
    "stage",
]
