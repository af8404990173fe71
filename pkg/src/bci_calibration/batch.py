"""Worker pool for sessions and folds."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Generic, List, Optional, Sequence, TypeVar

from loguru import logger

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class BatchResult(Generic[R]):
    """Result of batch processing; ``results[i]`` is None when item i failed."""
    total: int
    successful: int
    failed: int
    results: List[Optional[R]] = field(default_factory=list)
    errors: List[tuple[int, Exception]] = field(default_factory=list)


class BatchProcessor:
    """Process items on a thread pool with input-ordered results."""

    def __init__(self, max_workers: int = 1) -> None:
        self.max_workers = max(1, int(max_workers))

    def process(self, items: Sequence[T], processor: Callable[[T], R]) -> BatchResult[R]:
        """Run ``processor`` over ``items``; failures are captured, not raised."""

        def run(index: int) -> tuple[int, Any, Exception | None]:
            try:
                return index, processor(items[index]), None
            except Exception as exc:  # noqa: BLE001 - collected per item
                return index, None, exc

        if self.max_workers == 1 or len(items) <= 1:
            outcomes = [run(i) for i in range(len(items))]
        else:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                outcomes = list(pool.map(run, range(len(items))))

        results: list[Optional[R]] = [None] * len(items)
        errors: list[tuple[int, Exception]] = []
        for index, value, error in sorted(outcomes, key=lambda o: o[0]):
            if error is None:
                results[index] = value
            else:
                logger.error("item {} failed: {}", index, error)
                errors.append((index, error))

        return BatchResult(
            total=len(items),
            successful=len(items) - len(errors),
            failed=len(errors),
            results=results,
            errors=errors,
        )
