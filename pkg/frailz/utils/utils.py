from __future__ import annotations

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np
from tqdm import tqdm

from frailz.constants import THREADS_ENV
from frailz.errors import ConfigError

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger("frailz.utils")


def resolve_threads(requested: Optional[int] = None) -> int:
    """
    Worker thread count.

    Args:
        requested: Explicit value (from the command line); wins when given.

    Returns:
        ``requested``, else ``$FRAILZ_THREADS``, else the CPU count.

    Raises:
        ConfigError: If the chosen value is not a positive integer.
    """
    if requested is not None:
        value, source = requested, "--threads"
    elif os.environ.get(THREADS_ENV):
        value, source = os.environ[THREADS_ENV], THREADS_ENV
    else:
        return max(1, os.cpu_count() or 1)
    try:
        threads = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{source}: thread count must be an integer, got {value!r}") from None
    if threads < 1:
        raise ConfigError(f"{source}: thread count must be >= 1, got {threads}")
    return threads


def parallel_map(
    func: Callable[[T], R],
    items: Sequence[T],
    workers: int = 1,
    desc: Optional[str] = None,
    progress: bool = False,
) -> List[R]:
    """
    Apply ``func`` to every item, optionally on a thread pool.

    Results come back in input order whatever order the workers finish in.
    """
    items = list(items)
    bar = tqdm(total=len(items), desc=desc, unit="it", disable=not progress, leave=False)
    try:
        if workers <= 1 or len(items) <= 1:
            results = []
            for item in items:
                results.append(func(item))
                bar.update(1)
            return results
        out: List[Optional[R]] = [None] * len(items)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(func, item): i for i, item in enumerate(items)}
            for future in as_completed(futures):
                out[futures[future]] = future.result()
                bar.update(1)
        return out  # type: ignore[return-value]
    finally:
        bar.close()


def derive_seed(*keys: int) -> int:
    """Deterministic 63-bit sub-seed from a tuple of non-negative integers."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_json(payload: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2, sort_keys=False, allow_nan=True)
        f.write("\n")


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def parse_rows(text: Optional[str]) -> List[int]:
    """'20,42' -> [20, 42]; empty or None -> []."""
    if not text:
        return []
    return [int(part) for part in str(text).split(",") if part.strip()]
