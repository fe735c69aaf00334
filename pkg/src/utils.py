#!/usr/bin/env python3
"""
Utility functions for coalspec
"""
import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional

import numpy as np


def setup_logging(
    log_file: Optional[Path] = None,
    level: str = "INFO",
    console: bool = True
) -> logging.Logger:
    """
    Configure logging with both file and console handlers

    Args:
        log_file: Path to log file (defaults to data/logs/coalspec.log)
        level: Logging level (DEBUG, INFO, WARNING, ERROR); COALSPEC_LOG_LEVEL wins
        console: Whether to also log to console

    Returns:
        Configured logger
    """
    level = os.getenv("COALSPEC_LOG_LEVEL", level)

    logger = logging.getLogger("coalspec")
    logger.setLevel(getattr(logging, level.upper()))

    # Clear existing handlers
    logger.handlers.clear()

    formatter = logging.Formatter(
        fmt="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S"
    )

    if log_file is None:
        project_root = Path(__file__).parent.parent
        log_file = project_root / "data" / "logs" / "coalspec.log"

    log_file.parent.mkdir(parents=True, exist_ok=True)

    file_handler = RotatingFileHandler(
        log_file,
        maxBytes=10 * 1024 * 1024,  # 10 MB
        backupCount=5,
        encoding="utf-8"
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(formatter)
    logger.addHandler(file_handler)

    if console:
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    return logger


def format_float(value: float) -> str:
    """
    Format a number for CSV output

    Uses the shortest decimal string that round-trips to the same float,
    so regenerated files are byte-identical.
    """
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def parse_seed_list(text: str) -> List[int]:
    """
    Parse a seed list like "1,2,5-8"

    Args:
        text: Comma-separated seeds and inclusive ranges

    Returns:
        Seeds in the order given

    Raises:
        ValueError: If an item is not an integer or a range is reversed
    """
    seeds: List[int] = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "-" in item.lstrip("-"):
            start_text, end_text = item.split("-", 1)
            start, end = int(start_text), int(end_text)
            if end < start:
                raise ValueError(f"Reversed seed range: {item}")
            seeds.extend(range(start, end + 1))
        else:
            seeds.append(int(item))
    return seeds


def spawn_generators(seed: int, count: int) -> List[np.random.Generator]:
    """
    Derive independent random streams from a master seed

    Args:
        seed: Master seed
        count: Number of streams

    Returns:
        List of numpy Generators, stable for a given (seed, count)
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def worker_count(jobs: int) -> int:
    """
    Number of worker processes for a batch of jobs

    Capped by COALSPEC_THREADS when set, by the CPU count otherwise.
    """
    cap_env = os.getenv("COALSPEC_THREADS")
    cap = os.cpu_count() or 1
    if cap_env:
        try:
            cap = max(1, int(cap_env))
        except ValueError:
            logging.getLogger("coalspec.utils").warning(
                f"Ignoring invalid COALSPEC_THREADS={cap_env!r}"
            )
    return max(1, min(jobs, cap))


def truncate_text(text: str, max_length: int = 100) -> str:
    """
    Truncate text for console tables

    Args:
        text: Text to truncate
        max_length: Maximum length

    Returns:
        Truncated text with ellipsis if needed
    """
    if len(text) <= max_length:
        return text
    return text[:max_length - 3] + "..."
