import time
from concurrent.futures import ProcessPoolExecutor
from functools import wraps
from typing import Any, Callable, Dict, Iterable, List, Sequence

import numpy as np
from loguru import logger
from tqdm import tqdm

from fermichain.errors import InvalidRangeError


def log_execution_time(func):
    """
    Decorator that logs the execution time of a function.

    Args:
        func (function): The function to be decorated.

    Returns:
        function: The decorated function.
    """

    @wraps(func)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = func(*args, **kwargs)
        logger.debug(
            f"{func.__qualname__} finished in "
            f"{time.perf_counter() - start:.3f} s"
        )
        return result

    return wrapper


def parse_grid(text: str) -> np.ndarray:
    """
    Parse a numeric grid from the command line.

    Accepts either "start:step:stop" (stop included when it falls on the
    grid) or a comma-separated list of values.

    Args:
        text (str): The grid description.

    Returns:
        np.ndarray: The grid values as floats.

    Raises:
        InvalidRangeError: If the description is malformed.
    """
    text = text.strip()
    try:
        if ":" in text:
            start, step, stop = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise InvalidRangeError(
                    f"Grid '{text}' needs step > 0 and stop >= start"
                )
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return start + step * np.arange(count)
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError as e:
        if isinstance(e, InvalidRangeError):
            raise
        raise InvalidRangeError(f"Cannot parse grid '{text}': {e}") from e


def log_grid(start: float, stop: float, count: int) -> np.ndarray:
    """Return count log-spaced values between start and stop inclusive."""
    if start <= 0 or stop <= start or count < 2:
        raise InvalidRangeError(
            f"Log grid needs 0 < start < stop and count >= 2, "
            f"got ({start}, {stop}, {count})"
        )
    return np.geomspace(start, stop, count)


def loglog_fit(x: Sequence[float], y: Sequence[float]) -> Dict[str, float]:
    """
    Ordinary least squares fit of log(y) against log(x).

    Returns:
        Dict[str, float]: slope, intercept and the fit window (x_min, x_max).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "x_min": float(x.min()),
        "x_max": float(x.max()),
    }


def run_tasks(
    func: Callable[[Any], Any],
    tasks: Iterable[Any],
    workers: int = 1,
    desc: str = "tasks",
) -> List[Any]:
    """
    Evaluate func over independent tasks, optionally in a process pool.

    Results are returned in task order so that output assembly stays
    deterministic regardless of the worker count.

    Args:
        func (Callable): A picklable top-level function of one argument.
        tasks (Iterable): The task arguments.
        workers (int): Number of worker processes; 1 runs in-process.
        desc (str): Progress bar label.

    Returns:
        List[Any]: One result per task.
    """
    tasks = list(tasks)
    if workers <= 1:
        return [func(t) for t in tqdm(tasks, desc=desc, leave=False)]
    logger.debug(f"Running {len(tasks)} {desc} on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(
            tqdm(pool.map(func, tasks), total=len(tasks), desc=desc, leave=False)
        )
