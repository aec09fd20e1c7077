from typing import Any, Sequence, Union

import numpy as np

from fermichain.utils.helpers import parse_grid


def grid(value: Union[str, float, Sequence[float]]) -> np.ndarray:
    """Grid parameter given as "a:step:b", "x,y,z", a number or a list."""
    if isinstance(value, str):
        return parse_grid(value)
    return np.atleast_1d(np.asarray(value, dtype=float))


def int_grid(value: Any) -> np.ndarray:
    return grid(value).astype(int)
