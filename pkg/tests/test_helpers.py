import numpy as np
import pytest

from fermichain.errors import InvalidRangeError
from fermichain.utils.helpers import (
    log_execution_time,
    log_grid,
    loglog_fit,
    parse_grid,
    run_tasks,
)


def _square(x):
    return x * x


def test_parse_grid_range():
    np.testing.assert_allclose(parse_grid("0:0.5:2"), [0, 0.5, 1, 1.5, 2])
    assert parse_grid("0:0.02:2").size == 101


def test_parse_grid_list():
    np.testing.assert_allclose(parse_grid("0.1, 1,10"), [0.1, 1, 10])


@pytest.mark.parametrize("text", ["a:b:c", "1:0:2", "2:0.1:1", "1,x"])
def test_parse_grid_rejects_malformed(text):
    with pytest.raises(InvalidRangeError):
        parse_grid(text)


def test_log_grid():
    values = log_grid(1.0, 100.0, 3)
    np.testing.assert_allclose(values, [1, 10, 100])
    with pytest.raises(InvalidRangeError):
        log_grid(0.0, 1.0, 3)


def test_loglog_fit_recovers_exponent():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    fit = loglog_fit(x, 3.0 * x**-0.5)
    assert fit["slope"] == pytest.approx(-0.5)
    assert fit["intercept"] == pytest.approx(np.log(3.0))
    assert (fit["x_min"], fit["x_max"]) == (1.0, 8.0)


def test_run_tasks_keeps_order():
    assert run_tasks(_square, [3, 1, 2]) == [9, 1, 4]
    assert run_tasks(_square, [3, 1, 2], workers=2) == [9, 1, 4]


def test_log_execution_time_passes_through():
    @log_execution_time
    def add(a, b):
        return a + b

    assert add(2, 3) == 5
    assert add.__name__ == "add"
