import numpy as np
import pytest

from fermichain.core.model import (
    BoundaryCondition,
    make_disordered,
    make_uniform,
)


@pytest.fixture(params=[BoundaryCondition.PBC, BoundaryCondition.OBC])
def bc(request):
    return request.param


@pytest.fixture
def ising_ring():
    """Ordered-phase Ising ring with L = 8."""
    return make_uniform(8, J=1.0, kappa=1.0, h=0.6)


@pytest.fixture
def disordered_chain(bc):
    return make_disordered(
        6, (0.5, 1.0), (0.0, 1.0), kappa=0.8, seed=3, bc=bc
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
