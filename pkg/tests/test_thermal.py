import numpy as np
import pytest

from fermichain.analysis.observables import magnetization_profile
from fermichain.analysis.thermal import (
    SECTORS,
    build_context,
    energy_density,
    gamma_occupation,
    occupations,
    partition_function,
    sector_green,
    sector_weight,
    thermal_green,
)
from fermichain.core.model import BoundaryCondition, make_uniform
from fermichain.errors import InvalidRangeError
from fermichain.oracle import ed_oracle


def test_infinite_temperature(bc):
    spec = make_uniform(6, 1.0, 0.7, 0.5, bc)
    ctx = build_context(spec, 0.0)
    assert partition_function(ctx) == pytest.approx(6 * np.log(2), abs=1e-10)
    assert energy_density(ctx) == pytest.approx(0.0, abs=1e-12)
    assert sector_weight(ctx, SECTORS[0]) == pytest.approx(0.5)


@pytest.mark.parametrize("beta", [0.1, 1.0, 4.0])
def test_partition_function_matches_exact(disordered_chain, beta):
    ctx = build_context(disordered_chain, beta)
    assert partition_function(ctx) == pytest.approx(
        ed_oracle.log_partition(disordered_chain, beta), abs=1e-9
    )


@pytest.mark.parametrize("beta", [0.1, 1.0, 4.0])
def test_energy_matches_exact(disordered_chain, beta):
    ctx = build_context(disordered_chain, beta)
    exact = ed_oracle.thermal_average(disordered_chain, beta) / disordered_chain.L
    assert energy_density(ctx) == pytest.approx(exact, abs=1e-9)


def test_magnetization_matches_exact(disordered_chain):
    beta = 1.3
    g = thermal_green(build_context(disordered_chain, beta))
    exact = [
        ed_oracle.thermal_average(disordered_chain, beta, [(j, "z")])
        for j in range(disordered_chain.L)
    ]
    np.testing.assert_allclose(magnetization_profile(g), exact, atol=1e-9)


def test_weights_and_occupations(ising_ring):
    ctx = build_context(ising_ring, 2.0)
    weights = [sector_weight(ctx, p) for p in SECTORS]
    assert sum(weights) == pytest.approx(1.0)
    for p in SECTORS:
        n, nbar = occupations(ctx, p)
        np.testing.assert_allclose(n + nbar, sector_weight(ctx, p), rtol=1e-10)
        assert np.all(n >= -1e-15)
        assert sector_green(ctx, p).weight == pytest.approx(sector_weight(ctx, p))
    assert thermal_green(ctx).weight == pytest.approx(1.0)


def test_low_temperature_reaches_ground_state():
    spec = make_uniform(8, 1.0, 1.0, 1.5)
    ctx = build_context(spec, 60.0)
    e0, _ = ed_oracle.ground(spec)
    assert energy_density(ctx) == pytest.approx(e0 / 8, abs=1e-10)


def test_huge_beta_stays_finite():
    spec = make_uniform(8, 1.0, 1.0, 0.0, BoundaryCondition.OBC)
    ctx = build_context(spec, 1e4)
    assert np.isfinite(partition_function(ctx))
    assert energy_density(ctx) == pytest.approx(-7 / 8, abs=1e-10)


def test_negative_beta_is_rejected(ising_ring):
    with pytest.raises(InvalidRangeError):
        build_context(ising_ring, -1.0)
    with pytest.raises(InvalidRangeError):
        build_context(ising_ring, np.inf)


def test_gamma_occupation_counts_states_at_infinite_temperature(bc):
    L = 6
    ctx = build_context(make_uniform(L, 1.0, 1.0, 0.8, bc), 0.0)
    for p in SECTORS:
        for mu in (0, L - 1):
            n, nbar = gamma_occupation(ctx, p, mu)
            assert n == pytest.approx(2 ** (L - 2))
            assert nbar == pytest.approx(2 ** (L - 2))


def test_gamma_occupation_is_trace_weighted(disordered_chain):
    ctx = build_context(disordered_chain, 1.5)
    z = np.exp(partition_function(ctx))
    for p in SECTORS:
        n, nbar = occupations(ctx, p)
        for mu in range(disordered_chain.L):
            traced = gamma_occupation(ctx, p, mu)
            assert traced[0] == pytest.approx(z * n[mu], rel=1e-10)
            assert traced[1] == pytest.approx(z * nbar[mu], rel=1e-10)
            assert sum(traced) == pytest.approx(
                z * sector_weight(ctx, p), rel=1e-10
            )
