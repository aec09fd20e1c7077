import numpy as np
import pytest

from fermichain.analysis.observables import (
    block_entropy,
    contraction_matrix,
    entanglement_entropy,
    magnetization_profile,
    sector_ground_state,
    transverse_magnetization,
    vacuum_parity,
    xx_correlation_profile,
    xx_correlator,
    zz_correlator,
)
from fermichain.core.bdg import diagonalize
from fermichain.core.gaussian import excited_basis
from fermichain.core.model import (
    BoundaryCondition,
    ParitySector,
    assemble_bdg,
    make_uniform,
)
from fermichain.errors import (
    EmptyBlockError,
    InvalidInputError,
    NonEquilibriumUnsupportedError,
)
from fermichain.evolution.dynamics import (
    NambuGreen,
    green_functions,
    majorana_correlation,
)
from fermichain.oracle import ed_oracle


def _ground_green(spec, sector=ParitySector.EVEN):
    basis = sector_ground_state(spec, sector)
    return green_functions(basis.U, basis.V)


@pytest.mark.parametrize("sector", list(ParitySector))
def test_sector_ground_state_has_sector_parity(disordered_chain, sector):
    basis = sector_ground_state(disordered_chain, sector)
    assert vacuum_parity(basis) == sector.boundary_sign
    e0, _ = ed_oracle.ground(disordered_chain, parity=int(sector))
    assert basis.ground_energy == pytest.approx(e0, abs=1e-9)


def test_vacuum_parity_flips_with_one_quasiparticle(ising_ring):
    basis = diagonalize(assemble_bdg(ising_ring))
    assert vacuum_parity(excited_basis(basis, [2])) == -vacuum_parity(basis)


def test_paramagnet_vacuum_is_even():
    basis = diagonalize(assemble_bdg(make_uniform(8, 1.0, 1.0, 3.0)))
    assert vacuum_parity(basis) == 1


@pytest.mark.parametrize("sector", list(ParitySector))
def test_correlators_match_exact(disordered_chain, sector):
    L = disordered_chain.L
    g = _ground_green(disordered_chain, sector)
    p = int(sector)
    cxx = [
        ed_oracle.correlator(disordered_chain, "xx", (1, j), parity=p)
        for j in range(2, L)
    ]
    np.testing.assert_allclose(xx_correlation_profile(g, 1), cxx, atol=1e-9)
    assert xx_correlator(g, 1, 4) == pytest.approx(cxx[2], abs=1e-9)
    czz = [
        ed_oracle.correlator(disordered_chain, "zz", (0, j), parity=p)
        for j in range(1, L)
    ]
    np.testing.assert_allclose(
        [zz_correlator(g, 0, j) for j in range(1, L)], czz, atol=1e-9
    )
    sz = [ed_oracle.correlator(disordered_chain, "z", (j,), parity=p) for j in range(L)]
    np.testing.assert_allclose(magnetization_profile(g), sz, atol=1e-9)
    assert transverse_magnetization(g, 0) == pytest.approx(sz[0], abs=1e-9)


def test_ordered_phase_plateau():
    h = 0.5
    g = _ground_green(make_uniform(64, 1.0, 1.0, h))
    cxx = xx_correlation_profile(g)
    assert cxx[31] == pytest.approx((1 - h**2) ** 0.25, abs=1e-6)


def test_ring_correlations_mirror_around_half_chain(ising_ring):
    cxx = xx_correlation_profile(_ground_green(ising_ring))
    L = ising_ring.L
    for r in range(1, L):
        assert cxx[r - 1] == pytest.approx(cxx[L - r - 1], abs=1e-10)


def test_critical_power_law():
    g = _ground_green(make_uniform(256, 1.0, 1.0, 1.0))
    r = np.arange(4, 17)
    cxx = np.array([xx_correlator(g, 0, int(d)) for d in r])
    slope = np.polyfit(np.log(r), np.log(cxx), 1)[0]
    assert slope == pytest.approx(-0.25, abs=0.02)


def test_paramagnet_correlations_decay():
    g = _ground_green(make_uniform(32, 1.0, 1.0, 2.0))
    cxx = xx_correlation_profile(g)
    assert abs(cxx[15]) < 1e-4
    assert zz_correlator(g, 3, 3) == 1.0


def test_contraction_window_checks(ising_ring):
    g = _ground_green(ising_ring)
    with pytest.raises(InvalidInputError):
        contraction_matrix(g, 3, 3)
    with pytest.raises(InvalidInputError):
        contraction_matrix(g, 0, 8)
    assert contraction_matrix(g, 2, 5).M.shape == (3, 3)


def test_string_correlator_rejects_complex_green(ising_ring):
    g = _ground_green(ising_ring)
    G = g.G.astype(complex)
    G[0, 1] += 1e-3j
    G[1, 0] -= 1e-3j
    with pytest.raises(NonEquilibriumUnsupportedError):
        xx_correlator(NambuGreen(G=G, F=g.F), 0, 3)


def test_cat_state_entropy():
    g = _ground_green(make_uniform(8, 1.0, 1.0, 0.0))
    result = block_entropy(g, range(4))
    assert result.entropy == pytest.approx(np.log(2), abs=1e-10)
    assert block_entropy(g, range(4), bits=True).entropy == pytest.approx(1.0)


def test_product_state_entropy():
    g = _ground_green(make_uniform(8, 1.0, 1.0, 1e8))
    assert block_entropy(g, range(4)).entropy == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("block", [[0, 1, 2], [1, 2], [0, 4], [5]])
def test_entropy_matches_exact(disordered_chain, block):
    g = _ground_green(disordered_chain)
    exact = ed_oracle.reduced_entropy(disordered_chain, block, parity=0)
    assert block_entropy(g, block).entropy == pytest.approx(exact, abs=1e-9)


def test_entropy_is_symmetric_under_complement(disordered_chain):
    g = _ground_green(disordered_chain)
    left = block_entropy(g, [0, 1]).entropy
    right = block_entropy(g, [2, 3, 4, 5]).entropy
    assert left == pytest.approx(right, abs=1e-10)


def test_critical_entropy_grows_logarithmically():
    sizes = [32, 64, 128]
    S = [
        block_entropy(
            _ground_green(make_uniform(L, 1.0, 1.0, 1.0)), range(L // 2)
        ).entropy
        for L in sizes
    ]
    coefficient = np.polyfit(np.log(sizes), S, 1)[0]
    # c / 3 with c = 1/2 on a ring
    assert coefficient == pytest.approx(1 / 6, abs=0.01)


def test_entropy_block_checks(ising_ring):
    m = majorana_correlation(_ground_green(ising_ring))
    with pytest.raises(EmptyBlockError):
        entanglement_entropy(m, [])
    with pytest.raises(InvalidInputError):
        entanglement_entropy(m, [0, 9])
    result = entanglement_entropy(m, [0, 1, 2])
    assert result.lambdas.shape == (3,)
    assert np.all(np.abs(result.lambdas) <= 1.0)
