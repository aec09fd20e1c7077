import numpy as np
import pytest

from fermichain.core.bdg import diagonalize
from fermichain.core.model import ParitySector, assemble_bdg, make_uniform
from fermichain.core.uniform import (
    Dispersion,
    amplitudes,
    bands,
    epsilon_k,
    ground_pairing,
    k_grid,
    sector_excitation_energies,
    sector_gap,
    sector_ground_energy,
    winding_index,
)
from fermichain.errors import (
    DegenerateEllipseError,
    DegeneratePointError,
    InvalidRangeError,
    UndefinedIndexError,
    UnsupportedSizeError,
)


def test_k_grids():
    even = k_grid(4, ParitySector.EVEN).ks
    odd = k_grid(4, ParitySector.ODD).ks
    np.testing.assert_allclose(even, [-3 * np.pi / 4, -np.pi / 4, np.pi / 4, 3 * np.pi / 4])
    np.testing.assert_allclose(odd, [-np.pi / 2, 0.0, np.pi / 2, np.pi])
    np.testing.assert_allclose(k_grid(4, ParitySector.ODD).positive, [np.pi / 2])


def test_k_grid_needs_even_length():
    with pytest.raises(UnsupportedSizeError):
        k_grid(7, ParitySector.EVEN)


def test_dispersion_edges():
    assert epsilon_k(0.0, 1.0, 0.5, 1.0) == pytest.approx(1.0)
    assert epsilon_k(np.pi, 1.0, 0.5, 1.0) == pytest.approx(3.0)
    # XX limit: eps = 2|h - J cos k|
    ks = np.linspace(-np.pi, np.pi, 9)
    np.testing.assert_allclose(
        epsilon_k(ks, 1.0, 0.3, 0.0), 2 * np.abs(0.3 - np.cos(ks)), atol=1e-14
    )


def test_amplitudes_are_normalized_eigenvectors():
    disp = Dispersion(J=1.0, h=0.4, kappa=0.7)
    ks = np.linspace(-3.0, 3.0, 13)
    u, v = disp.amplitudes(ks)
    np.testing.assert_allclose(np.abs(u) ** 2 + np.abs(v) ** 2, 1.0, atol=1e-14)
    for k, a, b in zip(ks, u, v):
        x = np.array([a, b])
        np.testing.assert_allclose(
            disp.matrix(k) @ x, disp.epsilon(k) * x, atol=1e-13
        )


def test_amplitudes_parity_in_k():
    ks = np.array([0.3, 1.2, 2.9])
    u, v = amplitudes(ks, 1.0, 1.7, 1.0)
    um, vm = amplitudes(-ks, 1.0, 1.7, 1.0)
    np.testing.assert_allclose(um, u, atol=1e-14)
    np.testing.assert_allclose(vm, -v, atol=1e-14)


def test_amplitudes_fail_at_gapless_point():
    with pytest.raises(DegeneratePointError):
        amplitudes(0.0, 1.0, 1.0, 1.0)


@pytest.mark.parametrize("sector", list(ParitySector))
@pytest.mark.parametrize("h", [0.3, 1.0, 1.8])
def test_sector_energies_match_real_space(sector, h):
    spec = make_uniform(10, 1.0, 0.6, h)
    basis = diagonalize(assemble_bdg(spec, sector))
    np.testing.assert_allclose(
        2 * basis.eps,
        sector_excitation_energies(10, 1.0, h, 0.6, sector),
        atol=1e-10,
    )


def test_gap_in_paramagnet():
    assert sector_gap(64, 1.0, 1.5) == pytest.approx(1.0, abs=1e-8)


def test_gap_closes_exponentially_in_ferromagnet():
    assert sector_gap(32, 1.0, 0.5) / sector_gap(24, 1.0, 0.5) < 0.1
    assert sector_gap(24, 1.0, 0.5) > 0


def test_critical_gap_scales_as_inverse_length():
    assert 512 * sector_gap(512, 1.0, 1.0) == pytest.approx(np.pi / 2, rel=0.02)


def test_ground_energy_at_zero_field():
    # Classical Ising ring: E0 = -J L in both sectors
    assert sector_ground_energy(8, 1.0, 0.0, 1.0, ParitySector.EVEN) == pytest.approx(-8.0)
    assert sector_ground_energy(8, 1.0, 0.0, 1.0, ParitySector.ODD) == pytest.approx(-8.0)


def test_uniform_rejects_negative_field():
    with pytest.raises(InvalidRangeError):
        sector_ground_energy(8, 1.0, -0.1, 1.0, ParitySector.EVEN)


@pytest.mark.parametrize(
    "h, expected", [(0.0, 1), (0.5, 1), (0.99, 1), (1.01, 0), (2.0, 0), (10.0, 0)]
)
def test_winding_index(h, expected):
    assert winding_index(1.0, h, 1.0) == expected


def test_winding_undefined_cases():
    with pytest.raises(UndefinedIndexError):
        winding_index(1.0, 1.0, 1.0)
    with pytest.raises(DegenerateEllipseError):
        winding_index(1.0, 0.5, 0.0)


def test_ground_pairing_is_odd_in_k():
    ks, z = ground_pairing(8, 1.0, 0.5)
    assert len(ks) == 8
    np.testing.assert_allclose(z[::-1], -z, atol=1e-14)


def test_bands_frame():
    frame = bands(1.0, 0.5, 1.0, np.linspace(-np.pi, np.pi, 5))
    assert list(frame.columns) == ["k", "eps_plus", "eps_minus"]
    np.testing.assert_allclose(frame["eps_plus"], -frame["eps_minus"])
