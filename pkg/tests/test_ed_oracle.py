import numpy as np
import pytest

from fermichain.core.bdg import diagonalize
from fermichain.core.model import assemble_bdg, make_uniform
from fermichain.errors import (
    EmptyBlockError,
    InvalidInputError,
    SizeLimitError,
)
from fermichain.oracle import ed_oracle


def test_jordan_wigner_anticommutation():
    L = 3
    cs = [c.toarray() for c in ed_oracle.fermion_operators(L)]
    eye = np.eye(2**L)
    for i in range(L):
        for j in range(L):
            anti = cs[i] @ cs[j].conj().T + cs[j].conj().T @ cs[i]
            np.testing.assert_allclose(anti, eye if i == j else 0 * eye, atol=1e-14)
            np.testing.assert_allclose(cs[i] @ cs[j] + cs[j] @ cs[i], 0, atol=1e-14)


def test_occupation_follows_basis_bits():
    L = 3
    cs = ed_oracle.fermion_operators(L)
    bits = ed_oracle.occupation_bits(L)
    for j, c in enumerate(cs):
        n = (c.conj().T @ c).diagonal().real
        np.testing.assert_array_equal(n, bits[:, j])
    parity = ed_oracle.parity_diagonal(L)
    Z = ed_oracle.pauli_string(L, [(j, "z") for j in range(L)]).diagonal()
    np.testing.assert_array_equal(parity, Z.real)


def test_hamiltonian_conserves_parity(disordered_chain):
    system = ed_oracle.build(disordered_chain)
    assert system.parity_leakage() == 0.0
    np.testing.assert_allclose(system.H, system.H.T)


def test_two_site_open_chain():
    spec = make_uniform(2, J=1.0, kappa=1.0, h=0.0, bc="obc")
    # H = -sx sx: eigenvalues -1, -1, 1, 1
    np.testing.assert_allclose(ed_oracle.spectrum(spec), [-1, -1, 1, 1], atol=1e-14)


def test_spectrum_matches_fock_energies(disordered_chain):
    np.testing.assert_allclose(
        ed_oracle.fock_energies(disordered_chain),
        ed_oracle.spectrum(disordered_chain),
        atol=1e-9,
    )


def test_size_limits():
    with pytest.raises(SizeLimitError):
        ed_oracle.build(make_uniform(13))
    with pytest.raises(SizeLimitError):
        ed_oracle.log_partition(make_uniform(11), 1.0)


def test_fock_state_is_vacuum(ising_ring):
    basis = diagonalize(assemble_bdg(ising_ring))
    psi = ed_oracle.fock_state(basis.U, basis.V)
    H = ed_oracle.build(ising_ring).H
    # The even-sector vacuum of an ordered ring is the PBC ground state
    energy = np.real(np.vdot(psi, H @ psi))
    assert energy == pytest.approx(basis.ground_energy, abs=1e-9)
    assert np.linalg.norm(psi) == pytest.approx(1.0)


def test_fock_state_rejects_non_canonical_columns():
    with pytest.raises(InvalidInputError):
        ed_oracle.fock_state(np.zeros((3, 3)), np.zeros((3, 3)))


def test_state_entropy_of_simple_states():
    L = 2
    up = np.zeros(4)
    up[0] = 1.0
    assert ed_oracle.state_entropy(up, L, [0]) == pytest.approx(0.0)
    bell = np.zeros(4)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    assert ed_oracle.state_entropy(bell, L, [1]) == pytest.approx(np.log(2))
    assert ed_oracle.state_entropy(bell, L, [0], bits=True) == pytest.approx(1.0)
    with pytest.raises(EmptyBlockError):
        ed_oracle.state_entropy(bell, L, [])


def test_correlator_input_checks(ising_ring):
    with pytest.raises(InvalidInputError):
        ed_oracle.correlator(ising_ring, "xx", (0,))
    with pytest.raises(InvalidInputError):
        ed_oracle.pauli_string(4, [(0, "q")])
    with pytest.raises(InvalidInputError):
        ed_oracle.thermal_average(make_uniform(4), 1.0, "entropy")


def test_state_overlap_of_identical_chains(ising_ring):
    overlap = ed_oracle.state_overlap(ising_ring, ising_ring)
    assert abs(overlap) == pytest.approx(1.0)
    assert abs(ed_oracle.state_overlap(ising_ring, ising_ring, (), (0, 1))) < 1e-10
