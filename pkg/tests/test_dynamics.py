import numpy as np
import pytest
import scipy.linalg

from fermichain.analysis.observables import (
    magnetization_profile,
    sector_ground_state,
)
from fermichain.core.bdg import diagonalize
from fermichain.core.model import (
    BoundaryCondition,
    ParitySector,
    assemble_bdg,
    make_uniform,
)
from fermichain.errors import InvalidInputError, InvalidScheduleError
from fermichain.evolution.dynamics import (
    StepPolicy,
    anneal,
    bond_correlators,
    defect_density,
    energy,
    green_functions,
    loschmidt_echo,
    majorana_correlation,
    propagate,
    propagate_momentum,
)
from fermichain.evolution.schedules import (
    ConstantSchedule,
    CosineRamp,
    LinearRamp,
    ScheduleFactory,
)
from fermichain.oracle import ed_oracle


def test_schedule_factory():
    ramp = ScheduleFactory.get_schedule("linear", tau=2.0, h_i=2.0, h_f=0.0)
    spec = make_uniform(4, h=2.0)
    np.testing.assert_allclose(ramp.h_of_t(1.0, spec), 1.0)
    np.testing.assert_allclose(ramp.h_of_t(5.0, spec), 0.0)
    with pytest.raises(InvalidScheduleError):
        ScheduleFactory.get_schedule("sawtooth", tau=1.0)


def test_cosine_ramp_end_points():
    spec = make_uniform(4, h=2.0)
    ramp = CosineRamp(tau=3.0, h_f=0.5)
    np.testing.assert_allclose(ramp.h_of_t(0.0, spec), 2.0)
    np.testing.assert_allclose(ramp.h_of_t(3.0, spec), 0.5)


def test_schedule_rejects_negative_duration():
    with pytest.raises(InvalidScheduleError):
        LinearRamp(tau=-1.0)


def test_step_policy_validation():
    with pytest.raises(InvalidInputError):
        StepPolicy(method="euler")
    with pytest.raises(InvalidInputError):
        StepPolicy(dt_max=0.0)
    assert StepPolicy(dt_max=0.1, safety=1e6).steps(1.0, 1.0) == 10


def test_green_functions_of_vacuum(ising_ring):
    basis = diagonalize(assemble_bdg(ising_ring))
    g = green_functions(basis.U, basis.V)
    assert g.defect() < 1e-12
    m = assemble_bdg(ising_ring)
    assert energy(m, g) == pytest.approx(basis.ground_energy, abs=1e-10)
    A = majorana_correlation(g).Amat
    # Pure Gaussian states have A A^T = 1
    np.testing.assert_allclose(A @ A.T, np.eye(2 * g.L), atol=1e-10)


def test_classical_ground_state_has_no_kinks(bc):
    spec = make_uniform(8, 1.0, 1.0, 0.0, bc)
    basis = sector_ground_state(spec, ParitySector.EVEN)
    g = green_functions(basis.U, basis.V)
    np.testing.assert_allclose(bond_correlators(g, spec), 1.0, atol=1e-10)
    assert defect_density(g, spec) == pytest.approx(0.0, abs=1e-10)


def test_static_evolution_keeps_eigenstate(ising_ring):
    basis = diagonalize(assemble_bdg(ising_ring))
    snaps = propagate(basis, ising_ring, ConstantSchedule(tau=5.0), [0, 1, 5])
    np.testing.assert_allclose(loschmidt_echo(basis, snaps), 1.0, atol=1e-10)
    g0 = green_functions(basis.U, basis.V)
    g1 = green_functions(snaps[-1].U, snaps[-1].V)
    np.testing.assert_allclose(g1.G, g0.G, atol=1e-10)


def test_initial_basis_is_checked(ising_ring):
    other = diagonalize(assemble_bdg(ising_ring.with_fields(2.0)))
    with pytest.raises(InvalidInputError):
        propagate(other, ising_ring, ConstantSchedule(tau=1.0), [0, 1])


def test_time_grid_must_start_at_zero(ising_ring):
    basis = diagonalize(assemble_bdg(ising_ring))
    with pytest.raises(InvalidScheduleError):
        propagate(basis, ising_ring, ConstantSchedule(tau=1.0), [0.5, 1.0])
    with pytest.raises(InvalidScheduleError):
        propagate(basis, ising_ring, ConstantSchedule(tau=1.0), [0.0, 1.0, 1.0])


def test_quench_conserves_energy(ising_ring):
    b0 = diagonalize(assemble_bdg(ising_ring.with_fields(2.0)))
    snaps = propagate(
        b0, ising_ring, ConstantSchedule(tau=3.0), [0, 1, 2, 3],
        check_initial=False,
    )
    m = assemble_bdg(ising_ring)
    energies = [energy(m, green_functions(s.U, s.V)) for s in snaps]
    np.testing.assert_allclose(energies, energies[0], atol=1e-10)
    echo = loschmidt_echo(b0, snaps)
    assert echo[0] == pytest.approx(1.0)
    assert np.all(echo[1:] < 1.0)
    assert max(s.canonical_defect() for s in snaps) < 1e-10


def test_quench_matches_exact_evolution(bc):
    spec = make_uniform(6, 1.0, 0.8, 0.5, bc)
    b0 = sector_ground_state(spec.with_fields(2.0), ParitySector.EVEN)
    times = [0.0, 0.7, 1.5]
    snaps = propagate(
        b0, spec, ConstantSchedule(tau=1.5), times, check_initial=False
    )

    _, psi0 = ed_oracle.ground(spec.with_fields(2.0), parity=0)
    H = ed_oracle.build(spec).H
    Z = [ed_oracle.site_operator(6, j, "z").toarray() for j in range(6)]
    for t, snap in zip(times, snaps):
        psi = scipy.linalg.expm(-1j * H * t) @ psi0
        exact = [np.real(np.vdot(psi, Zj @ psi)) for Zj in Z]
        g = green_functions(snap.U, snap.V)
        np.testing.assert_allclose(magnetization_profile(g), exact, atol=1e-8)


def test_rk4_agrees_with_exponential(ising_ring):
    b0 = diagonalize(assemble_bdg(ising_ring.with_fields(1.5)))
    ramp = LinearRamp(tau=2.0, h_i=1.5, h_f=0.6)
    fine = StepPolicy(dt_max=0.002, method="expm")
    rk4 = StepPolicy(dt_max=0.002, method="rk4")
    a = propagate(b0, ising_ring, ramp, [0, 2], fine)
    b = propagate(b0, ising_ring, ramp, [0, 2], rk4)
    ga = green_functions(a[-1].U, a[-1].V)
    gb = green_functions(b[-1].U, b[-1].V)
    np.testing.assert_allclose(ga.G, gb.G, atol=1e-5)


def test_momentum_and_real_space_anneals_agree():
    spec = make_uniform(12, 1.0, 1.0, 2.0)
    ramp = LinearRamp(tau=4.0, h_i=2.0, h_f=0.0)
    policy = StepPolicy(dt_max=0.01, safety=1e6)
    t_out = np.linspace(0.0, 4.0, 5)
    full = anneal(spec, ramp, policy, t_out, method="bdg")
    per_k = anneal(spec, ramp, policy, t_out, method="momentum")
    np.testing.assert_allclose(full.rho, per_k.rho, atol=1e-8)
    np.testing.assert_allclose(full.energy, per_k.energy, atol=1e-8)
    assert per_k.excitation[0] == pytest.approx(0.0, abs=1e-12)


def _ground_bond_mean(spec):
    basis = diagonalize(assemble_bdg(spec))
    return bond_correlators(green_functions(basis.U, basis.V), spec).mean()


def test_adiabatic_anneal_leaves_few_defects():
    spec = make_uniform(64, 1.0, 1.0, 2.0)
    slow = anneal(spec, LinearRamp(tau=64.0, h_i=2.0, h_f=0.0), method="momentum")
    fast = anneal(spec, LinearRamp(tau=2.0, h_i=2.0, h_f=0.0), method="momentum")
    assert slow.rho[-1] < fast.rho[-1]
    assert slow.rho[0] == pytest.approx((1 - _ground_bond_mean(spec)) / 2, abs=1e-10)


def test_momentum_needs_uniform_ring():
    spec = make_uniform(8, h=1.0, bc=BoundaryCondition.OBC)
    with pytest.raises(InvalidInputError):
        propagate_momentum(spec, ConstantSchedule(tau=1.0), [0, 1])


def test_anneal_rejects_unknown_method(ising_ring):
    with pytest.raises(InvalidInputError):
        anneal(ising_ring, ConstantSchedule(tau=1.0), method="exact")


def test_anneal_keeps_snapshots(ising_ring):
    traj = anneal(
        ising_ring,
        LinearRamp(tau=1.0, h_f=0.2),
        t_out=[0.0, 0.5, 1.0],
        snapshot_times=[0.5],
    )
    assert list(traj.greens) == [0.5]
    assert list(traj.to_frame().columns) == ["t", "rho", "energy"]
