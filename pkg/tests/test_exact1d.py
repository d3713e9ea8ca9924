"""Tests for instantaneous bases and exact Bogoliubov evolution."""

import math

import numpy as np
import pytest

from movingcavity.core import BoundaryCondition, FieldParams
from movingcavity.exact1d import (
    BoundaryTrajectory,
    InvalidTrajectoryError,
    StabilityError,
    assemble_vhat,
    bogoliubov_identity_residual,
    evolve_transformation,
    generator_matrix,
    mode_transform_matrix,
    solve_instantaneous_basis,
)
from movingcavity.scenarios import DceConfig, DceVariant, build_dce
from movingcavity.staticmodes import Interval, solve_interval_modes

D = BoundaryCondition.DIRICHLET
N = BoundaryCondition.NEUMANN


def dce_trajectory(variant=DceVariant.RIGHT_ONLY, bc=D, length=math.pi,
                   epsilon=1e-3, drive=3.0, mass=0.0):
    config = DceConfig(
        variant=variant, length=length, bc=bc, epsilon=epsilon,
        omega_drive=drive, mass=mass,
    )
    return build_dce(config).trajectory


# ---------------------------------------------------------------------------
# trajectories


def test_static_factory_reports_zero_velocity():
    traj = BoundaryTrajectory.static(-1.0, 1.0)
    assert traj.positions(3.7) == (-1.0, 1.0)
    assert traj.velocities(3.7) == pytest.approx((0.0, 0.0), abs=1e-12)


def test_finite_difference_velocity_matches_analytic():
    exact = dce_trajectory(variant=DceVariant.BREATHING, epsilon=0.05)
    fd = BoundaryTrajectory(exact.x_minus, exact.x_plus)
    t = 0.37
    assert fd.velocities(t) == pytest.approx(exact.velocities(t), rel=1e-7)


def test_crossing_walls_rejected():
    traj = BoundaryTrajectory(lambda t: t, lambda t: 1.0 - t)
    with pytest.raises(InvalidTrajectoryError):
        traj.positions(0.6)


def test_superluminal_wall_rejected():
    traj = BoundaryTrajectory(
        lambda t: -1.0, lambda t: 1.0 + 2.0 * t,
        v_minus=lambda t: 0.0, v_plus=lambda t: 2.0,
    )
    with pytest.raises(InvalidTrajectoryError):
        traj.velocities(0.0)


# ---------------------------------------------------------------------------
# instantaneous eigenproblem


@pytest.mark.parametrize("bc", [D, N])
@pytest.mark.parametrize("mass", [0.0, 1.3])
def test_static_limit_matches_interval_modes(bc, mass):
    length = 2.2
    traj = BoundaryTrajectory.static(0.0, length)
    basis = solve_instantaneous_basis(traj, FieldParams(mass=mass), bc, 0.0, 6)
    static = solve_interval_modes(Interval(length), FieldParams(mass=mass), bc, 6)
    assert basis.frequencies[:6] == pytest.approx(
        static.frequencies, rel=1e-10
    )


@pytest.mark.parametrize("bc", [D, N])
def test_branch_symmetry_at_rest(bc):
    traj = BoundaryTrajectory.static(-0.7, 1.4)
    basis = solve_instantaneous_basis(traj, FieldParams(mass=0.9), bc, 0.0, 5)
    freqs = basis.frequencies
    assert freqs[5:] == pytest.approx(-freqs[:5], rel=1e-12)
    x = np.linspace(-0.7, 1.4, 33)
    for up, down in zip(basis.plus, basis.minus):
        assert up.eval(x) == pytest.approx(down.eval(x), abs=1e-10)


@pytest.mark.parametrize("bc", [D, N])
def test_moving_modes_satisfy_boundary_conditions(bc):
    traj = dce_trajectory(variant=DceVariant.SHAKING, bc=bc, epsilon=0.05)
    t = 0.41
    basis = solve_instantaneous_basis(traj, FieldParams(), bc, t, 5)
    xm, xp = traj.positions(t)
    vm, vp = traj.velocities(t)
    for mode in basis.plus + basis.minus:
        w = mode.omega
        for x, v in ((xm, vm), (xp, vp)):
            psi = float(mode.eval(np.array([x]))[0])
            dpsi = float(mode.eval_deriv(np.array([x]))[0])
            if bc is D:
                residual = w * psi + v * dpsi
            else:
                residual = dpsi + w * v * psi
            assert abs(residual) < 1e-9 * max(abs(w), 1.0)


def test_custom_norm_orthonormality_moving():
    traj = dce_trajectory(variant=DceVariant.BREATHING, epsilon=0.05)
    t = 0.3
    params = FieldParams()
    basis = solve_instantaneous_basis(traj, params, D, t, 6)
    xm, xp = traj.positions(t)
    from movingcavity.staticmodes import gauss_legendre

    nodes, weights = gauss_legendre(xm, xp, 96)
    modes = basis.plus
    vals = np.array([m.eval(nodes) for m in modes])
    derivs = np.array([m.eval_deriv(nodes) for m in modes])
    omegas = np.array([m.omega for m in modes])
    gram = (np.add.outer(np.zeros(6), np.zeros(6)))
    quad0 = (vals * weights) @ vals.T
    quad1 = (derivs * weights) @ derivs.T
    gram = (basis.f_term + np.multiply.outer(omegas, omegas)) * quad0 + quad1
    target = np.diag(np.abs(omegas))
    assert np.max(np.abs(gram - target)) < 1e-10


def test_massive_neumann_contraction_has_evanescent_mode():
    # walls moving toward each other make the lowest pair evanescent
    traj = BoundaryTrajectory(
        lambda t: -1.0 + 0.2 * t, lambda t: 1.0 - 0.2 * t,
        v_minus=lambda t: 0.2, v_plus=lambda t: -0.2,
    )
    basis = solve_instantaneous_basis(traj, FieldParams(mass=1.5), N, 0.0, 4)
    lowest = basis.plus[0]
    assert abs(lowest.omega) < 1.5
    assert lowest.lam < 0
    assert lowest.evanescent
    dpsi = float(lowest.eval_deriv(np.array([1.0]))[0])
    psi = float(lowest.eval(np.array([1.0]))[0])
    assert dpsi + lowest.omega * (-0.2) * psi == pytest.approx(0.0, abs=1e-10)


def test_frequencies_never_reach_zero():
    traj = dce_trajectory(variant=DceVariant.SHAKING, epsilon=0.08)
    for t in np.linspace(0.0, 2.0, 9):
        basis = solve_instantaneous_basis(traj, FieldParams(), D, float(t), 4)
        assert np.min(np.abs(basis.frequencies)) > 0.1


# ---------------------------------------------------------------------------
# generator


def test_static_generator_is_diagonal_frequency_matrix():
    traj = BoundaryTrajectory.static(0.0, math.pi)
    vhat = assemble_vhat(traj, FieldParams(), D, 0.0, 1e-4, 5)
    gen = generator_matrix(vhat)
    freqs = solve_instantaneous_basis(
        traj, FieldParams(), D, 0.0, 5
    ).frequencies
    assert np.max(np.abs(gen - 1j * np.diag(freqs))) < 1e-9


def test_mode_transform_matrix_is_unitary():
    m = mode_transform_matrix(4)
    assert np.allclose(m @ m.conj().T, np.eye(8), atol=1e-14)


# ---------------------------------------------------------------------------
# evolution


def test_static_trajectory_gives_pure_phases():
    traj = BoundaryTrajectory.static(0.0, math.pi)
    state = evolve_transformation(traj, FieldParams(), D, 0.0, 2.0, 4)
    assert np.max(np.abs(state.beta)) < 1e-9
    freqs = solve_instantaneous_basis(
        traj, FieldParams(), D, 0.0, 4
    ).frequencies[:4]
    expected = np.diag(np.exp(1j * freqs * 2.0))
    # fixed-step RK4 phase error dominates the deviation
    assert np.max(np.abs(state.alpha - expected)) < 2e-5


def test_identity_preserved_and_checkpoints_recorded():
    # pick a window whose ends are instants of zero wall velocity: there
    # the instantaneous basis is exactly orthonormal and the Bogoliubov
    # identities hold to integrator accuracy
    traj = dce_trajectory(epsilon=1e-3, drive=3.0)
    t0, tf = math.pi / 6.0, math.pi / 2.0
    state = evolve_transformation(
        traj, FieldParams(), D, t0, tf, 4,
        checkpoint_times=(0.8, 1.2),
    )
    assert bogoliubov_identity_residual(state) < 5e-5
    times = [t for t, _ in state.checkpoints]
    assert times == pytest.approx([0.8, 1.2], abs=0.05)
    for _, u in state.checkpoints:
        assert u.shape == (8, 8)


def test_absorb_phases_matches_plain_evolution():
    traj = dce_trajectory(epsilon=1e-3)
    plain = evolve_transformation(
        traj, FieldParams(), D, 0.0, 2.0, 4, step=0.01
    )
    rotated = evolve_transformation(
        traj, FieldParams(), D, 0.0, 2.0, 4, step=0.01, absorb_phases=True
    )
    assert np.max(np.abs(plain.U - rotated.U)) < 1e-6


def test_oversized_step_raises_stability_error():
    traj = dce_trajectory(epsilon=1e-3)
    with pytest.raises(StabilityError):
        evolve_transformation(traj, FieldParams(), D, 0.0, 2.0, 4, step=1.0)


def test_resonant_pair_creation_robust_to_truncation():
    traj = dce_trajectory(epsilon=1e-3, drive=3.0)
    kwargs = dict(step=0.02, dt_fd=2e-3)
    small = evolve_transformation(traj, FieldParams(), D, 0.0, 8.0, 4, **kwargs)
    large = evolve_transformation(traj, FieldParams(), D, 0.0, 8.0, 8, **kwargs)
    b_small = abs(small.beta[0, 1])
    b_large = abs(large.beta[0, 1])
    assert b_small == pytest.approx(b_large, rel=0.01)
