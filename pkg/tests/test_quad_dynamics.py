import numpy as np
import pytest

from tomoprop.errors import RangeError, StepError, SupportError, TimeError
from tomoprop.grids import TomogramGrid
from tomoprop.states import make_vacuum
from tomoprop import quad_dynamics as qd
from tomoprop import transforms as tr


def mathieu(force=0.0):
    return qd.QuadraticHamiltonian(
        qd.CosineSampler(1.0, 0.2, 2.0), qd.ConstantSampler(force)
    )


# ----------------------------------------------------------------- samplers

def test_constant_sampler():
    s = qd.ConstantSampler(2.0)
    assert s(0.3) == 2.0
    np.testing.assert_array_equal(s(np.array([0.0, 1.0])), [2.0, 2.0])
    assert s.upper_bound() == 2.0
    assert s.shifted(5.0)(0.0) == 2.0


def test_cosine_sampler():
    s = qd.CosineSampler(1.0, 0.2, 2.0)
    assert s(0.0) == pytest.approx(1.2)
    assert s(np.pi / 2) == pytest.approx(0.8)
    assert s.upper_bound() == pytest.approx(1.2)
    sh = s.shifted(0.7)
    for t in (0.0, 0.4, 1.1):
        assert sh(t) == pytest.approx(s(t + 0.7), abs=1e-14)


def test_table_sampler_interpolates():
    s = qd.TableSampler(np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0, 0.0]))
    assert s(0.5) == pytest.approx(1.0)
    assert s(1.5) == pytest.approx(1.0)
    assert s.upper_bound() == 2.0
    assert s.shifted(1.0)(0.0) == pytest.approx(2.0)
    with pytest.raises(RangeError):
        s(2.5)
    with pytest.raises(RangeError):
        s(-0.1)


def test_table_sampler_rejects_bad_tables():
    with pytest.raises(ValueError):
        qd.TableSampler(np.array([0.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        qd.TableSampler(np.array([0.0, 0.0]), np.array([1.0, 2.0]))


# ----------------------------------------------------------- epsilon solver

def test_free_epsilon_is_linear():
    traj = qd.solve_epsilon(qd.QuadraticHamiltonian.free(), 2.0)
    ref = 1.0 + 1j * traj.times
    assert np.abs(traj.eps - ref).max() < 1e-12
    assert np.abs(traj.eps_dot - 1j).max() < 1e-12
    assert np.abs(traj.beta).max() == 0.0


def test_harmonic_epsilon_is_phase():
    traj = qd.solve_epsilon(qd.QuadraticHamiltonian.harmonic(), np.pi)
    ref = np.exp(1j * traj.times)
    assert np.abs(traj.eps - ref).max() < 1e-11
    assert np.abs(traj.eps_dot - 1j * ref).max() < 1e-11


def test_forced_oscillator_beta_closed_form():
    # omega^2 = 1, constant f: beta(t) = -(f / sqrt(2)) (e^{it} - 1).
    f = 0.3
    H = qd.QuadraticHamiltonian(qd.ConstantSampler(1.0), qd.ConstantSampler(f))
    traj = qd.solve_epsilon(H, 2.0)
    ref = -(f / np.sqrt(2.0)) * (np.exp(1j * traj.times) - 1.0)
    assert np.abs(traj.beta - ref).max() < 1e-11


def test_wronskian_conserved_over_long_run():
    traj = qd.solve_epsilon(mathieu(), 10.0)
    wr = 2.0 * np.imag(traj.eps_dot * np.conj(traj.eps))
    assert np.abs(wr - 2.0).max() < 1e-12


def test_epsilon_step_consistency():
    a = qd.solve_epsilon(mathieu(), 1.0, dt=1e-3)
    b = qd.solve_epsilon(mathieu(), 1.0, dt=5e-4)
    assert abs(a.eps[-1] - b.eps[-1]) < 1e-11


def test_solver_guards():
    with pytest.raises(TimeError):
        qd.solve_epsilon(qd.QuadraticHamiltonian.free(), -1.0)
    with pytest.raises(StepError):
        qd.solve_epsilon(qd.QuadraticHamiltonian.harmonic(), 1.0, dt=0.0)
    # dt cap scales with the stiffness: sup omega_sq = 1.2 lowers it.
    with pytest.raises(StepError):
        qd.solve_epsilon(mathieu(), 1.0, dt=1e-2)
    qd.solve_epsilon(mathieu(), 1.0, dt=1e-2 / 1.2)


def test_zero_time_trajectory():
    traj = qd.solve_epsilon(mathieu(), 0.0)
    assert traj.times.size == 1
    assert traj.eps[0] == 1.0 + 0.0j
    assert traj.final_time == 0.0


# --------------------------------------------------------- motion integrals

def test_motion_integrals_free():
    traj = qd.solve_epsilon(qd.QuadraticHamiltonian.free(), 1.0)
    mi = qd.motion_integrals(traj, 1.0)
    # eps = 1 + it: the map subtracts p t from q and leaves p alone.
    np.testing.assert_allclose(mi.lambda_mat, [[1.0, 0.0], [-1.0, 1.0]], atol=1e-12)
    np.testing.assert_allclose(mi.delta, 0.0, atol=1e-14)


def test_motion_integrals_harmonic_rotation():
    traj = qd.solve_epsilon(qd.QuadraticHamiltonian.harmonic(), 2.0)
    t = 0.773
    mi = qd.motion_integrals(traj, t)
    c, s = np.cos(t), np.sin(t)
    np.testing.assert_allclose(mi.lambda_mat, [[c, s], [-s, c]], atol=1e-6)


def test_motion_integrals_annihilate_classical_trajectory():
    # Lambda (p, q)(t) + Delta = (p, q)(0) pins the Delta sign: launch from
    # the origin, where the whole motion is force-driven.
    from tomoprop.oracles import classical_trajectory

    H = qd.QuadraticHamiltonian(qd.ConstantSampler(1.0), qd.ConstantSampler(0.3))
    traj = qd.solve_epsilon(H, 2.0)
    cl = classical_trajectory(H, 0.0, 0.0, np.array([0.5, 1.0, 2.0]))
    for i, t in enumerate(cl.times):
        mi = qd.motion_integrals(traj, float(t))
        back = mi.lambda_mat @ np.array([cl.p_cl[i], cl.q_cl[i]]) + mi.delta
        np.testing.assert_allclose(back, 0.0, atol=1e-9)


def test_motion_integrals_interpolation_and_projection():
    traj = qd.solve_epsilon(mathieu(), 1.0)
    # Off-node times: linear interpolation leaves an O(dt^2) raw determinant
    # defect which the projection removes from the returned matrix.
    mi = qd.motion_integrals(traj, 0.5 + 3.3e-4)
    lam = mi.lambda_mat
    det = lam[0, 0] * lam[1, 1] - lam[0, 1] * lam[1, 0]
    assert abs(det - 1.0) < 1e-12
    assert 0.0 < mi.det_defect < 1e-6
    # On-node times need no interpolation at all.
    mi_node = qd.motion_integrals(traj, 0.5)
    assert mi_node.det_defect < 1e-12


def test_motion_integrals_range_guard():
    traj = qd.solve_epsilon(mathieu(), 1.0)
    with pytest.raises(RangeError):
        qd.motion_integrals(traj, 1.5)
    with pytest.raises(RangeError):
        qd.motion_integrals(traj, -0.5)


# ------------------------------------------------------------- optical maps

def test_optical_map_rejects_nonsymplectic():
    mi = qd.MotionIntegrals(time=1.0, lambda_mat=np.diag([1.1, 1.0]), delta=np.zeros(2))
    with pytest.raises(StepError):
        qd.optical_map(mi)


def test_map_backward_interval_rejected():
    with pytest.raises(TimeError):
        qd.OpticalAffineMap(np.eye(2), np.zeros(2), t_from=1.0, t_to=0.5)


def test_harmonic_map_is_pure_rotation(tgrid):
    t = np.pi / 5
    traj = qd.solve_epsilon(qd.QuadraticHamiltonian.harmonic(), t)
    m = qd.optical_map(qd.motion_integrals(traj, t))
    X0, theta0, weight = m.map_points(tgrid.xs, tgrid.thetas[:, None])
    np.testing.assert_allclose(weight, 1.0, atol=1e-10)
    # Rotation shifts theta by t (mod pi with the twisted X flip).
    shifted = tgrid.thetas[:, None] + t
    fold = shifted >= np.pi
    expect_theta = np.where(fold, shifted - np.pi, shifted)
    expect_X = np.where(fold, -tgrid.xs[None, :], tgrid.xs[None, :])
    np.testing.assert_allclose(theta0, np.broadcast_to(expect_theta, theta0.shape), atol=1e-9)
    np.testing.assert_allclose(X0, np.broadcast_to(expect_X, X0.shape), atol=1e-9)


def test_free_map_scales_rows(tgrid):
    traj = qd.solve_epsilon(qd.QuadraticHamiltonian.free(), 1.0)
    m = qd.optical_map(qd.motion_integrals(traj, 1.0))
    theta = tgrid.thetas
    X0, theta0, weight = m.map_points(1.0, theta)
    s, c = np.sin(theta), np.cos(theta)
    r = np.hypot(s + c, c)
    np.testing.assert_allclose(weight, 1.0 / r, atol=1e-9)
    np.testing.assert_allclose(np.abs(X0) * r, 1.0, atol=1e-9)


def test_compose_matches_one_step():
    H = mathieu(force=0.3)
    traj02 = qd.solve_epsilon(H, 2.0)
    m20 = qd.optical_map(qd.motion_integrals(traj02, 2.0))
    split = 0.75
    m10 = qd.optical_map(qd.motion_integrals(qd.solve_epsilon(H, split), split))
    tail = qd.solve_epsilon(H.shifted(split), 2.0 - split)
    m21 = qd.optical_map(qd.motion_integrals(tail, 2.0 - split), t_from=split)
    comp = qd.compose(m21, m10)
    assert comp.t_from == 0.0
    assert comp.t_to == pytest.approx(2.0)
    np.testing.assert_allclose(comp.lambda_mat, m20.lambda_mat, atol=1e-8)
    np.testing.assert_allclose(comp.delta, m20.delta, atol=1e-8)


def test_compose_rejects_gap():
    Ha = qd.QuadraticHamiltonian.harmonic()
    m1 = qd.optical_map(qd.motion_integrals(qd.solve_epsilon(Ha, 1.0), 1.0))
    m2 = qd.optical_map(qd.motion_integrals(qd.solve_epsilon(Ha, 1.0), 1.0), t_from=1.5)
    with pytest.raises(TimeError):
        qd.compose(m2, m1)


# --------------------------------------------------------- tomogram pushing

def test_harmonic_evolution_is_twisted_shift(coherent_tomogram, tgrid):
    # pi/3 is exactly 60 theta rows on the default grid, so the evolved
    # tomogram is a pure row shift through the twisted extension.
    t = np.pi / 3
    traj = qd.solve_epsilon(qd.QuadraticHamiltonian.harmonic(), t)
    m = qd.optical_map(qd.motion_integrals(traj, t))
    wt = qd.evolve_tomogram(coherent_tomogram, m)
    v = coherent_tomogram.values
    ref = np.vstack([v[60:], v[:60, ::-1]])
    assert np.abs(wt.values - ref).max() < 1e-12


def test_evolution_conserves_row_norms(coherent_pure_tomogram):
    traj = qd.solve_epsilon(mathieu(), 1.0)
    m = qd.optical_map(qd.motion_integrals(traj, 1.0))
    wt = qd.evolve_tomogram(coherent_pure_tomogram, m)
    assert np.abs(wt.row_norms() - 1.0).max() < 1e-4
    assert wt.values.min() >= 0.0


def test_evolution_support_guard():
    tg = TomogramGrid(x_max=4.0, n_x=128, n_theta=45)
    w0 = tr.tomogram_from_wavefunction(make_vacuum(), tg)
    traj = qd.solve_epsilon(qd.QuadraticHamiltonian.free(), 3.0)
    m = qd.optical_map(qd.motion_integrals(traj, 3.0))
    with pytest.raises(SupportError):
        qd.evolve_tomogram(w0, m)


def test_evolve_cubic_allows_small_undershoot(coherent_tomogram):
    traj = qd.solve_epsilon(qd.QuadraticHamiltonian.free(), 0.5)
    m = qd.optical_map(qd.motion_integrals(traj, 0.5))
    wt = qd.evolve_tomogram(coherent_tomogram, m, interp="cubic")
    assert wt.values.min() > -1e-6
