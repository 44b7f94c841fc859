import numpy as np
import pytest

from homoclinic_gate.variational import (
    FrameError,
    abel_check,
    build_frame,
    check_asymptotics,
    check_dichotomy,
)


def test_initial_normalization(a1_frame):
    z0 = a1_frame.zeta(np.array(0.0))
    gp0 = a1_frame.gamma_prime(np.array(0.0))
    assert abs(z0 @ gp0) < 1e-14
    assert a1_frame.delta(np.array(0.0)) == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(z0, [1 / np.sqrt(2), 0.0], atol=1e-14)


def test_delta_constant_for_hamiltonian(a1_frame):
    assert np.ptp(a1_frame.delta_samples) < 1e-8
    assert a1_frame.diagnostics["abel_rel_error"] < 1e-8


def test_abel_non_hamiltonian_frame(modulated_frame):
    d = modulated_frame.diagnostics
    assert d["delta_spread"] > 0.1  # Delta genuinely varies
    assert d["abel_rel_error"] < 1e-6
    assert d["delta_edge_gap"] < 1e-4


def test_abel_check_linear_system():
    def A(t):
        return np.array([[np.sin(t), 1.0], [-0.5, 0.3 * np.cos(2 * t)]])

    assert abel_check(A, 6.0) < 1e-6


def test_zeta_solves_variational_equation(a1_frame):
    t = np.linspace(-10, 10, 41)
    lhs = np.einsum("nij,nj->ni", a1_frame.A(t), a1_frame.zeta(t))
    h = 1e-4
    rhs = (a1_frame.zeta(t + h) - a1_frame.zeta(t - h)) / (2 * h)
    np.testing.assert_allclose(rhs, lhs, rtol=1e-5, atol=1e-7)


def test_dichotomy_stable_under_window_doubling(a1_frame, a1_frame15):
    k15, k30 = a1_frame15.dichotomy_k, a1_frame.dichotomy_k
    assert np.isfinite(k15) and abs(k30 - k15) / k15 < 0.05


def test_dichotomy_wrong_rate_raises(a1_frame):
    with pytest.raises(FrameError):
        check_dichotomy(a1_frame, omega=2.0)


def test_asymptotic_ratios(a1_frame):
    rep = check_asymptotics(a1_frame)
    assert rep.converged
    assert rep.times[0] == 0.0
    assert np.all(np.linalg.norm(rep.zeta_ratio[1:], axis=1) > 0.1)


def test_window_shorter_than_decay_rejected(a1_system, orbit):
    with pytest.raises(ValueError, match="decay window"):
        build_frame(a1_system, orbit, T=5.0)


def test_transformed_frame(a1_frame):
    tf = a1_frame.transformed(2.0, 0.3)
    t = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(tf.delta(t), 2 * a1_frame.delta(t), rtol=1e-12)
    np.testing.assert_allclose(tf.zeta(t), 2 * a1_frame.zeta(t) + 0.3 * a1_frame.gamma_prime(t), rtol=1e-10)
    with pytest.raises(ValueError):
        a1_frame.transformed(0.0, 1.0)


def test_frame_csv(tmp_path, a1_frame15):
    path = tmp_path / "frame.csv"
    a1_frame15.to_csv(path, stride=100)
    rows = path.read_text().splitlines()
    assert rows[0] == "t,gp1,gp2,zeta1,zeta2,delta"
    assert len(rows) == 1 + len(a1_frame15.grid[::100])
