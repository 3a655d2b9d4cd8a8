import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hermproj.errors import DomainError, InputError, SingularityError
from hermproj.mehler import mehler_phase
from hermproj.phase import (Q_of, S_c, aligned_pair, d2P_ds2, d2P_ds2_expanded, discriminant_D,
                            discriminant_D_angle, dP_ds, fd_grad, fd_step, hessian_band_check,
                            identity_suite, mixed_hessian, mixed_hessian_dets, one_minus_cos_Sc,
                            perturbed_aligned_pairs, phase_P, phase_state, random_rotation,
                            richardson_derivative, sample_admissible, tau_pm)

coord = st.floats(-2, 2, allow_nan=False)
vec3 = st.lists(coord, min_size=3, max_size=3).map(np.array)


@pytest.fixture(scope="module")
def admissible():
    rng = np.random.default_rng(11)
    return sample_admissible(1000, 3, rng)


def test_P_examples():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x, y = rng.normal(size=3), rng.normal(size=3)
        s = rng.uniform(0.1, 3.0)
        assert float(phase_P(x, y, s)) == pytest.approx(mehler_phase(1, x, y, s), rel=1e-13)
        assert float(phase_P(x, y, math.pi / 2)) == pytest.approx(math.pi / 4 - x @ y, abs=1e-14)
        U = random_rotation(3, rng)
        assert float(phase_P(U @ x, U @ y, s)) == pytest.approx(float(phase_P(x, y, s)), rel=1e-12)


def test_P_singular():
    with pytest.raises(SingularityError):
        phase_P(np.ones(2), np.ones(2), 0.0)


def test_Q_and_D_examples():
    rng = np.random.default_rng(1)
    x, y = rng.normal(size=3), rng.normal(size=3)
    assert float(Q_of(x, y, x @ y)) == pytest.approx(-float(discriminant_D(x, y)), abs=1e-14)
    u = rng.normal(size=3)
    u /= np.linalg.norm(u)
    assert float(discriminant_D(u, u)) == pytest.approx(0.0, abs=1e-15)


def test_D_angle_form(admissible):
    X, Y, _, _ = admissible
    assert np.max(np.abs(discriminant_D(X, Y) - discriminant_D_angle(X, Y))) <= 1e-12
    rng = np.random.default_rng(2)
    A, B = rng.normal(size=(1000, 2)), rng.normal(size=(1000, 2))
    assert np.max(np.abs(discriminant_D(A, B) - discriminant_D_angle(A, B))) <= 1e-12


def test_tau_vieta_and_gap(admissible):
    X, Y, _, _ = admissible
    tp, tm = tau_pm(X, Y)
    xy = np.sum(X * Y, axis=1)
    s2 = np.sum(X * X + Y * Y, axis=1)
    assert np.max(np.abs(tp * tm - 1)) <= 1e-14
    assert np.max(np.abs((tp + tm) - s2 / xy) / (s2 / xy)) <= 1e-14
    a = np.linalg.norm(X + Y, axis=1)
    b = np.linalg.norm(X - Y, axis=1)
    assert np.max(np.abs(one_minus_cos_Sc(X, Y) - 2 * b / (a + b))) <= 1e-14
    assert np.all(tp >= 1.0) and np.all(np.abs(tm) < 1.0)


def test_tau_domain():
    with pytest.raises(DomainError):
        tau_pm(np.array([1.0, 0.0]), np.array([0.0, 1.0]))


def test_Sc_identities(admissible):
    X, Y, mu, mt = admissible
    sc = S_c(X, Y)
    tp, _ = tau_pm(X, Y)
    xy = np.sum(X * Y, axis=1)
    a = np.linalg.norm(X + Y, axis=1)
    b = np.linalg.norm(X - Y, axis=1)
    np.testing.assert_allclose(tp - np.cos(sc), a * b / xy, rtol=1e-10)
    np.testing.assert_allclose(tp - np.cos(sc), np.sin(sc) ** 2 / np.cos(sc), rtol=1e-10)
    assert np.all((sc > 0) & (sc < math.pi / 2))
    assert np.array_equal(S_c(Y, X), sc)
    ratio = sc / np.sqrt(b)
    assert ratio.min() >= 0.5 and ratio.max() <= 3.0


def test_Sc_domain():
    with pytest.raises(DomainError):
        S_c(np.array([1.0, 0.0]), np.array([-0.5, 0.1]))


def test_d2P_vanishes_at_Sc(admissible):
    X, Y, _, _ = admissible
    sc = S_c(X, Y)
    assert np.max(np.abs(d2P_ds2(X, Y, sc))) <= 1e-12 * np.max(np.abs(d2P_ds2(X, Y, 0.5 * sc)))
    stationary = dP_ds(X, Y, sc) * 2 * np.sin(sc) ** 2 + Q_of(X, Y, np.cos(sc))
    assert np.max(np.abs(stationary)) <= 1e-12


def test_d2P_sign_below_Sc(admissible):
    X, Y, _, _ = admissible
    sc = S_c(X, Y)
    s = 0.9 * sc
    tp, _ = tau_pm(X, Y)
    xy = np.sum(X * Y, axis=1)
    product = -xy * (tp - np.cos(s)) * (np.cos(sc) - np.cos(s)) / np.sin(s) ** 3
    assert np.all(np.sign(d2P_ds2(X, Y, s)) == np.sign(product))


@given(vec3, vec3, st.floats(0.05, math.pi - 0.05))
@settings(max_examples=100, deadline=None)
def test_d2P_factored_matches_expanded(x, y, s):
    if abs(x @ y) < 1e-3:
        return
    a = float(d2P_ds2(x, y, s))
    b = float(d2P_ds2_expanded(x, y, s))
    scale = (x @ x + y @ y + abs(x @ y)) / math.sin(s) ** 3
    assert abs(a - b) <= 1e-11 * scale


def test_derivatives_against_richardson(admissible):
    X, Y, _, _ = admissible
    rng = np.random.default_rng(3)
    s = rng.uniform(0.1, math.pi - 0.1, X.shape[0])
    h = fd_step(1.0)
    fd1 = richardson_derivative(lambda t: phase_P(X, Y, t), s, h)
    fd2 = richardson_derivative(lambda t: dP_ds(X, Y, t), s, h)
    an1, an2 = dP_ds(X, Y, s), d2P_ds2(X, Y, s)
    s2 = np.sum(X * X + Y * Y, axis=1)
    xy = np.sum(X * Y, axis=1)
    sc1 = 0.5 + 0.5 * s2 / np.sin(s) ** 2 + np.abs(xy * np.cos(s)) / np.sin(s) ** 2
    sc2 = (s2 * np.abs(np.cos(s)) + np.abs(xy) * (1 + np.cos(s) ** 2)) / np.abs(np.sin(s)) ** 3
    assert np.max(np.abs(fd1 - an1) / sc1) <= 1e-6
    assert np.max(np.abs(fd2 - an2) / sc2) <= 1e-6


def test_grad_Sc_against_fd(admissible):
    from hermproj.phase import grad_Sc

    X, Y, _, _ = admissible
    gx, gy = grad_Sc(X, Y)
    h = fd_step(np.linalg.norm(X - Y, axis=1))
    fx = fd_grad(lambda z: S_c(z, Y), X, h)
    fy = fd_grad(lambda z: S_c(X, z), Y, h)
    assert np.max(np.linalg.norm(gx - fx, axis=1) / np.linalg.norm(gx, axis=1)) <= 1e-6
    assert np.max(np.linalg.norm(gy - fy, axis=1) / np.linalg.norm(gy, axis=1)) <= 1e-6


def test_grad_Sc_symmetries(admissible):
    from hermproj.phase import grad_Sc

    X, Y, _, _ = admissible
    gx, gy = grad_Sc(X, Y)
    hx, _ = grad_Sc(Y, X)
    np.testing.assert_allclose(gy, hx, rtol=1e-13, atol=1e-13)
    U = random_rotation(3, np.random.default_rng(4))
    rx, _ = grad_Sc(X @ U.T, Y @ U.T)
    np.testing.assert_allclose(rx, gx @ U.T, rtol=1e-9, atol=1e-9)


def test_Q_root_at_tau_minus_only_on_zero_discriminant():
    x, y = aligned_pair(2 ** -4, 2 ** -8, h_frac=1.0)
    assert abs(float(discriminant_D(x, y))) < 1e-15
    _, tm = tau_pm(x, y)
    assert abs(float(Q_of(x, y, tm))) < 1e-14
    # off the curve D = 0 neither root of R is a root of Q
    x, y = aligned_pair(2 ** -4, 2 ** -8, h_frac=0.8)
    tp, tm = tau_pm(x, y)
    assert abs(float(Q_of(x, y, tm))) > 1e-6
    assert abs(float(Q_of(x, y, tp))) > 1e-3


def test_phase_state():
    x, y = aligned_pair(2 ** -4, 2 ** -6)
    st_ = phase_state(x, y, 0.7)
    assert st_.tau_plus * st_.tau_minus == pytest.approx(1.0, abs=1e-14)
    assert math.cos(st_.S_c) == pytest.approx(st_.tau_minus, abs=1e-14)
    with pytest.raises(InputError):
        phase_state(x, y, 4.0)
    flagged = phase_state(np.array([0.1, 0.0]), np.array([2.0, 1.5]), 1.0)
    assert flagged.D < 0 and not flagged.q_roots_real


def test_suite_passes():
    report = identity_suite(200, seed=5)
    assert all(v["passed"] for v in report.values()), report
    with pytest.raises(InputError):
        identity_suite(0)


# ---------------------------------------------------------------- mixed Hessian


def test_mixed_hessian_pinned_values():
    x, y = aligned_pair(2 ** -4, 2 ** -8)
    full, minor = mixed_hessian_dets(x, y, 2 ** -7)
    assert 0.2 <= minor <= 5
    assert 0.05 <= full / (2 ** -8 / 2 ** -4) <= 20


def test_mixed_hessian_rotation_invariance():
    rng = np.random.default_rng(6)
    x, y = aligned_pair(2 ** -4, 2 ** -6)
    full, _ = mixed_hessian_dets(x, y, 2 ** -7, 0.6)
    for _ in range(5):
        U = random_rotation(3, rng)
        # finite-difference accuracy of a determinant of size mu_tilde / mu
        assert mixed_hessian_dets(U @ x, U @ y, 2 ** -7, 0.6)[0] == pytest.approx(full, rel=1e-4)


def test_fd_mixed_hessian_on_fixed_time_phase():
    from hermproj.phase import fd_mixed_hessian

    # at a fixed time t, d_x d_y^T P = -csc(t) I exactly
    x, y = aligned_pair(2 ** -4, 2 ** -6)
    t = 0.8
    H = fd_mixed_hessian(lambda a, b: float(phase_P(a, b, t)), x, y, 1e-3)
    np.testing.assert_allclose(-math.sin(t) * H, np.eye(3), atol=1e-8)


def test_mixed_hessian_validation():
    x, y = aligned_pair(2 ** -4, 2 ** -6)
    with pytest.raises(InputError):
        mixed_hessian(x, y, 2 ** -7, s=0.1)
    with pytest.raises(InputError):
        mixed_hessian(x, y, 2.0)
    with pytest.raises(DomainError):
        mixed_hessian(x, -y, 2 ** -7)
    with pytest.raises(DomainError):
        mixed_hessian(x, x, 2 ** -7)


def test_perturbed_pairs_are_admissible():
    rng = np.random.default_rng(7)
    mu, mt = 2 ** -4, 2 ** -8
    for x, y, s in perturbed_aligned_pairs(mu, mt, 50, rng):
        assert mu <= 1 - np.linalg.norm(x) <= 2 * mu + 1e-15
        # rho is a coordinate of y; |y| stays comparable to the shell
        assert 0.5 * mt <= 1 - np.linalg.norm(y) <= 2 * mt + 1e-15
        assert x @ y > 0 and 0.25 <= abs(s) <= 1


def test_hessian_bands():
    report = hessian_band_check(40, seed=1)
    assert report["passed"], report
