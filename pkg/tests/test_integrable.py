import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from suslov.dynamics import FullState, FullSystem, ReducedState, ReducedSystem, integrate, reduced_rhs
from suslov.integrable import (
    angle_periods,
    classify_topology,
    closure_return,
    coordinate_function,
    count_level_set_components,
    fi_function,
    h_star,
    h_star_function,
    integrals_fi,
    integrals_fij,
    kappa,
    kharlamova_exit_points,
    kt_angles,
    kt_frequencies,
    momentum_function,
    pendulum_period,
    planarity_distance,
    poisson_bracket,
    sigma_residual,
    spherical_pendulum_residual,
)
from suslov.liealg import InertiaSpec
from suslov.potentials import Potential
from suslov.reduction import propagate_el2

I3 = InertiaSpec.physical((1.0, 2.0, 3.0))
I4 = InertiaSpec.physical((1.0, 2.0, 3.0, 4.0))


def test_h_star_vanishes_at_origin():
    pot = Potential.combined([1.0, 2.0, 3.0], [5.0, 4.0, 3.0, 1.0])
    assert h_star(np.zeros(3), np.zeros(3), I4, pot) == 0.0


def test_h_star_requires_physical_inertia():
    with pytest.raises(ValueError):
        h_star(np.zeros(2), np.zeros(2), InertiaSpec.block(np.eye(2)), Potential.zero(3))


def test_fi_special_cases():
    q, p = np.array([0.3, -0.2]), np.array([1.0, 2.0])
    C = np.array([0.5, -1.5])
    m = np.array([4.0, 5.0])
    np.testing.assert_allclose(integrals_fi(q, p, I3, Potential.kharlamova(C)), p ** 2 + 2 * C * m * q)
    np.testing.assert_allclose(integrals_fi(np.zeros(2), p, I3, Potential.klebsh_tisserand([5, 3, 1])), p ** 2)
    # full-length q is accepted and its last entry ignored
    np.testing.assert_allclose(integrals_fi(np.append(q, 0.9), p, I3, Potential.kharlamova(C)),
                               integrals_fi(q, p, I3, Potential.kharlamova(C)))


def test_fi_rejects_lagrange_potential():
    with pytest.raises(ValueError):
        integrals_fi(np.zeros(2), np.zeros(2), I3, Potential.lagrange_top(1.0, 3))


def test_canonical_bracket():
    q, p = np.array([0.1, 0.2]), np.array([0.3, 0.4])
    assert poisson_bracket(coordinate_function(0, 2), momentum_function(0, 2), q, p) == 1.0
    assert poisson_bracket(coordinate_function(0, 2), momentum_function(1, 2), q, p) == 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 6), st.integers(0, 2**32 - 1))
def test_integrals_commute(n, seed):
    rng = np.random.default_rng(seed)
    inertia = InertiaSpec.physical(rng.uniform(0.5, 3, size=n))
    pot = Potential.combined(rng.normal(size=n - 1), rng.uniform(0, 5, size=n))
    q, p = rng.uniform(-1, 1, n - 1), rng.normal(size=n - 1)
    H = h_star_function(inertia, pot)
    fs = [fi_function(i, inertia, pot) for i in range(n - 1)]
    for F in fs:
        assert abs(poisson_bracket(F, H, q, p)) < 1e-12
        for G in fs:
            assert abs(poisson_bracket(F, G, q, p)) < 1e-12


def test_h_star_is_weighted_sum_of_integrals():
    rng = np.random.default_rng(0)
    pot = Potential.combined(rng.normal(size=3), [5.0, 4.0, 3.0, 1.0])
    q, p = rng.uniform(-0.5, 0.5, 3), rng.normal(size=3)
    f = integrals_fi(q, p, I4, pot)
    assert h_star(q, p, I4, pot) == pytest.approx(0.5 * np.sum(f / np.diag(I4.J)), abs=1e-14)


def test_fi_conserved_along_reduced_flow():
    rng = np.random.default_rng(1)
    pot = Potential.combined(rng.normal(size=3), [5.0, 4.0, 3.0, 1.0])
    s0 = ReducedState.normalized(rng.normal(size=4), rng.normal(size=3))
    traj = integrate(ReducedSystem(I4, pot), s0, 1e-3, 20000, record_every=100)
    f = np.array([integrals_fi(s.q, s.p, I4, pot) for s in traj.states])
    assert (np.abs(f - f[0]).max(axis=0) / np.abs(f[0])).max() < 1e-6


def test_frequency_example():
    np.testing.assert_allclose(kt_frequencies(I3, [5.0, 3.0, 1.0]), [1.0, math.sqrt(0.4)], rtol=1e-15)
    np.testing.assert_allclose(kappa(I3, [5.0, 3.0, 1.0]), [16.0, 10.0])
    with pytest.raises(ValueError):
        kt_frequencies(I3, [1.0, 3.0, 2.0])


def test_angles_zero_at_turning_point():
    pot = Potential.klebsh_tisserand([5.0, 3.0, 1.0])
    c = np.array([0.7, 0.2])
    angles = kt_angles(np.zeros(2), np.sqrt(c), I3, pot)
    np.testing.assert_array_equal(angles.phi, 0)
    np.testing.assert_allclose(angles.c, c)
    assert not angles.degenerate.any()
    assert kt_angles(np.zeros(2), np.array([1.0, 0.0]), I3, pot).degenerate.tolist() == [False, True]


def test_angles_advance_uniformly_in_tau():
    pot = Potential.klebsh_tisserand([5.0, 3.0, 1.0])
    q0, p0 = np.array([0.2, -0.1]), np.array([1.0, 0.5])
    traj = propagate_el2(q0, p0, 1, I3, pot, 1e-3, 5000, record_every=100)
    a0 = kt_angles(q0, p0, I3, pot)
    for tau, s in zip(traj.tau, traj.states):
        d = kt_angles(s.q, s.p, I3, pot).phi - a0.phi - a0.omega * tau
        assert np.abs(np.angle(np.exp(1j * d))).max() < 1e-6


def test_angle_periods_of_clean_signal():
    t = np.linspace(0, 50, 20001)
    phi = np.column_stack([1.3 * t + 0.2, 0.4 * t])
    np.testing.assert_allclose(angle_periods(t, phi), 2 * np.pi / np.array([1.3, 0.4]), rtol=1e-6)
    assert np.isnan(angle_periods(t[:10], phi[:10])).all()


def test_classify_examples():
    k = kappa(I3, [5.0, 3.0, 1.0])
    got = classify_topology(0.3 * k, k)
    assert (got.tag, got.l) == ("InteriorTori", 2)
    got = classify_topology(2 * k, k)
    assert (got.tag, got.count) == ("SpheresDisjoint", 4)
    got = classify_topology(0.8 * k, k)
    assert got.tag == "HandledSurfaceCase_i"
    assert "five handles" in got.note
    got = classify_topology(np.array([1.5, 0.5]) * k, k)
    assert (got.tag, got.torus_dim) == ("CylinderToriCase_iii", 2)


def test_classify_lower_dimensional_tori():
    got = classify_topology(np.array([0.3, 0.0, 0.2]), np.ones(3))
    assert (got.tag, got.l) == ("InteriorTori", 2)


@pytest.mark.parametrize("ratios, reason", [
    ((1.0, 0.5), "equals kappa"),
    ((0.5, 0.5), "equals 1"),
    ((2.0, 2.0, 0.5), "unmatched"),
    ((-0.1, 0.2), "negative"),
])
def test_classify_degenerate(ratios, reason):
    got = classify_topology(np.array(ratios), np.ones(len(ratios)))
    assert got.tag == "Degenerate"
    assert reason in got.reason


def test_classify_rejects_bad_kappa():
    with pytest.raises(ValueError):
        classify_topology([0.1, 0.1], [1.0, 0.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.0, 3.0), min_size=2, max_size=4), st.floats(1e-3, 1e3))
def test_classify_is_scale_invariant(ratios, scale):
    r = np.array(ratios)
    assume(np.abs(r - 1).min() > 1e-6 and abs(r.sum() - 1) > 1e-6 and np.abs(r).min() > 1e-6)
    k = np.linspace(1.0, 3.0, r.size)
    assert classify_topology(r * k, k).tag == classify_topology(r * k * scale, k * scale).tag


@pytest.mark.parametrize("ratios, expected", [((2.0, 2.5), 4), ((0.3, 0.3), 2), ((0.8, 0.8), 1),
                                              ((1.5, 0.5), 2)])
def test_level_set_components(ratios, expected):
    k = np.array([16.0, 10.0])
    assert count_level_set_components(np.array(ratios) * k, k, rng=np.random.default_rng(0)) == expected


def test_sigma_residual_examples():
    pot = Potential.kharlamova([1.0, 2.0, 3.0])
    rng = np.random.default_rng(2)
    assert sigma_residual(rng.normal(size=4), rng.normal(size=3), I4, pot)[2] == 0.0
    p = np.array([0.0, 1.0, -2.0])
    assert sigma_residual(np.array([1.0, 0, 0, 0]), p, I4, pot) == (0.0, 0.0, 0.0)
    assert sigma_residual(np.array([1.0, 0, 0, 0]), p, I4, Potential.lagrange_top(1.0, 4))[2] == 1.0


def test_sigma_members_are_equilibria():
    rng = np.random.default_rng(3)
    pot = Potential.combined(rng.normal(size=3), [5.0, 4.0, 3.0, 1.0])
    for _ in range(50):
        x = rng.normal(size=3)
        x /= np.linalg.norm(x)
        p = rng.normal(size=3)
        p -= (I4.A @ p) @ x / (x @ I4.A @ x) * x
        q = np.append(x, 0.0)
        assert max(sigma_residual(q, p, I4, pot)) < 1e-14
        qd, pd = reduced_rhs(ReducedState(q, p), I4, pot)
        assert np.abs(np.concatenate([qd, pd])).max() < 1e-12


def test_fij_examples():
    q = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(integrals_fij(q, 2.5 * q), 0)
    f = integrals_fij(q, np.array([0.0, 1.0, 0.0]))
    np.testing.assert_array_equal(f, -f.T)


def test_lagrange_integrals_and_planarity():
    inertia = InertiaSpec.physical((1.0, 1.0, 1.0, 2.0))
    pot = Potential.lagrange_top(1.5, 4)
    rng = np.random.default_rng(4)
    s0 = ReducedState.normalized(rng.normal(size=4), rng.normal(size=3))
    traj = integrate(ReducedSystem(inertia, pot), s0, 1e-3, 10000, record_every=20)
    f = np.array([integrals_fij(s.q, s.p) for s in traj.states])
    assert np.abs(f - f[0]).max() < 1e-8
    qs = np.array([s.q[:-1] for s in traj.states])
    assert planarity_distance(qs, s0.q[:-1], inertia.A @ s0.p) < 1e-8


def test_pendulum_at_rest_at_pole():
    inertia = InertiaSpec.physical((1.0, 1.0, 1.0, 2.0))
    g = np.diag([1.0, 1.0, -1.0, -1.0])  # body axis E_n points down
    traj = integrate(FullSystem(inertia, Potential.lagrange_top(1.5, 4)), FullState(g, np.zeros(3)), 1e-3, 100)
    assert spherical_pendulum_residual(traj, inertia, 1.5) < 1e-12


def test_pendulum_residual_generic():
    inertia = InertiaSpec.physical((1.0, 1.0, 1.0, 2.0))
    rng = np.random.default_rng(5)
    from suslov.dynamics import reduced_to_full

    s0 = reduced_to_full(ReducedState.normalized(rng.normal(size=4), rng.normal(size=3)), inertia)
    traj = integrate(FullSystem(inertia, Potential.lagrange_top(1.5, 4)), s0, 1e-3, 3000)
    assert spherical_pendulum_residual(traj, inertia, 1.5) < 1e-5
    # wrong gravity strength is detected
    assert spherical_pendulum_residual(traj, inertia, 3.0) > 1e-2


def test_pendulum_residual_needs_symmetric_top():
    s = FullState(np.eye(4), np.zeros(3))
    traj = integrate(FullSystem(I4, Potential.lagrange_top(1.0, 4)), s, 1e-3, 5)
    with pytest.raises(ValueError):
        spherical_pendulum_residual(traj, I4, 1.0)


def test_pendulum_period_small_amplitude_limit():
    assert pendulum_period(1e-6, 2.0, 3.0) == pytest.approx(2 * math.pi * math.sqrt(1.5), rel=1e-10)
    assert pendulum_period(2.0, 2.0, 3.0) > pendulum_period(1.0, 2.0, 3.0)


def test_kharlamova_exit_points_on_sphere():
    pot = Potential.kharlamova([0.7, -1.1])
    q = np.array([0.2, 0.1, math.sqrt(0.95)])
    exits = kharlamova_exit_points(q, np.array([0.5, 0.3]), I3, pot)
    assert [e["direction"] for e in exits] == [1, -1]
    for e in exits:
        assert e["q"] @ e["q"] == pytest.approx(1.0, abs=1e-12)


def test_kharlamova_closure_time_matches_quadrature():
    pot = Potential.kharlamova([0.8, -1.2])
    A = I3.A
    q = np.array([0.15, -0.1])
    s0 = ReducedState(np.append(q, math.sqrt(1 - q @ q)), np.array([0.4, 0.2]))
    out = closure_return(I3, pot, s0, 5e-3, 200.0)
    assert out["returned"] and out["distance"] < 1e-3

    exits = {e["direction"]: e["tau"] for e in kharlamova_exit_points(s0.q, s0.p, I3, pot)}
    a, b, c = q, A @ s0.p, -0.5 * A @ pot.C

    def dt_dtau(tau):
        x = a + b * tau + c * tau * tau
        return 1.0 / math.sqrt(max(1.0 - x @ x, 0.0))

    half, _ = quad(dt_dtau, exits[-1], exits[1], limit=200)
    # the lower-hemisphere arc mirrors the upper one, so one period is twice the arc time
    assert out["t_return"] == pytest.approx(2 * half, rel=1e-4)


def test_closure_reports_failure_when_too_short():
    pot = Potential.kharlamova([0.8, -1.2])
    s0 = ReducedState(np.array([0.15, -0.1, math.sqrt(1 - 0.0325)]), np.array([0.4, 0.2]))
    assert not closure_return(I3, pot, s0, 5e-3, 0.5)["returned"]
