import numpy as np
import pytest

from releq.errors import DegenerateInertia
from releq.reduction import ReducedSystem
from releq.rotors import (
    CONTROLLED, FREE, RotorBodySystem, characteristic_period, growth_rate, hamiltonian_controlled,
    hamiltonian_free, integrate_reduced, legendre, reduced_system, to_universal,
)
from releq.stability import StabilityClass, classify
from releq.universal import QuadraticModel, enumerate_branches, minors_residual

M = QuadraticModel(3.0, 2.0, 1.0)


def free(Id, Ir=0.5, sigma=(0, 0, 0)):
    return RotorBodySystem(np.array(Id) + Ir, np.full(3, Ir), FREE, sigma=sigma)


def test_legendre_examples():
    mu, sig = legendre(np.eye(3), 0.5 * np.eye(3), [0, 0, 0], [0, 0, 0])
    assert np.all(mu == 0) and np.all(sig == 0)
    mu, sig = legendre(np.diag([2, 3, 4]), 0.5 * np.eye(3), [1, 0, 0], [0, 0, 0])
    assert np.array_equal(mu, [2, 0, 0]) and np.array_equal(sig, [0.5, 0, 0])
    II, Ir, w = np.diag([2, 3, 4.0]), np.diag([0.5, 0.2, 0.1]), np.array([0.3, -1, 2])
    mu, sig = legendre(II, Ir, w, -w)
    assert np.allclose(sig, 0) and np.allclose(mu, (II - Ir) @ w)


def test_hamiltonian_free_examples():
    s = free([1 / 3, 1 / 2, 1.0])
    assert hamiltonian_free(s, [1, 1, 1]) == pytest.approx(3.0)
    s = free([1 / 3, 1 / 2, 1.0], sigma=[0.2, -0.1, 0.4])
    assert hamiltonian_free(s, [0.2, -0.1, 0.4]) == 0.0
    assert hamiltonian_free(s, [0.2, -0.1, 0.4], include_constant=True) == pytest.approx(
        0.5 * (0.04 + 0.01 + 0.16) / 0.5)
    s0 = free([2.0, 3.0, 5.0])
    mu = np.array([0.3, 0.7, -0.2])
    assert hamiltonian_free(s0, mu) == pytest.approx(0.5 * mu @ np.linalg.solve(np.diag([2.0, 3, 5]), mu))


def test_hamiltonian_controlled_examples():
    s = RotorBodySystem(np.diag([1.0, 2, 4]), 0.5 * np.eye(3), CONTROLLED, u=[2, 0, 0])  # II_r u = (1,0,0)
    assert hamiltonian_controlled(s, [1, 1, 1]) == pytest.approx(-0.125)
    assert hamiltonian_controlled(s, [0, 0, 0]) == 0
    s0 = RotorBodySystem(np.diag([1.0, 2, 4]), np.eye(3) * 0.1, CONTROLLED)
    assert hamiltonian_controlled(s0, [1, 1, 1]) == pytest.approx(0.5 * (1 + 0.5 + 0.25))
    with pytest.raises(ValueError):
        hamiltonian_free(s0, [1, 1, 1])


def test_to_universal_examples():
    m = to_universal(free([1 / 6, 1 / 4, 1 / 2], sigma=[-1, 0, 0]))
    assert (m.model.a, m.model.b, m.model.c) == pytest.approx((3, 2, 1))
    assert np.allclose(m.alpha, [6, 0, 0]) and m.perm == (0, 1, 2)
    m0 = to_universal(free([1 / 6, 1 / 4, 1 / 2]))
    assert np.all(m0.alpha == 0)
    # reversed inertia order is relabelled
    m = to_universal(free([1 / 2, 1 / 4, 1 / 6], sigma=[0, 0, -1]))
    assert m.perm == (2, 1, 0) and np.allclose(m.alpha, [6, 0, 0])
    assert np.allclose(m.to_body(m.to_model([1, 2, 3])), [1, 2, 3])
    # controlled: d = diag(II^-1), shift = II_r u
    c = RotorBodySystem(np.diag([1 / 6, 1 / 4, 1 / 2]), np.diag([0.01, 0.01, 0.01]), CONTROLLED, u=[100, 0, 0])
    mc = to_universal(c)
    assert np.allclose([mc.model.a, mc.model.b, mc.model.c], [3, 2, 1]) and np.allclose(mc.alpha, [-6, 0, 0])


def test_to_universal_energy_identity(rng):
    s = free([2.0, 3.0, 5.0], Ir=0.3, sigma=[0.1, -0.4, 0.25])
    m = to_universal(s)
    for _ in range(20):
        mu = rng.normal(size=3)
        G = m.model.coeffs @ m.to_model(mu) ** 2 + m.alpha @ m.to_model(mu)
        assert hamiltonian_free(s, mu) == pytest.approx(G + m.offset, abs=1e-12)


def test_degenerate_inertia():
    with pytest.raises(DegenerateInertia):
        to_universal(free([2.0, 2.0, 5.0]))
    with pytest.raises(DegenerateInertia, match="invertible"):
        RotorBodySystem(np.diag([1.0, 2, 3]), np.diag([1.0, 0, 0]))


def test_re_set_preserved():
    s = free([2.0, 3.0, 5.0], Ir=0.3, sigma=[0.1, -0.4, 0.25])
    m = to_universal(s)
    for b in enumerate_branches(m.model, m.alpha, 2.0):
        for mu in b.mu[::5]:
            body = m.to_body(mu)
            scale = 1e-12 * (1 + body @ body)
            assert np.linalg.norm(np.cross(body, s.gradient(body))) < scale * 10


def test_fixed_point_equivalence(rng):
    """minors = 0 exactly where the reduced vector field vanishes."""
    s = free([1 / 6, 1 / 4, 1 / 2], Ir=0.0, sigma=[0.3, -0.2, 0.1])
    m = to_universal(s)
    for b in enumerate_branches(m.model, m.alpha, 1.0):
        for mu in b.mu[::9]:
            f = np.cross(m.to_body(mu), s.gradient(m.to_body(mu)))
            assert np.linalg.norm(f) < 1e-12 * (1 + mu @ mu) * 10
            assert minors_residual(m.model, m.alpha, mu) < 1e-12
    for _ in range(10):
        mu = rng.normal(size=3)
        f = np.cross(m.to_body(mu), s.gradient(m.to_body(mu)))
        assert (np.linalg.norm(f) > 1e-6) == (minors_residual(m.model, m.alpha, mu) > 1e-7)


def test_conservation_long_run():
    sys = ReducedSystem.from_family(M, [0.2, -0.1, 0.3])
    tr = integrate_reduced(sys, [0.3, 0.8, 0.5], 100.0, record_every=50)
    assert tr.j_drift < 1e-10 and tr.h_drift < 1e-8
    rs = free([2.0, 3.0, 5.0], sigma=[0.1, 0.3, -0.2])
    for t in integrate_reduced(rs, np.array([[0.3, 0.8, 0.5], [-1.0, 0.2, 0.1]]), 100.0):
        assert t.j_drift < 1e-10 and t.h_drift < 1e-8


def test_growth_rate_off_y_axis():
    sys = ReducedSystem.from_family(M, [0, 0, 0])
    tr = integrate_reduced(sys, np.array([0, 1, 0]) + 1e-6 * np.array([1, 0, 0]), 8.0)
    rate = growth_rate(tr, [0, 1, 0])
    a, b, c = M.coeffs
    assert rate == pytest.approx(2 * np.sqrt((b - c) * (a - b)), rel=0.05)


def test_integrator_arguments():
    sys = ReducedSystem.from_family(M, [0, 0, 0])
    with pytest.raises(ValueError):
        integrate_reduced(sys, [0, 1, 0], 1.0, dt=0.0)
    with pytest.raises(ValueError):
        integrate_reduced(sys, [0, 1, 0], 0.01, dt=0.1)
    assert np.isinf(characteristic_period(sys, [0, 0, 0]))
    tr = integrate_reduced(sys, [0, 1, 0], 1.0, dt=0.1)
    assert len(tr.t) == 11 and tr.t[-1] == pytest.approx(1.0)
    assert len(list(tr.rows())) == 11


def test_monte_carlo_stable_re(rng):
    rs = free([2.0, 3.0, 5.0], sigma=[0.2, 0.0, 0.0])
    m = to_universal(rs)
    rsys = reduced_system(rs)
    stable = []
    for b in enumerate_branches(m.model, m.alpha, 1.0):
        for mu in b.mu[::25]:
            body = m.to_body(mu)
            if np.linalg.norm(body) < 0.2:
                continue
            try:
                if classify(rsys, body).cls == StabilityClass.LYAPUNOV:
                    stable.append(body)
            except Exception:
                pass
    assert len(stable) >= 3
    for p in stable[:3]:
        starts = p + 1e-4 * rng.normal(size=(50, 3)) / np.sqrt(3)
        for tr in integrate_reduced(rs, starts, 200.0, record_every=10):
            assert np.max(np.linalg.norm(tr.mu - p, axis=1)) < 1e-2
