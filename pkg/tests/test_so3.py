import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from releq.errors import ZeroMomentum
from releq.so3 import as_vector, casimir, coad, hat, rotation_matrix, sphere_tangent_frame

vec = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=3).map(np.array)


@pytest.mark.parametrize("mu,val", [((0, 0, 0), 0.0), ((1, 0, 0), 0.5), ((1, 2, 2), 4.5)])
def test_casimir_examples(mu, val):
    assert casimir(mu) == val


@pytest.mark.parametrize("xi,mu,out", [
    ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    ((1, 2, 3), (1, 2, 3), (0, 0, 0)),
    ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
])
def test_coad_examples(xi, mu, out):
    assert np.array_equal(coad(xi, mu), np.array(out, float))


def test_as_vector_rejects_bad_input():
    with pytest.raises(ValueError):
        as_vector([1, 2])
    with pytest.raises(ValueError):
        as_vector([1, np.nan, 0])


@given(vec, vec)
def test_coad_orthogonal_to_both(xi, mu):
    c = coad(xi, mu)
    scale = 1e-12 * (1 + np.linalg.norm(xi) * np.linalg.norm(mu)) * (1 + np.linalg.norm(xi) + np.linalg.norm(mu))
    assert abs(c @ mu) <= scale
    assert abs(c @ xi) <= scale


@given(vec)
def test_hat_matches_cross(v):
    w = np.array([0.3, -1.2, 2.0])
    assert np.allclose(hat(v) @ w, np.cross(v, w), atol=1e-9)


def test_casimir_rotation_invariant(rng):
    for _ in range(50):
        mu = rng.normal(size=3) * 3
        R = rotation_matrix(rng.normal(size=3), rng.uniform(0, 2 * np.pi))
        assert np.allclose(R @ R.T, np.eye(3), atol=1e-14)
        assert abs(casimir(R @ mu) - casimir(mu)) < 1e-12 * (1 + casimir(mu))


@pytest.mark.parametrize("mu", [(0, 0, 1), (3, 0, 0), tuple(np.ones(3) / np.sqrt(3))])
def test_tangent_frame_examples(mu):
    e1, e2 = sphere_tangent_frame(mu)
    mu = np.array(mu)
    assert abs(e1 @ mu) < 1e-14 and abs(e2 @ mu) < 1e-14
    G = np.array([[e1 @ e1, e1 @ e2], [e2 @ e1, e2 @ e2]])
    assert np.allclose(G, np.eye(2), atol=1e-14)


@settings(max_examples=200)
@given(vec.filter(lambda v: np.linalg.norm(v) > 1e-6))
def test_tangent_frame_gram(mu):
    e1, e2 = sphere_tangent_frame(mu)
    B = np.array([e1, e2, mu / np.linalg.norm(mu)])
    assert np.allclose(B @ B.T, np.eye(3), atol=1e-12)
    # deterministic
    f1, f2 = sphere_tangent_frame(mu)
    assert np.array_equal(e1, f1) and np.array_equal(e2, f2)


def test_tangent_frame_zero():
    with pytest.raises(ZeroMomentum):
        sphere_tangent_frame([0, 0, 0])
