import numpy as np
import pytest

from stringpendulum import liegroup
from stringpendulum.errors import CayleyBoundaryError


def test_hat_cross_product():
    rng = np.random.default_rng(42)
    for _ in range(20):
        v = rng.normal(size=3)
        w = rng.normal(size=3)
        assert np.allclose(liegroup.hat(v) @ w, np.cross(v, w), atol=1e-15)


def test_hat_vee_roundtrip():
    rng = np.random.default_rng(7)
    for _ in range(20):
        v = rng.normal(size=3)
        assert np.allclose(liegroup.vee(liegroup.hat(v)), v, atol=1e-15)


def test_vee_rejects_non_skew():
    with pytest.raises(ValueError):
        liegroup.vee(np.eye(3))


def test_cayley_is_rotation():
    rng = np.random.default_rng(3)
    for _ in range(50):
        c = rng.normal(size=3) * rng.choice([0.01, 1.0, 100.0])
        F = liegroup.cayley(c)
        assert liegroup.orthogonality_error(F) < 1e-13
        assert np.linalg.det(F) > 0.0


def test_cayley_matches_definition():
    # (I + hat(c)) (I - hat(c))^-1 computed the slow way
    rng = np.random.default_rng(11)
    for _ in range(20):
        c = rng.normal(size=3)
        ch = liegroup.hat(c)
        ref = (np.eye(3) + ch) @ np.linalg.inv(np.eye(3) - ch)
        assert np.allclose(liegroup.cayley(c), ref, atol=1e-13)


def test_cayley_angle():
    # rotation angle is 2 arctan(|c|) about c/|c|
    c = np.array([0.3, 0.0, 0.0])
    F = liegroup.cayley(c)
    angle = np.arccos((np.trace(F) - 1.0) / 2.0)
    assert abs(angle - 2.0 * np.arctan(0.3)) < 1e-12


def test_cayley_inverse_roundtrip():
    rng = np.random.default_rng(19)
    for _ in range(50):
        c = rng.normal(size=3) * rng.choice([1e-3, 0.1, 1.0, 10.0])
        back = liegroup.cayley_inverse(liegroup.cayley(c))
        assert np.max(np.abs(back - c)) < 1e-12 * max(1.0, np.max(np.abs(c)))


def test_cayley_inverse_boundary():
    R = liegroup.rotation_about([0.0, 0.0, 1.0], np.pi)
    with pytest.raises(CayleyBoundaryError):
        liegroup.cayley_inverse(R)


def test_identity_and_orthogonality_error():
    assert liegroup.orthogonality_error(liegroup.identity()) == 0.0
    bad = np.eye(3)
    bad[0, 0] = 1.0 + 1e-6
    assert liegroup.orthogonality_error(bad) > 1e-7


def test_check_rotation_rejects():
    with pytest.raises(ValueError):
        liegroup.check_rotation(np.eye(3) * 1.001)
    with pytest.raises(ValueError):
        liegroup.check_rotation(np.diag([1.0, 1.0, -1.0]))  # reflection


def test_rotation_about():
    R = liegroup.rotation_about([0.0, 0.0, 1.0], np.pi / 2.0)
    assert np.allclose(R @ [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], atol=1e-15)
