import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from looptoda import matcore
from looptoda.errors import SingularFieldError, ValidationError
from looptoda.model import (CoordinateMode, GammaField, apply_symmetry, build_system, reduce_index,
                            toda_residual, toda_residual_terms, vacuum_field)
from looptoda.solitons import gamma_one_soliton


def test_system_p2_n1():
    s = build_system(2, 1)
    assert np.allclose(s.h, np.diag([1, -1]), atol=1e-15)
    assert np.array_equal(s.c_plus, [[0, 1], [1, 0]])


def test_system_p3_n1():
    s = build_system(3, 1)
    e = cmath.exp(2j * cmath.pi / 3)
    assert np.allclose(np.diag(s.h), [1, e ** 2, e], atol=1e-15)
    expected = np.zeros((3, 3))
    expected[0, 1] = expected[1, 2] = expected[2, 0] = 1
    assert np.array_equal(s.c_plus, expected)


def test_system_p2_n2_grading():
    s = build_system(2, 2)
    assert np.allclose(np.diag(s.h), [1, 1, -1, -1], atol=1e-15)
    assert np.allclose(s.h @ s.c_plus @ np.linalg.inv(s.h), -s.c_plus, atol=1e-15)


@pytest.mark.parametrize("p", range(2, 7))
@pytest.mark.parametrize("n_star", range(1, 4))
def test_system_invariants(p, n_star):
    s = build_system(p, n_star)
    assert np.array_equal(s.c_plus @ s.c_minus, s.c_minus @ s.c_plus)
    assert np.array_equal(s.c_minus, s.c_plus.T)
    assert matcore.max_norm(np.linalg.matrix_power(s.h, p) - np.eye(s.n)) <= 1e-13
    hinv = np.linalg.inv(s.h)
    assert matcore.max_norm(s.h @ s.c_plus @ hinv - s.eps_p * s.c_plus) <= 1e-14
    assert matcore.max_norm(s.h @ s.c_minus @ hinv - s.c_minus / s.eps_p) <= 1e-14


@pytest.mark.parametrize("p,n_star", [(1, 1), (2, 0), (0, 3)])
def test_system_rejects_bad_sizes(p, n_star):
    with pytest.raises(ValidationError):
        build_system(p, n_star)


def test_system_is_immutable():
    s = build_system(3, 1)
    with pytest.raises(ValueError):
        s.h[0, 0] = 2


@given(st.integers(-20, 20), st.integers(2, 6))
def test_reduce_index(alpha, p):
    a = reduce_index(alpha, p)
    assert 1 <= a <= p and (a - alpha) % p == 0


def test_coordinate_modes():
    assert CoordinateMode.EUCLIDEAN.to_light_cone(2.0, 3.0) == (2 + 3j, 2 - 3j)
    assert CoordinateMode.LORENTZIAN.to_light_cone(2.0, 3.0) == (5, -1)
    assert CoordinateMode.INDEPENDENT.to_light_cone(2.0, 3.0) == (2, 3)


@pytest.mark.parametrize("mode", list(CoordinateMode))
def test_vacuum_residual_exactly_zero(mode):
    field = vacuum_field(build_system(3, 2))
    for a in range(1, 4):
        assert not np.any(toda_residual(field, a, (0.3, -0.7), 1e-3, mode))


def test_field_periodic_in_alpha(soliton_factory):
    field = gamma_one_soliton(soliton_factory(3, 2, 1))
    assert np.array_equal(field(1, 0.1, 0.2), field(4, 0.1, 0.2))
    assert np.array_equal(field(0, 0.1, 0.2), field(3, 0.1, 0.2))


def test_residual_one_soliton_off_core():
    from conftest import spot_data
    field = gamma_one_soliton(spot_data())
    # far from the core, E is small and the truncation error is tiny
    for a in (1, 2):
        assert matcore.max_norm(toda_residual(field, a, (-3.0, -3.0), 1e-3)) <= 1e-6


def test_residual_is_second_order(soliton_factory):
    field = gamma_one_soliton(soliton_factory(2, 1, 1))
    pt = (0.2, -0.4)
    r1 = matcore.max_norm(toda_residual(field, 1, pt, 1e-3))
    r2 = matcore.max_norm(toda_residual(field, 1, pt, 5e-4))
    assert 3.2 <= r1 / r2 <= 4.8
    # Richardson extrapolation removes the step^2 term
    r_ex = matcore.max_norm((4 * toda_residual(field, 1, pt, 5e-4) - toda_residual(field, 1, pt, 1e-3)) / 3)
    assert r_ex <= 1e-6


@pytest.mark.parametrize("mode", [CoordinateMode.EUCLIDEAN, CoordinateMode.LORENTZIAN])
def test_residual_second_order_in_physical_modes(mode, soliton_factory):
    field = gamma_one_soliton(soliton_factory(2, 2, 1))
    r1 = matcore.max_norm(toda_residual(field, 2, (0.1, 0.3), 1e-3, mode))
    r2 = matcore.max_norm(toda_residual(field, 2, (0.1, 0.3), 5e-4, mode))
    assert 3.2 <= r1 / r2 <= 4.8


def test_residual_singular_point_named():
    s = build_system(2, 1)

    def func(a, zp, zm):
        return np.array([[zp]])  # singular on zp = 0

    field = GammaField(s, func)
    with pytest.raises(SingularFieldError) as info:
        toda_residual_terms(field, 1, (0.0, 0.5), 1e-3)
    assert info.value.point is not None


def test_symmetry_identity(soliton_factory):
    field = gamma_one_soliton(soliton_factory(2, 2, 1))
    same = apply_symmetry(field, 1, np.eye(2))
    assert np.array_equal(same(1, 0.3, 0.1), field(1, 0.3, 0.1))


def test_symmetry_on_vacuum():
    s = build_system(2, 2)
    x = np.array([[1, 2], [3, 4j]])
    field = apply_symmetry(vacuum_field(s), 2 + 1j, x)
    assert matcore.max_norm(field(1, 0.5, 0.5) - (2 + 1j) * np.eye(2)) <= 1e-15
    assert matcore.max_norm(toda_residual(field, 1, (0.5, 0.5), 1e-3)) <= 1e-15


def test_symmetry_preserves_residual_order(soliton_factory, rng):
    field = gamma_one_soliton(soliton_factory(2, 2, 1))
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    moved = apply_symmetry(field, 2 + 1j, x)
    pt = (0.25, -0.3)
    for f in (field, moved):
        r1 = matcore.max_norm(toda_residual(f, 1, pt, 1e-3))
        r2 = matcore.max_norm(toda_residual(f, 1, pt, 5e-4))
        assert 3.2 <= r1 / r2 <= 4.8


def test_symmetry_rejects_bad_input():
    field = vacuum_field(build_system(2, 2))
    with pytest.raises(ValidationError):
        apply_symmetry(field, 0)
    with pytest.raises(ValidationError):
        apply_symmetry(field, 1, np.ones((2, 2)))
