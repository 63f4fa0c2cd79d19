from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fracsys.errors import DefectStructureError, NumericError
from fracsys.linalg import (
    characteristic_polynomial,
    durand_kerner,
    eigenvalues,
    eigenvectors,
    jordan_chain,
    nullspace,
    polyval,
    solve_singular,
)

S2 = math.sqrt(2)


def parallel(u, v, tol=1e-9):
    u, v = np.asarray(u, complex), np.asarray(v, complex)
    proj = np.vdot(v, u) / np.vdot(v, v)
    return math.atan2(np.linalg.norm(u - proj * v), np.linalg.norm(proj * v)) <= tol


@pytest.mark.parametrize(
    "A, coeffs",
    [
        ([[1, 1], [4, 1]], [1, -2, -3]),
        (np.eye(2), [1, -2, 1]),
        ([[-0.5, 1], [-1, -0.5]], [1, 1, 1.25]),
        ([[2, 0, 0], [0, 3, 0], [0, 0, 4]], [1, -9, 26, -24]),
    ],
)
def test_characteristic_polynomial(A, coeffs):
    assert np.allclose(characteristic_polynomial(A), coeffs, atol=1e-14)


def test_characteristic_polynomial_checks():
    with pytest.raises(ValueError):
        characteristic_polynomial(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        characteristic_polynomial(np.eye(13))


@pytest.mark.parametrize(
    "coeffs, roots",
    [
        ([1, -2, -3], [(3, 1), (-1, 1)]),
        ([1, 5, 4], [(-1, 1), (-4, 1)]),
        ([1, -4, 4], [(2, 2)]),
        ([1, 1, 1.25], [(complex(-0.5, 1), 1), (complex(-0.5, -1), 1)]),
        ([1, -6, 12, -8], [(2, 3)]),
        ([1, 0, 2, 0, 1], [(1j, 2), (-1j, 2)]),
    ],
)
def test_eigenvalues(coeffs, roots):
    sp = eigenvalues(coeffs)
    assert len(sp.roots) == len(roots)
    for (r, m), (er, em) in zip(sp.roots, roots):
        assert abs(r - er) <= 1e-10
        assert m == em
    assert sum(m for _, m in sp.roots) == len(coeffs) - 1


def test_durand_kerner_validation():
    with pytest.raises(ValueError):
        durand_kerner([2.0, 1.0])
    with pytest.raises(ValueError):
        durand_kerner([1.0])
    assert durand_kerner([1.0, -5.0])[0] == 5.0
    with pytest.raises(NumericError):
        durand_kerner([1, -2, -3], max_sweeps=1)


def test_close_roots_are_flagged():
    sp = eigenvalues(np.poly([1.0, 1.0 + 1.5e-6]).tolist())
    assert len(sp.roots) == 2
    assert sp.diagnostics


@pytest.mark.parametrize(
    "A, r, vec",
    [
        ([[1, 1], [4, 1]], 3, [1, 2]),
        ([[1, 1], [4, 1]], -1, [1, -2]),
        ([[-3, S2], [S2, -2]], -1, [1, S2]),
        ([[-3, S2], [S2, -2]], -4, [-S2, 1]),
        ([[-0.5, 1], [-1, -0.5]], complex(-0.5, 1), [1, 1j]),
        ([[1, -1], [1, 3]], 2, [1, -1]),
    ],
)
def test_eigenvectors(A, r, vec):
    (v,) = eigenvectors(A, r)
    assert parallel(v, vec)


def test_hand_normalization():
    (v,) = eigenvectors([[1, 1], [4, 1]], 3)
    assert np.allclose(v, [1, 2], atol=1e-15)


def test_eigenvectors_at_non_eigenvalue():
    with pytest.raises(NumericError):
        eigenvectors([[1, 1], [4, 1]], 2.0)


def test_full_eigenspace():
    vs = eigenvectors(2 * np.eye(3), 2)
    assert len(vs) == 3


@pytest.mark.parametrize(
    "A, r, xi, eta",
    [([[1, -1], [1, 3]], 2, [1, -1], [0, -1]), ([[2, 1], [0, 2]], 2, [1, 0], [0, 1])],
)
def test_jordan_chain(A, r, xi, eta):
    got = jordan_chain(A, r, xi)
    assert np.allclose(got, eta, atol=1e-9)
    assert np.allclose((np.array(A) - r * np.eye(2)) @ got, xi, atol=1e-9)


def test_jordan_chain_errors():
    with pytest.raises(DefectStructureError):
        jordan_chain(np.diag([2.0, 2.0]), 2, [1, 0])
    with pytest.raises(ValueError):
        jordan_chain([[1, -1], [1, 3]], 2, [1, 1])


def test_solve_singular_inconsistent():
    with pytest.raises(DefectStructureError):
        solve_singular(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([0.0, 1.0]))


def test_nullspace_dimension():
    M = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    basis = nullspace(M)
    assert len(basis) == 2
    for v in basis:
        assert np.allclose(M @ v, 0)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (4, 4), elements=st.floats(-2, 2)))
def test_spectral_residual_property(A):
    norm = np.max(np.sum(np.abs(A), axis=1))
    sp = eigenvalues(characteristic_polynomial(A))
    assert sum(m for _, m in sp.roots) == 4
    for r, m in sp.roots:
        assert abs(polyval(sp.char_coeffs, r)) <= 1e-9 * (1 + norm**4)
        if m == 1:
            for v in eigenvectors(A, r):
                res = np.max(np.abs(A @ v - r * v))
                assert res <= 1e-9 * (1 + norm) * np.max(np.abs(v))
