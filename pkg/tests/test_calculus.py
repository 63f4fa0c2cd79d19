from __future__ import annotations

import math

import numpy as np
import pytest

from fracsys.calculus import (
    FractalMatrixFn,
    f_alpha_derivative,
    f_alpha_integral,
    matrix_derivative,
    matrix_integral,
)
from fracsys.errors import ConvergenceError
from fracsys.fractal_set import IfsSpec, build_approximation
from fracsys.mass import make_staircase

STAIR = make_staircase(IfsSpec.cantor())
M = STAIR.total_mass


def endpoints(depth=6):
    return build_approximation(STAIR.spec, depth).endpoints()


def test_derivative_of_staircase_functions():
    for x in endpoints(5)[::3]:
        x = float(x)
        s = STAIR(x)
        assert f_alpha_derivative(STAIR, STAIR, x).value == pytest.approx(1.0, rel=1e-8)
        d = f_alpha_derivative(lambda t: STAIR(t) ** 2, STAIR, x).value
        assert d == pytest.approx(2 * s, rel=1e-6, abs=1e-8)
        d = f_alpha_derivative(lambda t: math.sin(STAIR(t)), STAIR, x).value
        assert d == pytest.approx(math.cos(s), rel=1e-6, abs=1e-8)


def test_derivative_of_constant_is_zero():
    assert f_alpha_derivative(lambda t: 4.0, STAIR, 0.25).value == 0.0


def test_derivative_off_the_set_is_zero():
    assert f_alpha_derivative(lambda t: t, STAIR, 0.5).value == 0.0


def test_derivative_not_converging():
    # t itself is not differentiable against S on the Cantor set
    with pytest.raises(ConvergenceError) as info:
        f_alpha_derivative(lambda t: t, STAIR, 0.25, max_refinements=12)
    assert "quotients" in info.value.diagnostics


def test_integral_of_one_is_mass():
    b = f_alpha_integral(lambda t: 1.0, STAIR, 0.0, 1.0)
    assert b.lower == pytest.approx(M, rel=1e-14)
    assert b.upper == pytest.approx(M, rel=1e-14)


def test_integral_of_staircase_brackets_half_square():
    b = f_alpha_integral(STAIR, STAIR, 0.0, 1.0, depth=12)
    assert b.lower <= M**2 / 2 <= b.upper
    assert b.error < 1e-3


def test_integral_on_subinterval_and_tol():
    b = f_alpha_integral(lambda t: 1.0, STAIR, 0.1, 0.8)
    assert b.value == pytest.approx(STAIR(0.8) - STAIR(0.1), rel=1e-12)
    with pytest.raises(ConvergenceError):
        f_alpha_integral(STAIR, STAIR, 0.0, 1.0, depth=2, tol=1e-9)
    with pytest.raises(ValueError):
        f_alpha_integral(lambda t: 1.0, STAIR, 0.5, 0.5)
    with pytest.raises(ValueError):
        f_alpha_integral(lambda t: math.inf, STAIR, 0.0, 1.0)


def test_integral_of_a_derivative():
    f = lambda t: math.exp(STAIR(t))
    for b in (1 / 3, 0.7, 1.0):
        br = f_alpha_integral(f, STAIR, 0.0, b, depth=14)
        exact = math.exp(STAIR(b)) - 1.0
        assert br.lower - 1e-12 <= exact <= br.upper + 1e-12


def test_matrix_operations():
    A = FractalMatrixFn(((lambda t: STAIR(t), lambda t: 2.0), (lambda t: 0.0, lambda t: STAIR(t) ** 2)))
    assert A.shape == (2, 2)
    D = matrix_derivative(A, STAIR, 0.25)
    s = STAIR(0.25)
    assert np.allclose(D, [[1.0, 0.0], [0.0, 2 * s]], rtol=1e-6, atol=1e-8)
    lo, hi = matrix_integral(FractalMatrixFn.constant([[1.0, 2.0]]), STAIR, 0.0, 1.0)
    assert np.allclose(lo, [[M, 2 * M]]) and np.allclose(hi, lo)


def test_matrix_errors_name_the_entry():
    A = FractalMatrixFn(((lambda t: 1.0, lambda t: t),))
    with pytest.raises(ConvergenceError) as info:
        matrix_derivative(A, STAIR, 0.25, max_refinements=10)
    assert info.value.diagnostics["entry"] == (0, 1)
    with pytest.raises(ValueError):
        FractalMatrixFn(((lambda t: 1.0,), ()))
