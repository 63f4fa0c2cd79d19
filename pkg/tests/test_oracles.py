from __future__ import annotations

import math

import numpy as np
import pytest

from oracles import cantor_function, expm, gamma


def test_expm_closed_forms():
    assert np.allclose(expm(np.diag([1.0, -2.0])), np.diag([math.e, math.exp(-2)]), rtol=1e-14)
    th = 2.5
    R = expm(np.array([[0.0, -th], [th, 0.0]]))
    assert np.allclose(R, [[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]], atol=1e-14)
    N = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    assert np.allclose(expm(3 * N), [[1, 3, 4.5], [0, 1, 3], [0, 0, 1]], atol=1e-13)
    assert np.allclose(expm(np.zeros((2, 2))), np.eye(2))


def test_expm_group_property():
    A = np.random.default_rng(0).uniform(-2, 2, (5, 5))
    assert np.allclose(expm(A) @ expm(-A), np.eye(5), atol=1e-11)
    assert np.allclose(expm(2 * A), expm(A) @ expm(A), rtol=1e-11)


def test_gamma_and_cantor_function():
    assert gamma(1 + math.log(2) / math.log(3)) == pytest.approx(0.8973709406726668, abs=1e-15)
    assert cantor_function(0.25) == pytest.approx(1 / 3)
    assert cantor_function(0.5) == 0.5
    assert cantor_function(1.0) == 1.0 and cantor_function(-1.0) == 0.0
