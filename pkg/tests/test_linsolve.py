from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsys.errors import FundamentalSetError
from fracsys.fractal_set import IfsSpec, sample_points
from fracsys.linsolve import (
    ChainMode,
    ComplexPairMode,
    GeneralSolution,
    ModeBasis,
    RealMode,
    SystemSpec,
    abel_check,
    build_mode_basis,
    default_samples,
    dichotomy_scan,
    evaluate,
    fit_initial_conditions,
    residual_check,
    spectral_residuals,
    wronskian,
)
from fracsys.mass import make_staircase
from oracles import expm

STAIR = make_staircase(IfsSpec.cantor())
S2 = math.sqrt(2)
EX1 = np.array([[1.0, 1.0], [4.0, 1.0]])
EX3 = np.array([[-0.5, 1.0], [-1.0, -0.5]])
EX4 = np.array([[1.0, -1.0], [1.0, 3.0]])
EX5 = np.diag([2.0, -3.0])


def test_system_spec_validation():
    s = SystemSpec([[1, 0], [0, 1]], STAIR, 0.0, [1, 2])
    assert s.n == 2 and s.alpha == STAIR.alpha
    with pytest.raises(ValueError):
        SystemSpec([[1, 0]], STAIR, 0.0)
    with pytest.raises(ValueError):
        SystemSpec(np.eye(2), STAIR, 2.0)
    with pytest.raises(ValueError):
        SystemSpec(np.eye(2), STAIR, 0.0, [1, 2, 3])


def test_mode_shapes():
    b = build_mode_basis(EX1, STAIR)
    assert [type(m) for m in b.modes] == [RealMode, RealMode]
    b = build_mode_basis(EX3, STAIR)
    (m,) = b.modes
    assert isinstance(m, ComplexPairMode)
    assert (m.a, m.b) == pytest.approx((-0.5, 1.0))
    assert np.allclose(m.u0, [1, 0]) and np.allclose(m.v0, [0, 1])
    b = build_mode_basis(EX5, STAIR)
    assert [(m.r, tuple(m.xi)) for m in b.modes] == [(2.0, (1.0, 0.0)), (-3.0, (0.0, 1.0))]
    b = build_mode_basis(EX4, STAIR)
    (m,) = b.modes
    assert isinstance(m, ChainMode) and m.count == 2


def test_repeated_root_full_eigenspace():
    b = build_mode_basis(2 * np.eye(3), STAIR)
    assert len(b.modes) == 3 and all(isinstance(m, RealMode) for m in b.modes)


@pytest.mark.parametrize(
    "A",
    [
        [[2, 1, 0], [0, 2, 1], [0, 0, 2]],
        [[2, 1, 0, 0], [0, 2, 0, 0], [0, 0, 2, 1], [0, 0, 0, 2]],
        [[3, 1, 0, 0], [0, 3, 1, 0], [0, 0, 3, 0], [0, 0, 0, 3]],
        [[1, 1, 1, 0], [-1, 1, 0, 1], [0, 0, 1, 1], [0, 0, -1, 1]],
    ],
)
def test_defective_blocks_against_oracle(A):
    A = np.array(A, dtype=float)
    b = build_mode_basis(A, STAIR)
    assert max(spectral_residuals(A, b.modes)) <= 1e-9
    X0 = b.fundamental_matrix(0.0)
    for t in sample_points(STAIR.spec, 5, np.random.default_rng(1)):
        ref = expm(A * STAIR(t)) @ X0
        assert np.allclose(b.fundamental_matrix(t), ref, rtol=1e-9, atol=1e-9 * np.abs(ref).max())


def test_evaluate_examples():
    b1 = build_mode_basis(EX1, STAIR)
    assert np.allclose(evaluate(GeneralSolution(b1, [1, 0]), 0.0), [1, 2])
    assert np.allclose(evaluate(GeneralSolution(b1, [1, 2]), 0.0), [3, -2])
    b4 = build_mode_basis(EX4, STAIR)
    assert np.allclose(evaluate(GeneralSolution(b4, [0, 1]), 0.0), [0, -1])
    with pytest.raises(ValueError):
        GeneralSolution(b1, [1, 2, 3])


def test_fit_examples():
    b1 = build_mode_basis(EX1, STAIR)
    assert np.allclose(fit_initial_conditions(b1, 0.0, [1, 2]), [1, 0], atol=1e-15)
    b5 = build_mode_basis(EX5, STAIR)
    assert np.allclose(fit_initial_conditions(b5, 0.0, [0.3, -7]), [0.3, -7])
    b3 = build_mode_basis(EX3, STAIR)
    assert np.allclose(fit_initial_conditions(b3, 0.0, [1, 0]), [1, 0])


def test_singular_basis_rejected():
    dup = (RealMode(3.0, np.array([1.0, 2.0])), RealMode(3.0, np.array([1.0, 2.0])))
    with pytest.raises(FundamentalSetError):
        ModeBasis(dup, STAIR, 0.0)
    basis = ModeBasis(dup, STAIR, 0.0, validate=False)
    with pytest.raises(FundamentalSetError):
        fit_initial_conditions(basis, 0.0, [1.0, 0.0])
    with pytest.raises(ValueError):
        ModeBasis((RealMode(3.0, np.array([1.0, 2.0])),), STAIR, 0.0)


def test_normalized_basis_is_identity_at_t0():
    b = build_mode_basis(EX1, STAIR).normalized_at(0.0)
    assert np.allclose(b.fundamental_matrix(0.0), np.eye(2))
    assert dichotomy_scan(b, default_samples(STAIR, 4)).verdict == "never-zero"


def test_abel_variable_trace():
    # a supplied solution family for a variable system: x(t) = exp(S(t)^2 / 2) solves D x = S x
    b = ModeBasis((RealMode(1.0, np.array([1.0])),), STAIR, 0.0)
    rep = abel_check(1.0, b, 0.0, 1.0)
    assert rep.rel_residual <= 1e-12
    assert abel_check(1.0, b, 0.7, 0.7).abs_residual == 0.0
    rep = abel_check(lambda t: 1.0, b, 0.0, 1.0)
    assert rep.rel_residual <= 1e-12
    rep = abel_check(lambda t: 1.0, b, 1.0, 0.0)
    assert rep.rel_residual <= 1e-12


def test_dichotomy_requires_two_samples():
    with pytest.raises(ValueError):
        dichotomy_scan(build_mode_basis(EX1, STAIR), [0.0])


def test_residual_of_zero_solution():
    rep = residual_check(GeneralSolution(build_mode_basis(EX1, STAIR), [0, 0]), EX1, STAIR, [0.0, 0.25, 1.0])
    assert rep.sup_norm == 0.0 and rep.passed()


def test_residual_detects_wrong_system():
    sol = GeneralSolution(build_mode_basis(EX1, STAIR), [1, 0])
    rep = residual_check(sol, EX5, STAIR, [0.25, 2 / 3])
    assert not rep.passed()


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(-5, 5), min_size=2, max_size=2),
    st.lists(st.floats(-5, 5), min_size=2, max_size=2),
    st.floats(-3, 3),
    st.floats(-3, 3),
    st.floats(0, 1),
)
def test_superposition(c1, c2, a, b, t):
    basis = build_mode_basis(EX3, STAIR)
    lhs = GeneralSolution(basis, a * np.array(c1) + b * np.array(c2))(t)
    rhs = a * GeneralSolution(basis, c1)(t) + b * GeneralSolution(basis, c2)(t)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_systems_invariants(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 5))
    A = rng.uniform(-2, 2, (n, n))
    basis = build_mode_basis(A, STAIR)
    pts = sample_points(STAIR.spec, 6, rng)
    assert dichotomy_scan(basis, pts).verdict == "never-zero"
    w0 = wronskian(basis, 0.0)
    for t in pts:
        expected = w0 * math.exp(np.trace(A) * STAIR(t))
        assert wronskian(basis, t) == pytest.approx(expected, rel=1e-9)
    x0 = rng.uniform(-3, 3, n)
    c = fit_initial_conditions(basis, 0.0, x0)
    assert np.linalg.norm(GeneralSolution(basis, c)(0.0) - x0) <= 1e-10 * (1 + np.linalg.norm(x0))
