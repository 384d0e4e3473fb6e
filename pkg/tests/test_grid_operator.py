import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from singular_elliptic import (
    Domain,
    MeasureSpec,
    NumericError,
    ParameterError,
    ShapeError,
    apply,
    assemble,
    discretize,
    energy,
    fractional_constant,
    getoor_constant,
    resolvent,
    solve_linear,
)


def lebesgue(n, alpha, a=0.0, b=1.0):
    dom = Domain(a, b, n)
    return dom, assemble(dom, alpha), discretize(MeasureSpec.from_density("constant", 1.0), dom)


def test_three_point_stencil():
    op = assemble(Domain(0.0, 1.0, 3), 2.0)
    expected = 16 * np.array([[2, -1, 0], [-1, 2, -1], [0, -1, 2]], dtype=float)
    np.testing.assert_array_equal(op.L, expected)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 1.0, 1.5, 1.9])
def test_m_matrix_structure(alpha):
    op = assemble(Domain(0.0, 1.0, 40), alpha)
    L = op.L
    np.testing.assert_array_equal(L, L.T)
    off = L - np.diag(np.diag(L))
    assert np.all(off <= 0)
    assert np.all(np.diag(L) > 0)
    # weakly diagonally dominant with the killing terms as the surplus
    np.testing.assert_allclose(L.sum(axis=1), op.killing, rtol=1e-10, atol=1e-8)
    assert np.all(op.killing > 0)


def test_matrix_is_read_only():
    op = assemble(Domain(0.0, 1.0, 5), 1.0)
    with pytest.raises(ValueError):
        op.L[0, 0] = 1.0


@pytest.mark.parametrize("alpha", [0.0, -1.0, 2.5, np.nan])
def test_alpha_out_of_range(alpha):
    with pytest.raises(ParameterError):
        assemble(Domain(0.0, 1.0, 5), alpha)


@pytest.mark.parametrize("args", [(1.0, 0.0, 5), (0.0, 1.0, 0), (0.0, 1.0, 2.5)])
def test_bad_domain(args):
    with pytest.raises(ParameterError):
        Domain(*args)


def test_too_many_nodes():
    with pytest.raises(ParameterError):
        assemble(Domain(0.0, 1.0, 5000), 1.0)


def test_fractional_constant_limits():
    assert fractional_constant(2.0) == 0.0
    # C(1, 1) = 1 / pi
    assert fractional_constant(1.0) == pytest.approx(1 / np.pi, rel=1e-14)
    assert fractional_constant(1.999) < 1e-2


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 2.0])
def test_getoor_constant_matches_oracle(alpha):
    assert getoor_constant(alpha) == pytest.approx(oracles.GETOOR[alpha], rel=1e-14)
    assert oracles.getoor_constant(alpha) == pytest.approx(oracles.GETOOR[alpha], rel=1e-14)


def test_apply_zero_and_basis():
    op = assemble(Domain(0.0, 1.0, 9), 1.2)
    np.testing.assert_array_equal(apply(op, np.zeros(9)), 0.0)
    e = np.zeros(9)
    e[4] = 1.0
    np.testing.assert_allclose(apply(op, e), op.L[:, 4])


def test_apply_quadratic_is_exact_for_laplacian():
    dom = Domain(0.0, 1.0, 63)
    op = assemble(dom, 2.0)
    np.testing.assert_allclose(apply(op, oracles.green_lebesgue(dom.nodes)), 1.0, rtol=1e-9)


def test_apply_shape_error():
    op = assemble(Domain(0.0, 1.0, 9), 1.0)
    with pytest.raises(ShapeError):
        apply(op, np.zeros(8))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_getoor_identity(alpha):
    dom = Domain(-1.0, 1.0, 2047)
    op = assemble(dom, alpha)
    x = dom.nodes
    v = apply(op, (1 - x * x) ** (alpha / 2))
    mid = np.abs(x) <= 0.5
    assert np.max(np.abs(v[mid] / oracles.GETOOR[alpha] - 1)) < 0.05


def test_green_solution_midpoint():
    dom, op, mu = lebesgue(511, 2.0)
    u = solve_linear(op, mu)
    assert u[dom.nearest_node(0.5)] == pytest.approx(0.125, abs=1e-5)
    np.testing.assert_allclose(u, oracles.green_lebesgue(dom.nodes), atol=1e-12)


def test_solve_linear_zero_measure():
    op = assemble(Domain(0.0, 1.0, 15), 0.7)
    np.testing.assert_array_equal(solve_linear(op, np.zeros(15)), 0.0)


def test_exit_time_alpha_one():
    dom, op, mu = lebesgue(2047, 1.0, -1.0, 1.0)
    u = solve_linear(op, mu)
    assert u[dom.nearest_node(0.0)] == pytest.approx(oracles.exit_time(1.0, 0.0), rel=0.02)


def test_solve_linear_large_local_grid_passes_residual_check():
    # the relative residual test alone is beyond double precision here
    dom, op, mu = lebesgue(4095, 2.0)
    assert np.max(solve_linear(op, mu)) == pytest.approx(0.125, abs=1e-6)


def test_energy_of_tent():
    for n in (63, 255, 1023):
        dom = Domain(0.0, 1.0, n)
        op = assemble(dom, 2.0)
        x = dom.nodes
        tent = np.minimum(x / 0.5, (1 - x) / 0.5)
        assert energy(op, tent) == pytest.approx(oracles.point_capacity_local(0.5), rel=1e-12)
    assert energy(op, np.zeros(n)) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=12, max_size=12), st.sampled_from([0.4, 1.0, 1.7, 2.0]))
def test_energy_nonnegative(values, alpha):
    op = assemble(Domain(0.0, 1.0, 12), alpha)
    assert energy(op, np.array(values)) >= -1e-9


def test_resolvent_zero_beta_matches_solve():
    dom = Domain(0.0, 1.0, 63)
    op = assemble(dom, 1.3)
    f = np.sin(np.pi * dom.nodes)
    np.testing.assert_allclose(resolvent(op, 0.0, f), solve_linear(op, f * dom.h), rtol=1e-12)
    np.testing.assert_array_equal(resolvent(op, 3.0, np.zeros(63)), 0.0)


@pytest.mark.parametrize("alpha", [1.0, 2.0])
def test_resolvent_large_beta(alpha):
    dom = Domain(0.0, 1.0, 127)
    op = assemble(dom, alpha)
    f = np.sin(np.pi * dom.nodes) ** 2
    v = 1e6 * resolvent(op, 1e6, f)
    assert np.max(np.abs(v - f)) / np.max(f) <= 1e-3


def test_resolvent_negative_beta():
    op = assemble(Domain(0.0, 1.0, 7), 1.0)
    with pytest.raises(ParameterError):
        resolvent(op, -1.0, np.ones(7))


def test_numeric_error_type():
    err = NumericError("x", condition=12.0)
    assert err.condition == 12.0
