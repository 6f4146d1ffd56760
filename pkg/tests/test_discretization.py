"""Grid construction and convolution-matrix quadrature checks."""

import numpy as np
import pytest

from epifront.discretization import (
    Coefficients,
    assemble_block_operator,
    assemble_convolution,
    auto_grid,
    build_grid,
    partial_mass,
    trapezoid_weights,
)
from epifront.kernels import gaussian, tent, truncated_gaussian


def test_build_grid_exact_division():
    g = build_grid(-1.0, 1.0, 0.5)
    assert g.n == 5
    assert g.dx == pytest.approx(0.5)
    assert np.allclose(g.nodes, [-1.0, -0.5, 0.0, 0.5, 1.0])


def test_build_grid_rounds_down_spacing():
    g = build_grid(0.0, 10.0, 0.01)
    assert g.n == 1001
    assert g.dx <= 0.01 + 1e-15

    g2 = build_grid(0.0, 1.0, 0.3)
    assert g2.n == 5
    assert g2.dx == pytest.approx(0.25)


def test_build_grid_rejects_unresolvable():
    with pytest.raises(ValueError):
        build_grid(0.0, 1.0, 0.6)
    with pytest.raises(ValueError):
        build_grid(1.0, 1.0, 0.1)
    with pytest.raises(ValueError):
        build_grid(0.0, 1.0, -0.1)


def test_auto_grid_policy():
    g = auto_grid(-10.0, 10.0, scales=[1.0, 0.5])
    # resolves the narrowest kernel: dx <= 0.5 / 20
    assert g.dx <= 0.5 / 20.0 + 1e-12
    assert g.n <= 4001

    # very long interval: n capped, dx coarsened
    g2 = auto_grid(-500.0, 500.0, scales=[1.0])
    assert g2.n == 4001


def test_trapezoid_weights_sum_to_length():
    g = build_grid(-3.0, 7.0, 0.17)
    w = trapezoid_weights(g)
    assert w.sum() == pytest.approx(10.0)
    assert w[0] == pytest.approx(0.5 * g.dx)
    assert np.all(w[1:-1] == g.dx)


def test_convolution_entries_nonnegative():
    g = build_grid(-4.0, 4.0, 0.05)
    for k in (tent(1.0), gaussian(0.7), truncated_gaussian(1.2)):
        W = assemble_convolution(k, g).entries
        assert W.shape == (g.n, g.n)
        assert np.all(W >= 0.0)
        assert np.all(np.isfinite(W))


def test_row_sums_match_exact_partial_mass_tent():
    # tent kernel with scale a multiple of dx: the integrand is piecewise
    # linear with kinks on grid nodes, so trapezoid sums are exact
    g = build_grid(-10.0, 10.0, 0.02)
    W = assemble_convolution(tent(1.0), g).entries
    sums = W @ np.ones(g.n)
    exact = partial_mass(tent(1.0), g, g.nodes)
    assert np.max(np.abs(sums - exact)) < 1e-12
    # deep interior: full mass; endpoint of a wide interval: half mass
    assert sums[g.n // 2] == pytest.approx(1.0, abs=1e-12)
    assert sums[0] == pytest.approx(0.5, abs=1e-12)
    assert sums[-1] == pytest.approx(0.5, abs=1e-12)


def test_row_sum_error_is_second_order():
    k = truncated_gaussian(1.0)
    errs = []
    for dx in (0.1, 0.05, 0.025):
        g = build_grid(-5.0, 5.0, dx)
        sums = assemble_convolution(k, g).entries @ np.ones(g.n)
        errs.append(np.max(np.abs(sums - partial_mass(k, g, g.nodes))))
    # halving dx should cut the error by about 4
    assert errs[0] / errs[1] > 3.0
    assert errs[1] / errs[2] > 3.0


def test_coefficients_sign_validation():
    Coefficients(a11=1.0, a12=2.0, a21=1.0, a22=1.0, b1=2.0, b2=2.0)
    Coefficients(a11=0.0, a12=2.0, a21=1.0, a22=0.0, b1=2.0, b2=2.0)
    with pytest.raises(ValueError):
        Coefficients(a11=-1.0, a12=2.0, a21=1.0, a22=1.0, b1=2.0, b2=2.0)
    with pytest.raises(ValueError):
        Coefficients(a11=1.0, a12=0.0, a21=1.0, a22=1.0, b1=2.0, b2=2.0)
    with pytest.raises(ValueError):
        Coefficients(a11=1.0, a12=2.0, a21=1.0, a22=1.0, b1=2.0, b2=0.0)


def _random_operator(rng, n_target=41):
    g = build_grid(-2.0, 2.0, 4.0 / (n_target - 1))
    coeffs = Coefficients(
        a11=rng.uniform(0.0, 3.0),
        a12=rng.uniform(0.1, 3.0),
        a21=rng.uniform(0.1, 3.0),
        a22=rng.uniform(0.0, 3.0),
        b1=rng.uniform(0.1, 3.0),
        b2=rng.uniform(0.1, 3.0),
    )
    kernels = (tent(1.0), gaussian(0.8), tent(1.3), truncated_gaussian(0.9))
    return assemble_block_operator(coeffs, kernels, g)


def test_apply_agrees_with_dense_matrix():
    rng = np.random.default_rng(20240818)
    for _ in range(10):
        op = _random_operator(rng)
        phi = rng.standard_normal(2 * op.n)
        out1, out2 = op.apply(phi[: op.n], phi[op.n :])
        stacked = op.as_matrix() @ phi
        assert np.max(np.abs(np.concatenate([out1, out2]) - stacked)) < 1e-12
        assert np.max(np.abs(op.apply_stacked(phi) - stacked)) < 1e-12


def test_shared_kernel_gives_identical_blocks():
    g = build_grid(-2.0, 2.0, 0.1)
    coeffs = Coefficients(a11=1.0, a12=1.0, a21=1.0, a22=1.0, b1=1.0, b2=1.0)
    k = tent(1.0)
    op = assemble_block_operator(coeffs, (k, k, k, k), g)
    assert np.array_equal(op.block12, op.block11)
    assert np.array_equal(op.block21, op.block11)
    assert np.array_equal(op.block22, op.block11)


def test_constant_input_center_values():
    # deep inside a wide interval every kernel integrates to 1, so the
    # operator acts on constants as the coefficient matrix minus the sinks
    g = build_grid(-30.0, 30.0, 0.1)
    coeffs = Coefficients(a11=1.5, a12=2.0, a21=0.7, a22=0.4, b1=2.5, b2=1.4)
    k = tent(1.0)
    op = assemble_block_operator(coeffs, (k, k, k, k), g)
    ones = np.ones(g.n)
    out1, out2 = op.apply(ones, ones)
    mid = g.n // 2
    assert out1[mid] == pytest.approx(coeffs.a11 + coeffs.a12 - coeffs.b1, abs=1e-12)
    assert out2[mid] == pytest.approx(coeffs.a21 + coeffs.a22 - coeffs.b2, abs=1e-12)
