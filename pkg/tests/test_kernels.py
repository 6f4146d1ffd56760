import dataclasses

import numpy as np
import pytest

from epifront.kernels import (
    GAUSSIAN,
    TENT,
    TRUNCATED_GAUSSIAN,
    KernelSpec,
    effective_radius,
    gaussian,
    kernel_eval,
    kernel_mass,
    kernel_tail_mass,
    support_radius,
    tabulated,
    tent,
    truncated_gaussian,
    validate_kernel,
)


def analytic_kernels():
    return [tent(1.0), tent(2.5), truncated_gaussian(1.0), gaussian(0.5)]


def test_tent_point_values():
    k = tent(1.0)
    assert kernel_eval(k, 0.0) == 1.0
    assert kernel_eval(k, 0.5) == 0.5
    assert kernel_eval(k, -0.5) == 0.5
    assert kernel_eval(k, 2.0) == 0.0


def test_tent_tail_values():
    k = tent(1.0)
    assert kernel_tail_mass(k, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert kernel_tail_mass(k, 1.0) == 0.0
    assert kernel_tail_mass(k, 0.5) == pytest.approx(0.125, abs=1e-15)
    assert kernel_tail_mass(k, -1.0) == pytest.approx(1.0, abs=1e-15)
    assert kernel_tail_mass(k, -5.0) == pytest.approx(1.0, abs=1e-15)


def test_eval_is_exactly_even():
    # analytic families evaluate through |x|, so this is exact equality
    rng = np.random.default_rng(7)
    for k in analytic_kernels():
        xs = rng.uniform(-3 * k.scale, 3 * k.scale, size=1000)
        a = np.asarray(kernel_eval(k, xs))
        b = np.asarray(kernel_eval(k, -xs))
        assert np.array_equal(a, b)


def test_eval_nonnegative_and_positive_at_zero():
    rng = np.random.default_rng(8)
    for k in analytic_kernels():
        xs = rng.uniform(-3 * k.scale, 3 * k.scale, size=1000)
        assert np.all(np.asarray(kernel_eval(k, xs)) >= 0.0)
        assert kernel_eval(k, 0.0) > 0.0


def test_unit_mass_all_families():
    for k in analytic_kernels():
        assert kernel_mass(k) == pytest.approx(1.0, abs=1e-12)


def test_tail_monotone_and_complement():
    rng = np.random.default_rng(9)
    for k in analytic_kernels():
        zs = np.sort(rng.uniform(-2 * k.scale, 2 * k.scale, size=200))
        tails = np.asarray(kernel_tail_mass(k, zs))
        assert np.all(np.diff(tails) <= 1e-15)
        comp = tails + np.asarray(kernel_tail_mass(k, -zs))
        assert np.max(np.abs(comp - 1.0)) < 1e-12


def test_tail_derivative_is_minus_kernel():
    # d/dz T(z) = -J(z); central differences away from the tent kinks
    rng = np.random.default_rng(10)
    h = 1e-5
    for k in analytic_kernels():
        zs = rng.uniform(0.05, 0.9 * k.scale if np.isfinite(support_radius(k)) else 2.0,
                         size=100)
        zs = zs[np.abs(zs - k.scale) > 10 * h]
        fd = (np.asarray(kernel_tail_mass(k, zs - h))
              - np.asarray(kernel_tail_mass(k, zs + h))) / (2 * h)
        err = np.max(np.abs(fd - np.asarray(kernel_eval(k, zs))))
        assert err < 1e-7


def test_gaussian_tail_closed_form():
    from scipy.integrate import quad

    k = gaussian(0.7)
    assert kernel_tail_mass(k, 0.0) == pytest.approx(0.5, abs=1e-14)
    for z in np.linspace(-3, 3, 13):
        ref, _ = quad(lambda x: kernel_eval(k, x), z, z + 12 * k.scale,
                      epsabs=1e-13, limit=200)
        assert kernel_tail_mass(k, z) == pytest.approx(ref, abs=1e-11)


def test_truncated_gaussian_is_continuous_at_edge():
    k = truncated_gaussian(1.0)
    assert kernel_eval(k, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert kernel_eval(k, 1.0 - 1e-9) < 1e-7


def test_tabulated_matches_interpolant():
    base = tent(1.0)
    xs = np.linspace(-1.0, 1.0, 81)
    k = tabulated(xs, np.asarray(kernel_eval(base, xs)))
    assert kernel_mass(k) == pytest.approx(1.0, abs=1e-12)
    zs = np.linspace(-1.2, 1.2, 97)
    tail_tab = np.asarray(kernel_tail_mass(k, zs))
    tail_ref = np.asarray(kernel_tail_mass(base, zs))
    # the interpolant of the tent on its own kink grid is the tent itself
    assert np.max(np.abs(tail_tab - tail_ref)) < 1e-12


def test_support_and_effective_radius():
    assert support_radius(tent(2.0)) == 2.0
    assert support_radius(gaussian(1.0)) == np.inf
    assert effective_radius(tent(2.0)) == 2.0
    r = effective_radius(gaussian(1.0))
    assert 8.0 < r < 10.0
    assert kernel_eval(gaussian(1.0), r) < 1e-18 * kernel_eval(gaussian(1.0), 0.0) * 1.01


def test_validate_builtin_kernels_pass():
    for k in analytic_kernels():
        report = validate_kernel(k, tol=1e-8)
        assert report.ok, report.failures()


def test_validate_catches_negative_table_entry():
    xs = np.linspace(-1, 1, 21)
    ys = np.asarray(kernel_eval(tent(1.0), xs))
    ys[7] = -0.05
    report = validate_kernel(tabulated(xs, ys))
    names = {c.name for c in report.failures()}
    assert "nonnegative" in names


def test_validate_catches_doubled_normalization():
    k = tent(1.0)
    bad = dataclasses.replace(k, normalization=2.0 * k.normalization)
    report = validate_kernel(bad)
    failed = {c.name: c for c in report.failures()}
    assert "unit_mass" in failed
    assert "2" in failed["unit_mass"].detail


def test_validate_catches_asymmetric_table():
    xs = np.linspace(-1, 1, 21)
    ys = np.asarray(kernel_eval(tent(1.0), xs))
    ys[3] += 0.2  # break evenness on one side
    report = validate_kernel(tabulated(xs, ys))
    names = {c.name for c in report.failures()}
    assert "even" in names


def test_kernelspec_is_immutable():
    k = tent(1.0)
    with pytest.raises(dataclasses.FrozenInstanceError):
        k.scale = 2.0  # type: ignore[misc]
