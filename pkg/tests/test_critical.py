"""Critical-length bisection and the shared-kernel curve comparison."""

import numpy as np
import pytest

from epifront.critical import (
    NoCriticalLength,
    critical_length,
    critical_length_zero_diffusion,
    lambda_p_of_length,
    section4_compare,
)
from epifront.kernels import gaussian, tent
from epifront.model import g_rational, shared_kernel_params
from epifront.spectral import nu_curve


def _p0(**overrides):
    base = dict(d1=1.0, d2=1.0, a=1.0, b=1.0, c=2.0,
                g=g_rational(1.0, 1.0), kernel=tent(1.0))
    base.update(overrides)
    return shared_kernel_params(**base)


def _symmetric(**overrides):
    # cross-symmetric variant keeping R0 = 2: c = G'(0) = sqrt(2)
    s2 = float(np.sqrt(2.0))
    return _p0(c=s2, g=g_rational(1.0, s2), **overrides)


def test_critical_length_bracket_certificate():
    res = critical_length(_p0())
    lo, hi = res.bracket
    assert lo < res.l_star < hi
    assert hi - lo <= res.tolerance
    sampled = dict(res.curve_samples)
    assert sampled[lo] < 0.0 < sampled[hi]
    # the eigenvalue at the midpoint is small on the curve's scale
    slope = (sampled[hi] - sampled[lo]) / (hi - lo)
    assert abs(res.lambda_at_star) <= 2.0 * slope * res.tolerance


def test_critical_length_matches_base_curve_root():
    # with one shared tent kernel, lambda_p(l) = (1+sqrt(2))*nu(l) + sqrt(2)-1,
    # so the critical length satisfies nu(L*) = -(3 - 2*sqrt(2))
    res = critical_length(_p0(), tol=1e-5)
    nu_at_root = nu_curve(tent(1.0), res.l_star, 0.05)
    assert abs(nu_at_root - (-(3.0 - 2.0 * np.sqrt(2.0)))) < 1e-3


def test_critical_length_stability():
    a = critical_length(_p0(), tol=1e-3)
    b = critical_length(_p0(), tol=1e-4)
    assert abs(a.l_star - b.l_star) < 1e-3
    c = critical_length(_p0(), tol=1e-4, dx=0.025)
    assert abs(b.l_star - c.l_star) < 1e-3


def test_no_critical_length_when_r0_small():
    with pytest.raises(NoCriticalLength):
        critical_length(_p0(c=0.5))


def test_zero_diffusion_length_below_diffusive():
    p = _symmetric()
    tilde = critical_length_zero_diffusion(p, tol=1e-4)
    assert tilde.l_star > 0.0
    for d in (0.25, 1.0, 4.0):
        full = critical_length(_symmetric(d1=d, d2=d), tol=1e-4)
        assert tilde.l_star < full.l_star


def test_critical_length_increasing_in_d1():
    vals = [critical_length(_symmetric(d1=d), tol=1e-4).l_star
            for d in (0.25, 1.0, 4.0)]
    assert vals[0] < vals[1] < vals[2]


def test_zero_diffusion_requires_symmetric_coupling():
    with pytest.raises(ValueError):
        critical_length_zero_diffusion(_p0())  # c=2, G'(0)=1
    p = _symmetric()
    asym = shared_kernel_params(p.d1, p.d2, p.a, p.b, p.c, p.g, tent(1.0))
    asym = type(asym)(**{**asym.__dict__, "k21": gaussian(1.0)})
    with pytest.raises(ValueError):
        critical_length_zero_diffusion(asym)


def test_section4_compare_orderings():
    p = _p0(c=1.5)  # documented comparison set: all five curves cross zero
    rep = section4_compare(p, np.linspace(0.5, 6.0, 8))
    assert rep.pointwise_ok
    assert rep.lengths_ok is True
    L = rep.critical_lengths
    assert L["lambda1"] < L["lambda2"]
    assert L["lambda3"] < L["lambda4"] < L["lambda_p"]
    assert rep.max_closed_matrix_gap < 5e-3
    assert rep.no_crossing == {}


def test_section4_reports_non_crossing_curves():
    # P0 itself: lambda1 = nu + 1 > 0 for every length, so no root exists
    rep = section4_compare(_p0(), [1.0, 2.0, 4.0])
    assert rep.critical_lengths["lambda1"] is None
    assert "stays positive" in rep.no_crossing["lambda1"]
    assert rep.lengths_ok is None


def test_section4_rejects_mixed_kernels():
    p = _p0()
    mixed = type(p)(**{**p.__dict__, "k22": gaussian(1.0)})
    with pytest.raises(ValueError):
        section4_compare(mixed, [1.0])


def test_lambda_p_of_length_matches_direct_assembly():
    from epifront.discretization import assemble_block_operator, build_grid
    from epifront.spectral import principal_eigenpair

    p = _p0()
    direct = principal_eigenpair(assemble_block_operator(
        p.linearization(), p.kernels, build_grid(-2.0, 2.0, 0.05))).lambda_p
    assert lambda_p_of_length(p, 4.0, 0.05) == direct
