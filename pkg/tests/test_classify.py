"""Tests for run classification and threshold searches."""

from __future__ import annotations

import math

import numpy as np
import pytest

from epifront.classify import (
    ABOVE,
    BELOW,
    NotApplicable,
    ProbeRecord,
    SPREADING,
    ThresholdResult,
    UNDECIDED,
    VANISHING,
    classify_run,
    find_d_star,
    find_mu_star,
    find_tau_star,
    vanishing_width_bound,
)
from epifront.critical import critical_length
from epifront.dynamics import cosine_initial_data, evolve_free
from epifront.kernels import gaussian, tent
from epifront.model import g_rational, shared_kernel_params


def _params(kernel, **overrides):
    base = dict(d1=1.0, d2=1.0, a=1.0, b=1.0, c=2.0,
                g=g_rational(1.0, 1.0), kernel=kernel)
    base.update(overrides)
    return shared_kernel_params(**base)


def _symmetric(kernel=None, **overrides):
    base = dict(d1=1.0, d2=1.0, a=1.0, b=1.0, c=math.sqrt(2.0),
                g=g_rational(1.0, math.sqrt(2.0)),
                kernel=kernel if kernel is not None else tent(1.0))
    base.update(overrides)
    return shared_kernel_params(**base)


# ---------------------------------------------------------------------------
# single-run verdicts
# ---------------------------------------------------------------------------

def test_wide_habitat_classified_spreading_immediately():
    p = _params(tent(1.0))
    l_star = critical_length(p).l_star
    traj = evolve_free(p, cosine_initial_data(0.6 * l_star), t_max=0.05,
                       profile_every=1)
    out = classify_run(traj, l_star, params=p)
    assert out.verdict == SPREADING
    assert out.evidence.final_width > l_star * 1.05
    assert out.evidence.central_deviation is not None


def test_subcritical_reproduction_vanishes_within_width_bound():
    p = _params(tent(1.0), c=0.5)
    assert p.r0 <= 1.0
    traj = evolve_free(p, cosine_initial_data(1.0), t_max=150.0,
                       stop_sup=0.5e-8)
    out = classify_run(traj, np.inf)
    assert out.verdict == VANISHING
    wb = vanishing_width_bound(traj, p)
    assert traj.width[-1] <= wb.bound
    assert wb.bound > wb.initial_width
    # the two normalizations genuinely differ here (c != b)
    assert wb.unweighted != wb.bound


def test_tiny_initial_mass_vanishes():
    p = _params(tent(1.0))
    l_star = critical_length(p).l_star
    assert 2.0 * 0.5 < l_star
    traj = evolve_free(p, cosine_initial_data(0.5, tau=1e-3), t_max=100.0,
                       stop_sup=0.5e-8)
    out = classify_run(traj, l_star)
    assert out.verdict == VANISHING
    assert out.evidence.final_sup < 1e-8


def test_short_horizon_is_undecided():
    p = _params(tent(1.0))
    l_star = critical_length(p).l_star
    traj = evolve_free(p, cosine_initial_data(0.7), t_max=0.5)
    assert classify_run(traj, l_star).verdict == UNDECIDED


def test_width_bound_infinite_without_diffusion():
    p = _params(tent(1.0), d1=0.0, c=0.5)
    traj = evolve_free(p, cosine_initial_data(1.0), t_max=1.0)
    assert vanishing_width_bound(traj, p).bound == np.inf


# ---------------------------------------------------------------------------
# threshold result validation
# ---------------------------------------------------------------------------

def _record(value, verdict, detail=0.0):
    return ProbeRecord(value=value, verdict=verdict, detail=detail)


def test_threshold_result_rejects_interleaved_audits():
    good = (_record(0.5, VANISHING), _record(2.0, SPREADING))
    ThresholdResult(parameter="tau", value=1.0, bracket=(0.5, 2.0), tol=0.1,
                    direction=ABOVE, runs=good)
    bad = (_record(0.5, SPREADING), _record(2.0, VANISHING))
    with pytest.raises(ValueError, match="interleaves"):
        ThresholdResult(parameter="tau", value=1.0, bracket=(0.5, 2.0),
                        tol=0.1, direction=ABOVE, runs=bad)
    # the same audits are consistent for the opposite orientation
    ThresholdResult(parameter="d1", value=1.0, bracket=(0.5, 2.0), tol=0.1,
                    direction=BELOW, runs=bad)
    with pytest.raises(ValueError, match="bracket"):
        ThresholdResult(parameter="tau", value=1.0, bracket=(2.0, 0.5),
                        tol=0.1, direction=ABOVE, runs=good)


# ---------------------------------------------------------------------------
# tau and mu searches (run-verdict bisection)
# ---------------------------------------------------------------------------

def test_find_tau_star_brackets_threshold():
    p = _params(gaussian(1.0))
    h0 = 0.3 * critical_length(p, dx=0.1).l_star
    res = find_tau_star(p, cosine_initial_data(h0), tol=0.05, dx=0.1)
    lo, hi = res.bracket
    assert hi - lo <= res.tol * hi
    assert lo < res.value < hi
    verdicts = {r.value: r.verdict for r in res.runs}
    assert verdicts[lo] == VANISHING and verdicts[hi] == SPREADING
    spread = [r.value for r in res.runs if r.verdict == SPREADING]
    vanish = [r.value for r in res.runs if r.verdict == VANISHING]
    assert max(vanish) < min(spread)


def test_find_tau_star_preconditions():
    with pytest.raises(ValueError, match="everywhere-positive"):
        find_tau_star(_params(tent(1.0)), cosine_initial_data(0.5))
    p = _params(gaussian(1.0))
    big = 0.8 * critical_length(p).l_star
    with pytest.raises(ValueError, match="spreading holds for every tau"):
        find_tau_star(p, cosine_initial_data(big))


def test_find_mu_star_brackets_threshold():
    p = _params(gaussian(1.0))
    h0 = 0.3 * critical_length(p, dx=0.1).l_star
    res = find_mu_star(p, cosine_initial_data(h0, tau=1.0), lambda m: m,
                       tol=0.05, dx=0.1)
    lo, hi = res.bracket
    assert hi - lo <= res.tol * hi
    verdicts = {r.value: r.verdict for r in res.runs}
    assert verdicts[lo] == VANISHING and verdicts[hi] == SPREADING


def test_find_mu_star_link_validation():
    p = _params(gaussian(1.0))
    init = cosine_initial_data(0.5)
    with pytest.raises(ValueError, match=r"f\(0\) = 0"):
        find_mu_star(p, init, lambda m: m + 1.0)
    with pytest.raises(ValueError, match="strictly increasing"):
        find_mu_star(p, init, lambda m: 0.0 * m)


# ---------------------------------------------------------------------------
# diffusion threshold
# ---------------------------------------------------------------------------

def test_find_d_star_locates_sign_change():
    p = _symmetric()
    res = find_d_star(p, h0=1.2)
    assert isinstance(res, ThresholdResult)
    assert res.direction == BELOW
    lo, hi = res.bracket
    assert hi - lo <= res.tol * hi
    by_value = sorted(res.runs, key=lambda r: r.value)
    lams = [r.detail for r in by_value]
    assert all(a > b for a, b in zip(lams, lams[1:]))
    assert by_value[0].detail > 0.0 > by_value[-1].detail


def test_find_d_star_certifies_spreading_below_threshold():
    import dataclasses
    p = _symmetric()
    res = find_d_star(p, h0=1.2)
    half = 0.5 * res.value
    p_half = dataclasses.replace(p, d1=half, d2=half)
    l_half = critical_length(p_half).l_star
    assert 2.4 > l_half
    traj = evolve_free(p_half, cosine_initial_data(1.2), t_max=80.0,
                       stop_width=l_half * 1.05 * 1.01)
    assert classify_run(traj, l_half).verdict == SPREADING


def test_find_d_star_not_applicable_cases():
    p = _symmetric()
    small = find_d_star(p, h0=0.3)
    assert isinstance(small, NotApplicable)
    assert "zero-diffusion" in small.reason
    sub = _symmetric(c=0.9, g=g_rational(1.0, 0.9))
    assert sub.r0 <= 1.0
    na = find_d_star(sub, h0=1.2)
    assert isinstance(na, NotApplicable)
    assert "R0" in na.reason


def test_find_d_star_rejects_asymmetric_coupling():
    with pytest.raises(ValueError, match="c = G'"):
        find_d_star(_params(tent(1.0)), h0=1.2)


# ---------------------------------------------------------------------------
# finite-horizon dichotomy coverage
# ---------------------------------------------------------------------------

def test_random_panel_reports_undecided_fraction():
    rng = np.random.default_rng(42)
    p = _params(tent(1.0))
    l_star = critical_length(p).l_star
    verdicts = []
    for _ in range(8):
        h0 = float(rng.uniform(0.15, 0.6)) * l_star
        tau = float(rng.uniform(0.05, 1.5))
        traj = evolve_free(p, cosine_initial_data(h0, tau=tau), t_max=300.0,
                           stop_width=l_star * 1.05 * 1.01, stop_sup=0.5e-8)
        verdicts.append(classify_run(traj, l_star).verdict)
    fraction = verdicts.count(UNDECIDED) / len(verdicts)
    # finite horizons leave a small ambiguous band; it must not dominate
    assert fraction <= 0.5
    assert SPREADING in verdicts and VANISHING in verdicts
