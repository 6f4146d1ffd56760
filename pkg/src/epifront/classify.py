"""Spreading-vanishing verdicts and threshold searches.

A completed run is classified by two sufficient certificates:

* Spreading once the habitat width h - g exceeds L* (with a safety margin):
  vanishing forces the limiting width below the critical length, so
  crossing it settles the dichotomy.  Fronts only expand, so the final
  width is also the running maximum.
* Vanishing when the final sup-norm is below eps_v while the width stayed
  below L*.

Anything else is reported Undecided — an honest verdict for a finite
horizon, never coerced.

Thresholds in the initial mass (tau), the expansion capacities (mu1 with
mu2 linked), and the diffusion rates (d1 with d2 linked) are located by
monotone bisection: on run verdicts for tau and mu1, on the sign of the
principal eigenvalue over the initial habitat for d1.  Every probe is
recorded; an audit list that interleaved verdicts would disprove
monotonicity, so it is rejected rather than smoothed over.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .critical import (
    NoCriticalLength,
    critical_length,
    critical_length_zero_diffusion,
    lambda_p_of_length,
    min_kernel_scale,
    same_kernel,
)
from .dynamics import (
    InitialData,
    Trajectory,
    decay_rate_estimate,
    evolve_free,
)
from .kernels import GAUSSIAN
from .model import ModelParams, positive_equilibrium

SPREADING = "Spreading"
VANISHING = "Vanishing"
UNDECIDED = "Undecided"

DEFAULT_MARGIN = 0.05
DEFAULT_EPS_V = 1e-8
DEFAULT_T_MAX = 500.0
DEFAULT_REL_TOL = 1e-3
PARAMETER_CAP = 1e6
PARAMETER_FLOOR = 1e-9

# directions for ThresholdResult: which side of the value spreads
ABOVE = "spreading_at_or_above"
BELOW = "spreading_at_or_below"


class ThresholdSearchError(RuntimeError):
    """Bracketing or bisection could not be completed honestly."""


# ---------------------------------------------------------------------------
# single-run classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Evidence:
    final_width: float
    l_star: float
    final_sup: float
    decay_rate: float | None
    central_deviation: float | None


@dataclass(frozen=True)
class RunOutcome:
    verdict: str
    evidence: Evidence


def _central_deviation(traj: Trajectory, p: ModelParams) -> float | None:
    """Max deviation from (u*, v*) on the initial habitat, final 10% of run."""
    eq = positive_equilibrium(p)
    if not eq.exists or not traj.profiles:
        return None
    t_cut = traj.times[-1] - 0.1 * (traj.times[-1] - traj.times[0])
    worst = None
    for snap in traj.profiles:
        if snap.t < t_cut:
            continue
        sel = (snap.x >= traj.g[0]) & (snap.x <= traj.h[0])
        if not np.any(sel):
            continue
        dev = max(float(np.max(np.abs(snap.u[sel] - eq.u_star))),
                  float(np.max(np.abs(snap.v[sel] - eq.v_star))))
        worst = dev if worst is None else max(worst, dev)
    return worst


def classify_run(traj: Trajectory, l_star: float, *,
                 margin: float = DEFAULT_MARGIN,
                 eps_v: float = DEFAULT_EPS_V,
                 params: ModelParams | None = None) -> RunOutcome:
    """Verdict for a completed trajectory against the critical length l_star."""
    width_max = float(np.max(traj.width))
    final_sup = max(float(traj.sup_u[-1]), float(traj.sup_v[-1]))
    decay = None
    try:
        span = traj.times[-1] - traj.times[0]
        decay = decay_rate_estimate(
            traj, (traj.times[-1] - 0.3 * span, traj.times[-1]))
    except ValueError:
        pass

    if width_max > l_star * (1.0 + margin):
        verdict = SPREADING
    elif final_sup < eps_v and width_max < l_star:
        verdict = VANISHING
    else:
        verdict = UNDECIDED
    deviation = None
    if verdict == SPREADING and params is not None:
        deviation = _central_deviation(traj, params)
    return RunOutcome(verdict=verdict, evidence=Evidence(
        final_width=float(traj.width[-1]), l_star=float(l_star),
        final_sup=final_sup, decay_rate=decay, central_deviation=deviation))


@dataclass(frozen=True)
class WidthBound:
    """A-priori cap on the limiting habitat width when R0 <= 1.

    bound uses the weighted mass int [u0 + (c/b) v0] against the leakage
    rates (d1/mu1, c d2/(b mu2)); unweighted drops the c/b factors from
    both mass and rates.  The two normalizations differ whenever c != b;
    bound is the one backed by the dissipation identity, unweighted is
    reported alongside for comparison.
    """

    bound: float
    unweighted: float
    initial_width: float
    weighted_mass: float


def vanishing_width_bound(traj: Trajectory, p: ModelParams) -> WidthBound:
    width0 = float(traj.width[0])
    m_u, m_v = float(traj.mass_u[0]), float(traj.mass_v[0])
    if p.d1 <= 0.0 or p.d2 <= 0.0:
        return WidthBound(np.inf, np.inf, width0,
                          m_u + (p.c / p.b) * m_v)
    weighted = m_u + (p.c / p.b) * m_v
    rate = min(p.d1 / p.mu1, p.c * p.d2 / (p.b * p.mu2))
    plain_rate = min(p.d1 / p.mu1, p.d2 / p.mu2)
    return WidthBound(bound=width0 + weighted / rate,
                      unweighted=width0 + (m_u + m_v) / plain_rate,
                      initial_width=width0, weighted_mass=weighted)


# ---------------------------------------------------------------------------
# threshold results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeRecord:
    value: float
    verdict: str
    detail: float  # final sup-norm for run probes, lambda_p for eigen probes
    t_end: float | None = None


@dataclass(frozen=True)
class NotApplicable:
    reason: str


@dataclass(frozen=True)
class ThresholdResult:
    parameter: str
    value: float
    bracket: tuple[float, float]
    tol: float
    direction: str
    runs: tuple[ProbeRecord, ...]

    def __post_init__(self):
        lo, hi = self.bracket
        if not lo < hi:
            raise ValueError(f"bracket {self.bracket} is not ordered")
        spread = sorted(r.value for r in self.runs if r.verdict == SPREADING)
        vanish = sorted(r.value for r in self.runs if r.verdict == VANISHING)
        if spread and vanish:
            mixed = (vanish[-1] > spread[0] if self.direction == ABOVE
                     else spread[-1] > vanish[0])
            if mixed:
                raise ValueError(
                    f"audit list interleaves verdicts for {self.parameter}: "
                    "outcome is not monotone at this resolution")


# ---------------------------------------------------------------------------
# run-verdict bisection (tau and mu1)
# ---------------------------------------------------------------------------

def _verdict_bisection(parameter: str,
                       probe: Callable[[float, float], tuple[str, float, float]],
                       bracket0: tuple[float, float], tol: float,
                       t_max: float) -> tuple[float, tuple[float, float], list]:
    """Expand bracket0 until (lo vanishes, hi spreads), then bisect.

    probe(value, t_max) returns (verdict, final sup, end time); Undecided
    probes are retried once with a doubled horizon before giving up.
    """
    audits: list[ProbeRecord] = []

    def decide(value: float) -> str:
        verdict, sup, t_end = probe(value, t_max)
        if verdict == UNDECIDED:
            verdict, sup, t_end = probe(value, 2.0 * t_max)
        if verdict == UNDECIDED:
            raise ThresholdSearchError(
                f"run at {parameter} = {value:g} is Undecided even at "
                f"t_max = {2.0 * t_max:g}; refusing to guess")
        audits.append(ProbeRecord(value=value, verdict=verdict, detail=sup,
                                  t_end=t_end))
        return verdict

    lo, hi = float(bracket0[0]), float(bracket0[1])
    if not 0.0 < lo < hi:
        raise ValueError(f"bracket0 must satisfy 0 < lo < hi, got {bracket0}")
    # expand until both endpoints are certified by runs, keeping every
    # verdict: a spreading probe tightens hi, a vanishing probe lifts lo
    if decide(hi) == SPREADING:
        while True:
            if decide(lo) == VANISHING:
                break
            hi = lo
            lo /= 2.0
            if lo < PARAMETER_FLOOR:
                raise ThresholdSearchError(
                    f"no vanishing down to {parameter} = {PARAMETER_FLOOR:g}")
    else:
        lo = hi
        while True:
            hi *= 2.0
            if hi > PARAMETER_CAP:
                raise ThresholdSearchError(
                    f"no spreading up to {parameter} = {PARAMETER_CAP:g} "
                    f"(largest vanished value: {lo:g})")
            if decide(hi) == SPREADING:
                break
            lo = hi
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi) if hi < 4.0 * lo else float(np.sqrt(lo * hi))
        if decide(mid) == SPREADING:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi), (lo, hi), audits


def _probe_factory(l_star: float, margin: float, eps_v: float, dt, dx):
    """Common evolve-and-classify closure with decisive early stopping."""
    stop_width = l_star * (1.0 + margin) * 1.01

    def run(params: ModelParams, init: InitialData, t_max: float):
        traj = evolve_free(params, init, t_max, dt=dt, dx=dx,
                           stop_width=stop_width, stop_sup=0.5 * eps_v)
        outcome = classify_run(traj, l_star, margin=margin, eps_v=eps_v)
        sup = outcome.evidence.final_sup
        return outcome.verdict, sup, float(traj.times[-1])

    return run


def find_tau_star(p: ModelParams, init: InitialData,
                  bracket0: tuple[float, float] = (0.5, 2.0),
                  tol: float = DEFAULT_REL_TOL, *,
                  t_max: float = DEFAULT_T_MAX,
                  margin: float = DEFAULT_MARGIN,
                  eps_v: float = DEFAULT_EPS_V,
                  dt: float | None = None,
                  dx: float | None = None) -> ThresholdResult:
    """Initial-mass threshold: spreading for tau above, vanishing below.

    Requires the initial habitat to be subcritical (2 h0 < L*, otherwise
    every tau spreads) and everywhere-positive diagonal kernels, which is
    what makes large initial mass force spreading.
    """
    for name, k in (("k11", p.k11), ("k22", p.k22)):
        if k.family != GAUSSIAN:
            raise ValueError(
                f"tau threshold needs an everywhere-positive diagonal kernel; "
                f"{name} has family '{k.family}'")
    # verdicts compare widths against L*, so both must use the probe grid
    l_star = critical_length(p, dx=dx).l_star
    if 2.0 * init.h0 >= l_star:
        raise ValueError(
            f"initial habitat 2*h0 = {2.0 * init.h0:g} is not below "
            f"L* = {l_star:g}; spreading holds for every tau")
    runner = _probe_factory(l_star, margin, eps_v, dt, dx)

    def probe(tau: float, horizon: float):
        data = InitialData(h0=init.h0, theta1=init.theta1,
                           theta2=init.theta2, tau=tau)
        return runner(p, data, horizon)

    value, bracket, audits = _verdict_bisection("tau", probe, bracket0, tol,
                                                t_max)
    return ThresholdResult(parameter="tau", value=value, bracket=bracket,
                           tol=tol, direction=ABOVE, runs=tuple(audits))


def _check_link(f: Callable[[float], float], name: str) -> None:
    at0 = f(0.0)
    if abs(at0) > 1e-12:
        raise ValueError(f"{name} link must satisfy f(0) = 0, got {at0:g}")
    probes = [f(x) for x in (0.5, 1.0, 2.0)]
    if not (0.0 < probes[0] < probes[1] < probes[2]):
        raise ValueError(f"{name} link must be strictly increasing")


def find_mu_star(p: ModelParams, init: InitialData,
                 link: Callable[[float], float],
                 bracket0: tuple[float, float] = (0.5, 2.0),
                 tol: float = DEFAULT_REL_TOL, *,
                 t_max: float = DEFAULT_T_MAX,
                 margin: float = DEFAULT_MARGIN,
                 eps_v: float = DEFAULT_EPS_V,
                 dt: float | None = None,
                 dx: float | None = None) -> ThresholdResult:
    """Expansion-capacity threshold in mu1, with mu2 = link(mu1) per probe.

    Small capacities leak too little habitat to outrun decay (vanishing);
    large mu1 spreads.  Requires 2 h0 < L* so that both verdicts occur.
    """
    _check_link(link, "mu2")
    l_star = critical_length(p, dx=dx).l_star
    if 2.0 * init.h0 >= l_star:
        raise ValueError(
            f"initial habitat 2*h0 = {2.0 * init.h0:g} is not below "
            f"L* = {l_star:g}; spreading holds for every mu1")
    runner = _probe_factory(l_star, margin, eps_v, dt, dx)

    def probe(mu1: float, horizon: float):
        params = dataclasses.replace(p, mu1=mu1, mu2=link(mu1))
        return runner(params, init, horizon)

    value, bracket, audits = _verdict_bisection("mu1", probe, bracket0, tol,
                                                t_max)
    return ThresholdResult(parameter="mu1", value=value, bracket=bracket,
                           tol=tol, direction=ABOVE, runs=tuple(audits))


# ---------------------------------------------------------------------------
# diffusion threshold (eigenvalue sign)
# ---------------------------------------------------------------------------

def find_d_star(p: ModelParams, h0: float,
                link: Callable[[float], float] = lambda d: d,
                tol: float = DEFAULT_REL_TOL, *,
                dx: float | None = None) -> ThresholdResult | NotApplicable:
    """Diffusion threshold: spreading certified for d1 at or below d1*.

    The principal eigenvalue over the initial habitat is strictly
    decreasing along (d1, link(d1)), so its sign change locates the last
    diffusion rate whose eigenvalue is nonnegative — below it, spreading
    holds for every tau and mu.  Requires the symmetric coupling c = G'(0)
    with matching cross kernels.  When 2 h0 is at or below the
    zero-diffusion critical length, no diffusion rate certifies spreading
    and NotApplicable is returned.
    """
    gp = p.g.gprime0
    if abs(p.c - gp) > 1e-12 * max(1.0, p.c):
        raise ValueError(
            f"diffusion threshold requires c = G'(0), got c = {p.c:g}, "
            f"G'(0) = {gp:g}")
    if not same_kernel(p.k12, p.k21):
        raise ValueError("diffusion threshold requires matching cross kernels")
    _check_link(link, "d2")
    try:
        tilde = critical_length_zero_diffusion(p)
    except NoCriticalLength:
        return NotApplicable(
            reason=f"R0 = {p.r0:g} <= 1: vanishing for every d1")
    if 2.0 * h0 <= tilde.l_star:
        return NotApplicable(
            reason=f"2*h0 = {2.0 * h0:g} <= zero-diffusion critical length "
                   f"{tilde.l_star:g}: for any d1 > 0 both spreading and "
                   "vanishing may happen depending on the expansion "
                   "capacities")

    audits: list[ProbeRecord] = []
    if dx is None:
        dx = min_kernel_scale(p) / 20.0

    def lam(d1: float) -> float:
        params = dataclasses.replace(p, d1=d1, d2=link(d1))
        val = lambda_p_of_length(params, 2.0 * h0, dx)
        audits.append(ProbeRecord(
            value=d1, verdict=SPREADING if val >= 0.0 else VANISHING,
            detail=val))
        return val

    if lam(1.0) >= 0.0:
        lo, hi = 1.0, 2.0
        while lam(hi) >= 0.0:
            lo, hi = hi, 2.0 * hi
            if hi > PARAMETER_CAP:
                raise ThresholdSearchError(
                    f"eigenvalue still nonnegative at d1 = {PARAMETER_CAP:g}")
    else:
        lo, hi = 0.5, 1.0
        while lam(lo) < 0.0:
            lo, hi = 0.5 * lo, lo
            if lo < PARAMETER_FLOOR:
                raise ThresholdSearchError(
                    f"eigenvalue negative down to d1 = {PARAMETER_FLOOR:g}; "
                    "expected positivity near d1 = 0 when 2*h0 exceeds the "
                    "zero-diffusion critical length")
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi) if hi < 4.0 * lo else float(np.sqrt(lo * hi))
        if lam(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return ThresholdResult(parameter="d1", value=0.5 * (lo + hi),
                           bracket=(lo, hi), tol=tol, direction=BELOW,
                           runs=tuple(audits))
