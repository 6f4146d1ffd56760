"""Time integration: fixed-interval evolution and free-boundary fronts.

Both steppers share one discretization: a fixed master lattice x_j = j*dx,
trapezoid weights, and nonlocal terms evaluated as banded convolutions
against precomputed kernel tap tables (no dense matrices in the time loop).

The explicit Euler update is arranged as

    u_new = (1 - dt*(d1 + a)) * u + dt * (d1*(J11*u) + c*(J12*v))

— a sum of nonnegative terms whenever dt <= 0.5/max(d1+a, d2+b), so
nonnegativity is exact in floating point, not approximate.  Front motion
uses the closed-form kernel tail masses:

    h'(t) =  mu1 * int T11(h - x) u dx + mu2 * int T22(h - x) v dx
    g'(t) = -mu1 * int T11(x - g) u dx - mu2 * int T22(x - g) v dx

integrated by trapezoid over the active nodes plus the two off-lattice
front points (where u = v = 0).  Nodes newly covered by a front activate
at exactly zero, matching the extension of the solution by zero outside
the habitat.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .discretization import Grid
from .kernels import KernelSpec, effective_radius, kernel_eval, kernel_tail_mass
from .model import ModelParams, g_eval

# default dt = DT_FRACTION / max(d1+a, d2+b); hard stability gate at 0.5
DT_FRACTION = 0.1
DT_LIMIT = 0.5
SAMPLE_INTERVAL = 0.1  # target spacing of trajectory samples, in time units


class StepperError(RuntimeError):
    """An invariant failed during time stepping (a dt/dx defect)."""


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InitialData:
    """Initial habitat [-h0, h0] with profiles u0 = tau*theta1, v0 = tau*theta2.

    Each theta must be continuous, positive inside the habitat and zero at
    its endpoints; this is checked where the profiles are discretized.
    """

    h0: float
    theta1: Callable[[np.ndarray], np.ndarray]
    theta2: Callable[[np.ndarray], np.ndarray]
    tau: float = 1.0

    def __post_init__(self):
        if self.h0 <= 0:
            raise ValueError(f"h0 must be positive, got {self.h0:g}")
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau:g}")


def cosine_profile(h0: float) -> Callable[[np.ndarray], np.ndarray]:
    """The default hump cos(pi*x/(2*h0)): positive inside, zero at the ends."""
    def theta(x):
        return np.cos(np.pi * np.asarray(x) / (2.0 * h0))
    return theta


def cosine_initial_data(h0: float, tau: float = 1.0) -> InitialData:
    return InitialData(h0=h0, theta1=cosine_profile(h0),
                       theta2=cosine_profile(h0), tau=tau)


@dataclass(frozen=True)
class FreeBoundaryState:
    """One instant of a free-boundary run; x holds the active lattice nodes."""

    t: float
    g: float
    h: float
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class ProfileSnapshot:
    t: float
    g: float
    h: float
    x: np.ndarray
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Sampled run history; profiles are kept per cadence plus the final state."""

    times: np.ndarray
    g: np.ndarray
    h: np.ndarray
    sup_u: np.ndarray
    sup_v: np.ndarray
    mass_u: np.ndarray
    mass_v: np.ndarray
    dt: float
    dx: float
    stop_reason: str
    profiles: list = field(repr=False, default_factory=list)

    @property
    def width(self) -> np.ndarray:
        return self.h - self.g

    @property
    def final(self) -> ProfileSnapshot:
        return self.profiles[-1]


# ---------------------------------------------------------------------------
# shared stepping machinery
# ---------------------------------------------------------------------------

def default_dt(p: ModelParams) -> float:
    return DT_FRACTION / max(p.d1 + p.a, p.d2 + p.b)


def check_dt(p: ModelParams, dt: float) -> float:
    limit = DT_LIMIT / max(p.d1 + p.a, p.d2 + p.b)
    if dt <= 0 or dt > limit:
        raise ValueError(
            f"dt = {dt:g} violates the stability bound (0, {limit:g}]")
    return float(dt)


def invariant_rectangle(p: ModelParams, sup_u0: float, sup_v0: float) -> tuple[float, float]:
    """Componentwise bounds (K1, K2) preserved by the dynamics.

    Smallest corner at or above the initial sup-norms satisfying
    a*K1 >= c*K2 and b*K2 >= G(K1), fixed point of the monotone map
    K1 = max(sup_u0, c*K2/a), K2 = max(sup_v0, G(K1)/b).
    """
    k1, k2 = float(sup_u0), float(sup_v0)
    for _ in range(200_000):
        n1 = max(sup_u0, p.c * k2 / p.a)
        n2 = max(sup_v0, float(g_eval(p.g, n1)) / p.b)
        if abs(n1 - k1) <= 1e-13 * max(1.0, n1) and abs(n2 - k2) <= 1e-13 * max(1.0, n2):
            return n1, n2
        k1, k2 = n1, n2
    raise ArithmeticError("invariant-rectangle iteration failed to settle")


class _Taps:
    """Kernel tap tables for banded convolution on the master lattice."""

    def __init__(self, p: ModelParams, dx: float):
        self.tables = []
        for k in p.kernels:
            half = int(np.ceil(effective_radius(k) / dx))
            offsets = (np.arange(2 * half + 1) - half) * dx
            self.tables.append((half, np.asarray(kernel_eval(k, offsets))))

    def convolve(self, which: int, weighted: np.ndarray) -> np.ndarray:
        half, taps = self.tables[which]
        n = weighted.shape[0]
        return np.convolve(weighted, taps)[half:half + n]


def _euler_step(p: ModelParams, taps: _Taps, w: np.ndarray,
                u: np.ndarray, v: np.ndarray, dt: float):
    """One positivity-exact Euler update with quadrature weights w."""
    wu = w * u
    wv = w * v
    conv11 = taps.convolve(0, wu)
    conv12 = taps.convolve(1, wv)
    conv21 = taps.convolve(2, wu)
    conv22 = taps.convolve(3, wv)
    u_new = (1.0 - dt * (p.d1 + p.a)) * u + dt * (p.d1 * conv11 + p.c * conv12)
    v_new = (1.0 - dt * (p.d2 + p.b)) * v + dt * (
        p.d2 * conv22 + g_eval(p.g, conv21))
    return u_new, v_new


class _Recorder:
    """Accumulates trajectory samples and profile snapshots."""

    def __init__(self, dx: float, dt: float, sample_every: int,
                 profile_every: int | None):
        self.dx = dx
        self.dt = dt
        self.sample_every = sample_every
        self.profile_every = profile_every
        self.rows = []
        self.profiles = []

    def record(self, t, g, h, x, u, v, w, force_profile=False):
        self.rows.append((t, g, h,
                          float(u.max(initial=0.0)), float(v.max(initial=0.0)),
                          float(w @ u), float(w @ v)))
        want = (self.profile_every is not None
                and (len(self.rows) - 1) % self.profile_every == 0)
        if want or force_profile:
            self.profiles.append(ProfileSnapshot(
                t=t, g=g, h=h, x=x.copy(), u=u.copy(), v=v.copy()))

    def build(self, stop_reason: str) -> Trajectory:
        cols = list(zip(*self.rows))
        return Trajectory(
            times=np.asarray(cols[0]), g=np.asarray(cols[1]),
            h=np.asarray(cols[2]), sup_u=np.asarray(cols[3]),
            sup_v=np.asarray(cols[4]), mass_u=np.asarray(cols[5]),
            mass_v=np.asarray(cols[6]), dt=self.dt, dx=self.dx,
            stop_reason=stop_reason, profiles=self.profiles)


def _sample_cadence(dt: float, sample_every: int | None) -> int:
    if sample_every is not None:
        if sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        return int(sample_every)
    return max(1, round(SAMPLE_INTERVAL / dt))


# ---------------------------------------------------------------------------
# fixed interval
# ---------------------------------------------------------------------------

def evolve_fixed(p: ModelParams, grid: Grid, u0: np.ndarray, v0: np.ndarray,
                 t_max: float, dt: float | None = None,
                 sample_every: int | None = None,
                 profile_every: int | None = None) -> Trajectory:
    """Explicit Euler on the fixed interval of grid.

    Solutions from nonnegative data stay nonnegative exactly; with a
    positive principal eigenvalue they approach the positive steady state,
    otherwise they decay to zero at rate -lambda_p.
    """
    u = np.asarray(u0, dtype=float).copy()
    v = np.asarray(v0, dtype=float).copy()
    if u.shape != (grid.n,) or v.shape != (grid.n,):
        raise ValueError("initial data must match the grid")
    if np.any(u < 0.0) or np.any(v < 0.0):
        raise ValueError("initial data must be nonnegative")
    dt = default_dt(p) if dt is None else check_dt(p, dt)
    taps = _Taps(p, grid.dx)
    w = np.full(grid.n, grid.dx)
    w[0] = w[-1] = 0.5 * grid.dx

    steps = int(np.ceil(t_max / dt - 1e-12))
    cadence = _sample_cadence(dt, sample_every)
    rec = _Recorder(grid.dx, dt, cadence, profile_every)
    rec.record(0.0, grid.l1, grid.l2, grid.nodes, u, v, w)
    for k in range(1, steps + 1):
        u, v = _euler_step(p, taps, w, u, v, dt)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise StepperError(f"non-finite state at t = {k * dt:g}")
        if k % cadence == 0 or k == steps:
            rec.record(k * dt, grid.l1, grid.l2, grid.nodes, u, v, w,
                       force_profile=(k == steps))
    return rec.build("t_max")


def decay_rate_estimate(traj: Trajectory, window: tuple[float, float]) -> float:
    """Exponential decay rate fitted on log(sup_u + sup_v) over the window.

    Raises ValueError when the windowed history is not strictly decreasing
    (not in the decay regime) or has fewer than three samples.
    """
    t0, t1 = window
    sel = (traj.times >= t0) & (traj.times <= t1)
    ts = traj.times[sel]
    sup = traj.sup_u[sel] + traj.sup_v[sel]
    if ts.size < 3:
        raise ValueError("window contains fewer than 3 samples")
    if np.any(sup <= 0.0):
        raise ValueError("sup-norm hit zero inside the window; nothing to fit")
    if np.any(np.diff(sup) >= 0.0):
        raise ValueError("not in decay regime: sup-norm is not strictly "
                         "decreasing over the window")
    slope = np.polyfit(ts, np.log(sup), 1)[0]
    return float(-slope)


# ---------------------------------------------------------------------------
# free boundary
# ---------------------------------------------------------------------------

def _active_weights(x: np.ndarray, dx: float, g: float, h: float) -> np.ndarray:
    """Trapezoid weights over {g, x_0..x_{n-1}, h} with zero front values.

    End nodes pick up half of their fractional front cell in addition to
    half of their regular lattice cell.
    """
    w = np.full(x.shape[0], dx)
    w[0] = 0.5 * dx + 0.5 * (x[0] - g)
    w[-1] = 0.5 * dx + 0.5 * (h - x[-1])
    return w


def _front_rates(p: ModelParams, x, u, v, w, g, h):
    t11_h = kernel_tail_mass(p.k11, h - x)
    t22_h = kernel_tail_mass(p.k22, h - x)
    h_rate = p.mu1 * float(w @ (t11_h * u)) + p.mu2 * float(w @ (t22_h * v))
    t11_g = kernel_tail_mass(p.k11, x - g)
    t22_g = kernel_tail_mass(p.k22, x - g)
    g_rate = -p.mu1 * float(w @ (t11_g * u)) - p.mu2 * float(w @ (t22_g * v))
    return g_rate, h_rate


def boundary_flux(state: FreeBoundaryState, p: ModelParams) -> tuple[float, float]:
    """Front speeds (g', h') of the state: kernel tail mass against (u, v)."""
    if state.x.size < 2:
        raise ValueError("state needs at least two active nodes")
    dx = float(state.x[1] - state.x[0])
    w = _active_weights(state.x, dx, state.g, state.h)
    return _front_rates(p, state.x, state.u, state.v, w, state.g, state.h)


def discretize_initial_data(init: InitialData, dx: float):
    """Active nodes and profiles for the starting habitat (-h0, h0).

    Nodes lie on the master lattice j*dx strictly inside the habitat; the
    profiles are validated against the positivity/zero-endpoint conditions.
    """
    j_hi = int(np.ceil(init.h0 / dx - 1e-12)) - 1
    if j_hi < 1:
        raise ValueError(
            f"dx = {dx:g} too coarse for h0 = {init.h0:g}: "
            "need at least 3 active nodes")
    x = np.arange(-j_hi, j_hi + 1) * dx
    for name, theta in (("theta1", init.theta1), ("theta2", init.theta2)):
        ends = np.asarray(theta(np.array([-init.h0, init.h0])), dtype=float)
        if np.max(np.abs(ends)) > 1e-12:
            raise ValueError(f"{name} must vanish at the habitat endpoints")
        if np.any(np.asarray(theta(x), dtype=float) <= 0.0):
            raise ValueError(f"{name} must be positive inside the habitat")
    u = init.tau * np.asarray(init.theta1(x), dtype=float)
    v = init.tau * np.asarray(init.theta2(x), dtype=float)
    return x, u, v


def evolve_free(p: ModelParams, init: InitialData, t_max: float,
                dt: float | None = None, dx: float | None = None,
                sample_every: int | None = None,
                profile_every: int | None = None,
                stop_width: float | None = None,
                stop_sup: float | None = None) -> Trajectory:
    """Front-tracking run of the free-boundary system.

    Each step: (i) front speeds from the current state; (ii) advance g, h;
    (iii) activate master-lattice nodes newly inside (g, h) at exactly 0;
    (iv) Euler-update u, v on the new window.  Aborts with StepperError on
    any invariant breach (negativity, bound overshoot, front reversal).

    Optional stop rules end the run early: stop_width when h - g reaches
    the given width (spreading confirmed by front monotonicity), stop_sup
    when both sup-norms fall below the given level.
    """
    dt = default_dt(p) if dt is None else check_dt(p, dt)
    if dx is None:
        dx = min(k.scale for k in p.kernels) / 20.0
    x, u, v = discretize_initial_data(init, dx)
    g, h = -init.h0, init.h0
    j_lo = int(round(x[0] / dx))
    j_hi = int(round(x[-1] / dx))

    k1, k2 = invariant_rectangle(p, float(u.max()), float(v.max()))
    bound_slack = 1e-12
    taps = _Taps(p, dx)

    steps = int(np.ceil(t_max / dt - 1e-12))
    cadence = _sample_cadence(dt, sample_every)
    rec = _Recorder(dx, dt, cadence, profile_every)
    w = _active_weights(x, dx, g, h)
    rec.record(0.0, g, h, x, u, v, w)

    stop_reason = "t_max"
    for k in range(1, steps + 1):
        g_rate, h_rate = _front_rates(p, x, u, v, w, g, h)
        if g_rate > 0.0 or h_rate < 0.0:
            raise StepperError(f"front rates have wrong sign at t = {k * dt:g}")
        g_new = g + dt * g_rate
        h_new = h + dt * h_rate

        grow_lo = (int(np.ceil(-g_new / dx - 1e-12)) - 1) + j_lo
        grow_hi = (int(np.ceil(h_new / dx - 1e-12)) - 1) - j_hi
        if grow_lo > 0:
            x = np.concatenate([(np.arange(j_lo - grow_lo, j_lo)) * dx, x])
            u = np.concatenate([np.zeros(grow_lo), u])
            v = np.concatenate([np.zeros(grow_lo), v])
            j_lo -= grow_lo
        if grow_hi > 0:
            x = np.concatenate([x, (np.arange(j_hi + 1, j_hi + grow_hi + 1)) * dx])
            u = np.concatenate([u, np.zeros(grow_hi)])
            v = np.concatenate([v, np.zeros(grow_hi)])
            j_hi += grow_hi
        g, h = g_new, h_new

        w = _active_weights(x, dx, g, h)
        u, v = _euler_step(p, taps, w, u, v, dt)

        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise StepperError(f"non-finite state at t = {k * dt:g}")
        if np.any(u < -1e-12) or np.any(v < -1e-12):
            raise StepperError(f"negativity at t = {k * dt:g}")
        if u.max() > k1 + bound_slack or v.max() > k2 + bound_slack:
            raise StepperError(
                f"bound overshoot at t = {k * dt:g}: "
                f"sup u = {u.max():.6g} vs K1 = {k1:.6g}, "
                f"sup v = {v.max():.6g} vs K2 = {k2:.6g}")

        done = k == steps
        if stop_width is not None and h - g >= stop_width:
            stop_reason = "width"
            done = True
        if stop_sup is not None and u.max() < stop_sup and v.max() < stop_sup:
            stop_reason = "extinction"
            done = True
        if k % cadence == 0 or done:
            rec.record(k * dt, g, h, x, u, v, w, force_profile=done)
        if done:
            break
    return rec.build(stop_reason)


# ---------------------------------------------------------------------------
# mass balance audit
# ---------------------------------------------------------------------------

def _balance_sides(p: ModelParams, taps: _Taps, snap: ProfileSnapshot, dx: float):
    """Weighted mass and its instantaneous rate for one snapshot."""
    w = _active_weights(snap.x, dx, snap.g, snap.h)
    mass = float(w @ snap.u) + (p.c / p.b) * float(w @ snap.v)

    tails11 = (kernel_tail_mass(p.k11, snap.h - snap.x)
               + kernel_tail_mass(p.k11, snap.x - snap.g))
    tails22 = (kernel_tail_mass(p.k22, snap.h - snap.x)
               + kernel_tail_mass(p.k22, snap.x - snap.g))
    tails12 = (kernel_tail_mass(p.k12, snap.h - snap.x)
               + kernel_tail_mass(p.k12, snap.x - snap.g))
    leak = (-p.d1 * float(w @ (tails11 * snap.u))
            - (p.c * p.d2 / p.b) * float(w @ (tails22 * snap.v)))
    conv21 = taps.convolve(2, w * snap.u)
    reaction = (-p.a * float(w @ snap.u)
                + p.c * float(w @ ((1.0 - tails12) * snap.v))
                - p.c * float(w @ snap.v)
                + (p.c / p.b) * float(w @ g_eval(p.g, conv21)))
    return mass, leak + reaction, reaction


def reaction_mass_terms(traj: Trajectory, p: ModelParams) -> np.ndarray:
    """The signed reaction combination at each profile snapshot.

    Nonpositive at every instant when R0 <= 1 (the dissipation that forces
    vanishing).
    """
    taps = _Taps(p, traj.dx)
    return np.asarray([
        _balance_sides(p, taps, snap, traj.dx)[2] for snap in traj.profiles])


def mass_balance_check(traj: Trajectory, p: ModelParams) -> float:
    """Max defect of the weighted-mass identity across profile snapshots.

    Compares the finite-difference derivative of int [u + (c/b) v] between
    consecutive snapshots with the average of the identity's right side
    (front leakage plus reaction terms); the defect is O(dt + dx^2).
    """
    if len(traj.profiles) < 2:
        raise ValueError("need at least two profile snapshots")
    taps = _Taps(p, traj.dx)
    sides = [_balance_sides(p, taps, s, traj.dx) for s in traj.profiles]
    worst = 0.0
    for (m0, r0, _), (m1, r1, _), s0, s1 in zip(
            sides, sides[1:], traj.profiles, traj.profiles[1:]):
        span = s1.t - s0.t
        defect = abs((m1 - m0) / span - 0.5 * (r0 + r1))
        worst = max(worst, defect)
    return worst
