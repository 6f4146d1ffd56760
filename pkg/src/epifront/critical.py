"""Critical habitat lengths from monotone eigenvalue curves.

The principal eigenvalue on a symmetric interval of length l increases
strictly and continuously from max(-b1, -b2) to the whole-line value
lambda_A, so when lambda_A > 0 it crosses zero at a unique critical
length L*.  Bisection is the entire method; brackets are certified by
sign.  Also covered: the zero-diffusion critical length (depends only on
the reaction part) and the shared-kernel comparison of the five
closed-form eigenvalue curves against the matrix eigenvalue.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .discretization import Coefficients, assemble_block_operator, build_grid
from .kernels import KernelSpec
from .model import ModelParams
from .spectral import (
    closed_form_lambdas,
    lambda_A_closed_form,
    nu_curve,
    principal_eigenpair,
)

BRACKET_CAP_FACTOR = 1e4  # stop doubling at l = 1e4 * sigma
DEFAULT_TOL_FACTOR = 1e-4  # bisection tolerance 1e-4 * sigma
DX_FRACTION = 1.0 / 20.0


class NoCriticalLength(ValueError):
    """The eigenvalue curve never crosses zero (R0 <= 1)."""


@dataclass(frozen=True)
class CriticalLengthResult:
    """Root of l -> lambda_p(l) with its certifying bracket.

    bracket = (l_lo, l_hi) with lambda_p(l_lo) < 0 < lambda_p(l_hi) and
    l_hi - l_lo <= tolerance; lambda_at_star records the eigenvalue at the
    returned midpoint (size ~ curve slope * tolerance / 2, not zero).
    curve_samples lists every (l, lambda_p) evaluated, sorted by l.
    """

    l_star: float
    bracket: tuple[float, float]
    tolerance: float
    lambda_at_star: float
    curve_samples: list = field(repr=False)


def same_kernel(k1: KernelSpec, k2: KernelSpec) -> bool:
    if (k1.family, k1.scale, k1.normalization) != (k2.family, k2.scale, k2.normalization):
        return False
    for a, b in ((k1.table_x, k2.table_x), (k1.table_y, k2.table_y)):
        if (a is None) != (b is None):
            return False
        if a is not None and not np.array_equal(a, b):
            return False
    return True


def min_kernel_scale(p: ModelParams) -> float:
    return min(k.scale for k in p.kernels)


def lambda_p_of_length(p: ModelParams, l: float, dx: float) -> float:
    """Matrix principal eigenvalue on the symmetric interval of length l."""
    g = build_grid(-0.5 * l, 0.5 * l, min(dx, l / 4.0))
    op = assemble_block_operator(p.linearization(), p.kernels, g)
    return principal_eigenpair(op).lambda_p


def _bisect_increasing(f, sigma: float, tol: float):
    """Root of an increasing curve f(l), bracketing by doubling from sigma.

    Returns (lo, hi, samples).  Raises NoCriticalLength if no sign change
    is found below the cap.
    """
    samples = []

    def probe(l):
        val = f(l)
        samples.append((l, val))
        return val

    l = sigma
    val = probe(l)
    if val < 0.0:
        lo = l
        while val < 0.0:
            l *= 2.0
            if l > BRACKET_CAP_FACTOR * sigma:
                raise NoCriticalLength(
                    "no critical length: curve still negative at "
                    f"l = {l / 2.0:g} (cap {BRACKET_CAP_FACTOR:g} * scale)")
            lo = l / 2.0
            val = probe(l)
        hi = l
    else:
        hi = l
        while val >= 0.0:
            l *= 0.5
            if l < 1e-6 * sigma:
                raise NoCriticalLength(
                    f"curve still nonnegative at l = {2.0 * l:g}; no crossing")
            hi = l * 2.0
            val = probe(l)
        lo = l

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if probe(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return lo, hi, samples


def critical_length(p: ModelParams, tol: float | None = None,
                    dx: float | None = None) -> CriticalLengthResult:
    """Habitat length at which the principal eigenvalue crosses zero.

    Requires lambda_A > 0 (equivalently R0 > 1); otherwise the curve stays
    negative for every length and NoCriticalLength is raised.  dx is held
    fixed across lengths so the sampled curve is internally consistent.
    """
    if lambda_A_closed_form(p.linearization()).lambda_A <= 0.0:
        raise NoCriticalLength(
            f"no critical length: lambda_p < 0 for all l (R0 = {p.r0:g} <= 1)")
    sigma = min_kernel_scale(p)
    tol = DEFAULT_TOL_FACTOR * sigma if tol is None else float(tol)
    dx = DX_FRACTION * sigma if dx is None else float(dx)

    lo, hi, samples = _bisect_increasing(
        lambda l: lambda_p_of_length(p, l, dx), sigma, tol)
    l_star = 0.5 * (lo + hi)
    lam_star = lambda_p_of_length(p, l_star, dx)
    samples.append((l_star, lam_star))
    samples.sort(key=lambda t: t[0])
    return CriticalLengthResult(l_star=l_star, bracket=(lo, hi), tolerance=tol,
                                lambda_at_star=lam_star, curve_samples=samples)


def critical_length_zero_diffusion(p: ModelParams, tol: float | None = None,
                                   dx: float | None = None) -> CriticalLengthResult:
    """Critical length of the pure-reaction operator (d1 = d2 = 0).

    Defined under the symmetric coupling c = G'(0) with a shared cross
    kernel; always below the diffusive critical length.
    """
    if abs(p.c - p.g.gprime0) > 1e-12 * max(1.0, p.c):
        raise ValueError("zero-diffusion critical length needs c = G'(0), "
                         f"got c = {p.c:g}, G'(0) = {p.g.gprime0:g}")
    if not same_kernel(p.k12, p.k21):
        raise ValueError("zero-diffusion critical length needs matching "
                         "cross kernels J12 = J21")
    frozen = dataclasses.replace(p, d1=0.0, d2=0.0)
    return critical_length(frozen, tol=tol, dx=dx)


# ---------------------------------------------------------------------------
# shared-kernel curve comparison
# ---------------------------------------------------------------------------

CURVE_NAMES = ("lambda1", "lambda2", "lambda3", "lambda4", "lambda_p")


@dataclass(frozen=True)
class Section4Row:
    l: float
    nu: float
    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    lambda_p_closed: float
    lambda_p_matrix: float


@dataclass(frozen=True)
class ComparisonReport:
    """Sampled curves, per-curve critical lengths, and ordering verdicts.

    critical_lengths maps curve name to its length or None; no_crossing
    explains each None.  pointwise_ok certifies lambda1 > lambda2 and
    lambda3 > lambda4 > lambda_p at every sampled l; lengths_ok certifies
    L1* < L2* and L3* < L4* < L* (None when some length is missing).
    max_closed_matrix_gap is the largest |closed-form - matrix| lambda_p.
    """

    rows: list
    critical_lengths: dict
    no_crossing: dict
    pointwise_ok: bool
    lengths_ok: bool | None
    max_closed_matrix_gap: float


def _curve_functions(p: ModelParams):
    kw = dict(d1=p.d1, d2=p.d2, a=p.a, b=p.b, c=p.c, gprime0=p.g.gprime0)

    def make(idx):
        return lambda nu: closed_form_lambdas(nu, **kw)[idx]

    return [make(i) for i in range(5)]


def _limit_values(p: ModelParams):
    """Curve limits as nu -> -1 and nu -> 0 (no crossing when one-signed)."""
    kw = dict(d1=p.d1, d2=p.d2, a=p.a, b=p.b, c=p.c, gprime0=p.g.gprime0)
    eps = 1e-12
    at_m1 = closed_form_lambdas(-1.0 + eps, **kw)
    at_0 = closed_form_lambdas(-eps, **kw)
    return at_m1, at_0


def section4_compare(p: ModelParams, l_values, tol: float | None = None,
                     dx: float | None = None) -> ComparisonReport:
    """Compare the five shared-kernel eigenvalue curves and their roots.

    Precondition: all four kernels identical.  For each l the base
    eigenvalue nu(l) feeds the closed forms, and the coupled matrix
    eigenvalue is computed independently as a cross-check.
    """
    k = p.k11
    if not all(same_kernel(k, other) for other in (p.k12, p.k21, p.k22)):
        raise ValueError("curve comparison requires one shared kernel")
    sigma = k.scale
    tol = DEFAULT_TOL_FACTOR * sigma if tol is None else float(tol)
    dx = DX_FRACTION * sigma if dx is None else float(dx)

    curves = _curve_functions(p)
    rows = []
    for l in sorted(float(x) for x in l_values):
        nu = nu_curve(k, l, min(dx, l / 4.0))
        lams = [f(nu) for f in curves]
        rows.append(Section4Row(
            l=l, nu=nu, lambda1=lams[0], lambda2=lams[1], lambda3=lams[2],
            lambda4=lams[3], lambda_p_closed=lams[4],
            lambda_p_matrix=lambda_p_of_length(p, l, dx)))

    at_m1, at_0 = _limit_values(p)
    lengths: dict = {}
    notes: dict = {}
    for name, f, lo_lim, hi_lim in zip(CURVE_NAMES, curves, at_m1, at_0):
        if hi_lim <= 0.0:
            lengths[name] = None
            notes[name] = f"stays negative (large-l limit {hi_lim:.6g})"
            continue
        if lo_lim >= 0.0:
            lengths[name] = None
            notes[name] = f"stays positive (small-l limit {lo_lim:.6g})"
            continue
        lo, hi, _ = _bisect_increasing(
            lambda l: f(nu_curve(k, l, min(dx, l / 4.0))), sigma, tol)
        lengths[name] = 0.5 * (lo + hi)

    pointwise_ok = all(
        r.lambda1 > r.lambda2 and r.lambda3 > r.lambda4 > r.lambda_p_closed
        for r in rows)
    if any(lengths[n] is None for n in CURVE_NAMES):
        lengths_ok = None
    else:
        lengths_ok = (lengths["lambda1"] < lengths["lambda2"]
                      and lengths["lambda3"] < lengths["lambda4"] < lengths["lambda_p"])
    gap = max((abs(r.lambda_p_closed - r.lambda_p_matrix) for r in rows),
              default=0.0)
    return ComparisonReport(rows=rows, critical_lengths=lengths,
                            no_crossing=notes, pointwise_ok=pointwise_ok,
                            lengths_ok=lengths_ok, max_closed_matrix_gap=gap)
