"""Dispersal kernels: even, nonnegative, unit-mass densities J on the line.

Families:
  - tent:                (1 - |x|/sigma)/sigma on [-sigma, sigma]; the default
  - truncated_gaussian:  Gaussian bump minus its edge value, support [-sigma, sigma]
                         (continuous at the support boundary)
  - gaussian:            untruncated normal density, positive on all of R
  - table:               piecewise-linear interpolation of sampled values,
                         clamped to 0 outside the sampled range

Every kernel carries a precomputed normalization so its total mass is 1.
The tail mass T(z) = integral of J over [z, inf) is available in closed form
for the analytic families and by exact piecewise-linear integration for
tabulated ones; the moving-front flux integrals are built on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import erf, exp, pi, sqrt

import numpy as np
from scipy import special

TENT = "tent"
TRUNCATED_GAUSSIAN = "truncated_gaussian"
GAUSSIAN = "gaussian"
TABLE = "table"

FAMILIES = (TENT, TRUNCATED_GAUSSIAN, GAUSSIAN, TABLE)

# Inner standard deviation of the truncated-gaussian bump, as a fraction of
# the support half-width.  1/3 keeps the subtracted edge value small
# (exp(-4.5) of the peak) while the bump still fills the support.
TG_INNER_SD_FRACTION = 1.0 / 3.0

# Relative level below which a gaussian is treated as zero by banded
# convolutions in the time steppers (far below quadrature noise).  The dense
# operator assembly never truncates.
GAUSSIAN_CUTOFF_REL = 1e-18


@dataclass(frozen=True)
class KernelSpec:
    """A validated-by-construction dispersal kernel.

    Attributes:
        family: one of FAMILIES.
        scale: support half-width sigma (tent, truncated_gaussian, table span)
            or standard deviation (gaussian).
        normalization: multiplier applied to the raw family shape so the
            total mass is 1.
        table_x, table_y: sample abscissae/values for the table family.
    """

    family: str
    scale: float
    normalization: float
    table_x: np.ndarray | None = None
    table_y: np.ndarray | None = None
    # tail mass at the table nodes, precomputed once (table family only)
    table_tail: np.ndarray | None = field(default=None, repr=False)


def tent(scale: float = 1.0) -> KernelSpec:
    """Triangular kernel (1 - |x|/scale)/scale on [-scale, scale]."""
    if scale <= 0:
        raise ValueError("kernel scale must be positive")
    return KernelSpec(family=TENT, scale=float(scale), normalization=1.0 / scale)


def gaussian(scale: float = 1.0) -> KernelSpec:
    """Normal density with standard deviation `scale`; positive on all of R."""
    if scale <= 0:
        raise ValueError("kernel scale must be positive")
    return KernelSpec(
        family=GAUSSIAN, scale=float(scale),
        normalization=1.0 / (scale * sqrt(2.0 * pi)),
    )


def _tg_raw_mass(sigma: float) -> float:
    """Mass of exp(-x^2/(2 s^2)) - exp(-sigma^2/(2 s^2)) over [-sigma, sigma]."""
    s = TG_INNER_SD_FRACTION * sigma
    edge = exp(-sigma * sigma / (2.0 * s * s))
    return s * sqrt(2.0 * pi) * erf(sigma / (s * sqrt(2.0))) - 2.0 * sigma * edge


def truncated_gaussian(scale: float = 1.0) -> KernelSpec:
    """Compactly supported Gaussian bump, continuous at +-scale."""
    if scale <= 0:
        raise ValueError("kernel scale must be positive")
    return KernelSpec(
        family=TRUNCATED_GAUSSIAN, scale=float(scale),
        normalization=1.0 / _tg_raw_mass(float(scale)),
    )


def tabulated(xs, ys) -> KernelSpec:
    """Kernel from samples, linearly interpolated, clamped to 0 outside.

    The samples are stored as given; defects (asymmetry, negative entries,
    mass away from 1 after normalization rounding) are caught by
    validate_kernel, not silently repaired.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
        raise ValueError("table must be two equal-length 1-d arrays with >= 2 samples")
    if not np.all(np.diff(xs) > 0):
        raise ValueError("table abscissae must be strictly increasing")
    raw_mass = float(np.trapezoid(ys, xs))
    if raw_mass <= 0 or not np.isfinite(raw_mass):
        raise ValueError("table mass must be positive and finite")
    norm = 1.0 / raw_mass
    # tail of the piecewise-linear interpolant at each node, from the right
    seg = 0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)
    tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]]) * norm
    scale = float(max(abs(xs[0]), abs(xs[-1])))
    return KernelSpec(
        family=TABLE, scale=scale, normalization=norm,
        table_x=xs, table_y=ys, table_tail=tail,
    )


def kernel_eval(k: KernelSpec, x) -> np.ndarray | float:
    """Evaluate J(x); accepts scalars or arrays.

    Analytic families are evaluated through |x|, so evenness is exact in
    floating point.
    """
    x = np.asarray(x, dtype=float)
    r = np.abs(x)
    if k.family == TENT:
        out = k.normalization * np.maximum(0.0, 1.0 - r / k.scale)
    elif k.family == GAUSSIAN:
        s = k.scale
        out = k.normalization * np.exp(-(r * r) / (2.0 * s * s))
    elif k.family == TRUNCATED_GAUSSIAN:
        s = TG_INNER_SD_FRACTION * k.scale
        edge = exp(-k.scale * k.scale / (2.0 * s * s))
        bump = np.exp(-(r * r) / (2.0 * s * s)) - edge
        out = k.normalization * np.where(r <= k.scale, np.maximum(bump, 0.0), 0.0)
    elif k.family == TABLE:
        out = k.normalization * np.interp(x, k.table_x, k.table_y, left=0.0, right=0.0)
    else:
        raise ValueError(f"unknown kernel family {k.family!r}")
    if out.ndim == 0:
        return float(out)
    return out


def kernel_mass(k: KernelSpec) -> float:
    """Total mass (exactly 1 up to rounding for factory-built kernels)."""
    if k.family == TENT:
        return k.normalization * k.scale
    if k.family == GAUSSIAN:
        return k.normalization * k.scale * sqrt(2.0 * pi)
    if k.family == TRUNCATED_GAUSSIAN:
        return k.normalization * _tg_raw_mass(k.scale)
    if k.family == TABLE:
        return k.normalization * float(np.trapezoid(k.table_y, k.table_x))
    raise ValueError(f"unknown kernel family {k.family!r}")


def kernel_tail_mass(k: KernelSpec, z) -> np.ndarray | float:
    """Tail mass T(z) = integral of J over [z, inf), in closed form.

    T is nonincreasing with T(-inf) = total mass and T(z) + T(-z) = mass
    (evenness).  For compact-support families T vanishes for z >= scale.
    """
    z = np.asarray(z, dtype=float)
    if k.family == TENT:
        sig = k.scale
        r = np.clip(np.abs(z), 0.0, sig)
        half = k.normalization * sig * 0.5 * (1.0 - r / sig) ** 2
        mass = k.normalization * sig
        out = np.where(z >= 0.0, half, mass - half)
    elif k.family == GAUSSIAN:
        s = k.scale
        out = k.normalization * s * sqrt(pi / 2.0) * special.erfc(z / (s * sqrt(2.0)))
    elif k.family == TRUNCATED_GAUSSIAN:
        sig = k.scale
        s = TG_INNER_SD_FRACTION * sig
        edge = exp(-sig * sig / (2.0 * s * s))
        r = np.clip(np.abs(z), 0.0, sig)
        half = k.normalization * (
            s * sqrt(pi / 2.0) * (erf(sig / (s * sqrt(2.0))) - special.erf(r / (s * sqrt(2.0))))
            - edge * (sig - r)
        )
        mass = k.normalization * _tg_raw_mass(sig)
        out = np.where(z >= 0.0, half, mass - half)
    elif k.family == TABLE:
        xs, ys, tails = k.table_x, k.table_y, k.table_tail
        zc = np.clip(z, xs[0], xs[-1])
        idx = np.clip(np.searchsorted(xs, zc, side="right") - 1, 0, xs.size - 2)
        x0, x1 = xs[idx], xs[idx + 1]
        y0, y1 = ys[idx], ys[idx + 1]
        yz = y0 + (zc - x0) * (y1 - y0) / (x1 - x0)
        # tail at z = tail at right node of its segment + remaining trapezoid
        out = tails[idx + 1] + k.normalization * 0.5 * (yz + y1) * (x1 - zc)
        out = np.where(z <= xs[0], tails[0], np.where(z >= xs[-1], 0.0, out))
    else:
        raise ValueError(f"unknown kernel family {k.family!r}")
    if out.ndim == 0:
        return float(out)
    return out


def support_radius(k: KernelSpec) -> float:
    """Half-width of the support (inf for the gaussian family)."""
    if k.family == GAUSSIAN:
        return float("inf")
    return k.scale


def effective_radius(k: KernelSpec) -> float:
    """Radius beyond which J is negligible relative to J(0).

    Equals the support radius for compact families; for the gaussian it is
    the radius where J drops below GAUSSIAN_CUTOFF_REL * J(0).  Used to size
    convolution bands in the time steppers.
    """
    if k.family == GAUSSIAN:
        return k.scale * sqrt(-2.0 * np.log(GAUSSIAN_CUTOFF_REL))
    return k.scale


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[KernelCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[KernelCheck]:
        return [c for c in self.checks if not c.passed]


def _mass_window(k: KernelSpec) -> tuple[float, float]:
    if k.family == GAUSSIAN:
        return -12.0 * k.scale, 12.0 * k.scale
    if k.family == TABLE:
        return float(k.table_x[0]), float(k.table_x[-1])
    return -k.scale, k.scale


def validate_kernel(k: KernelSpec, tol: float = 1e-8) -> ValidationReport:
    """Check the kernel conditions: even, nonnegative, J(0) > 0, unit mass.

    Returns a report with one entry per check; failures never raise here,
    but a failed report is expected to block downstream use.
    """
    checks: list[KernelCheck] = []
    rng = np.random.default_rng(20240817)
    radius = k.scale if k.family != TABLE else max(abs(k.table_x[0]), abs(k.table_x[-1]))
    xs = rng.uniform(-1.5 * radius, 1.5 * radius, size=1000)

    vals = np.asarray(kernel_eval(k, xs))
    mirrored = np.asarray(kernel_eval(k, -xs))
    finite = bool(np.all(np.isfinite(vals)))
    checks.append(KernelCheck("finite", finite,
                              "all sampled values finite" if finite else "non-finite value"))

    even_err = float(np.max(np.abs(vals - mirrored))) if finite else float("nan")
    even_tol = tol * max(1.0, float(np.max(np.abs(vals)))) if finite else 0.0
    even_ok = finite and even_err <= even_tol
    checks.append(KernelCheck("even", even_ok, f"max |J(x)-J(-x)| = {even_err:.3g}"))

    neg = float(np.min(vals)) if finite else float("nan")
    nonneg_ok = finite and neg >= 0.0
    checks.append(KernelCheck("nonnegative", nonneg_ok, f"min sampled value = {neg:.3g}"))

    j0 = float(kernel_eval(k, 0.0))
    checks.append(KernelCheck("positive_at_zero", j0 > 0.0, f"J(0) = {j0:.6g}"))

    lo, hi = _mass_window(k)
    if k.family == TABLE:
        # trapezoid on the table nodes integrates the interpolant exactly
        mass = k.normalization * float(np.trapezoid(k.table_y, k.table_x))
    else:
        grid = np.linspace(lo, hi, 20001)
        mass = float(np.trapezoid(np.asarray(kernel_eval(k, grid)), grid))
    mass_ok = finite and abs(mass - 1.0) <= tol
    checks.append(KernelCheck("unit_mass", mass_ok, f"numerical mass = {mass:.12g}"))

    return ValidationReport(checks=tuple(checks))
