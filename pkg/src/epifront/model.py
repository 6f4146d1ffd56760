"""Model parameters, the infection response G, and the homogeneous equilibrium.

The two-component model couples an infectious-agent density u and an
infective-host density v:

    u_t = d1 * (J11*u - u) - a*u + c * J12*v
    v_t = d2 * (J22*v - v) - b*v + G(J21*u)

G must satisfy: G(0) = 0, G' > 0, G(z)/z strictly decreasing, and
lim G(z)/z below a*b/c.  The basic reproduction number is
R0 = c*G'(0)/(a*b); when R0 > 1 there is a unique positive spatially
homogeneous equilibrium (u*, v*) with G(u*)/u* = a*b/c and v* = a*u*/c.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .discretization import Coefficients
from .kernels import KernelSpec

RATIONAL = "rational"
TABLE = "table"

# sampling used to vet tabulated G against the monotonicity conditions
_G_CHECK_POINTS = 200


@dataclass(frozen=True)
class GFunction:
    """Infection response G.

    family "rational" is G(z) = beta*z/(1 + alpha*z) with alpha, beta > 0
    (derivative at zero: beta).  family "table" interpolates a sampled
    monotone response linearly, holding the last value beyond the table;
    gprime0 is the first-segment slope.
    """

    family: str
    alpha: float = 0.0
    beta: float = 0.0
    gprime0: float = 0.0
    table_z: np.ndarray | None = None
    table_g: np.ndarray | None = None


def g_rational(alpha: float, beta: float) -> GFunction:
    """Saturating response beta*z/(1 + alpha*z)."""
    if alpha <= 0 or beta <= 0:
        raise ValueError(f"alpha and beta must be positive, got {alpha:g}, {beta:g}")
    return GFunction(family=RATIONAL, alpha=float(alpha), beta=float(beta),
                     gprime0=float(beta))


def g_tabulated(zs, gs) -> GFunction:
    """Piecewise-linear response through (0,0) and the given samples."""
    zs = np.asarray(zs, dtype=float)
    gs = np.asarray(gs, dtype=float)
    if zs.ndim != 1 or zs.shape != gs.shape or zs.size < 2:
        raise ValueError("need matching 1-d sample arrays with at least 2 points")
    if not (zs[0] == 0.0 and gs[0] == 0.0):
        raise ValueError("table must start at G(0) = 0")
    if np.any(np.diff(zs) <= 0):
        raise ValueError("table abscissae must be strictly increasing")
    return GFunction(family=TABLE, gprime0=float(gs[1] / zs[1]),
                     table_z=zs.copy(), table_g=gs.copy())


def g_eval(g: GFunction, z):
    """Evaluate G at z (scalar or array), vectorized."""
    z = np.asarray(z, dtype=float)
    if g.family == RATIONAL:
        return g.beta * z / (1.0 + g.alpha * z)
    return np.interp(z, g.table_z, g.table_g)


def check_g(g: GFunction) -> list[str]:
    """Structural checks on G itself; returns human-readable failures.

    The remaining condition — lim G(z)/z below a*b/c — depends on the model
    and is checked by ModelParams.
    """
    problems = []
    if g.family == RATIONAL:
        # closed form: G' = beta/(1+alpha z)^2 > 0 and G/z = beta/(1+alpha z)
        # strictly decreasing hold for any positive alpha, beta
        if g.alpha <= 0 or g.beta <= 0:
            problems.append("rational G needs positive alpha and beta")
        return problems
    gs = g.table_g
    if np.any(np.diff(gs) <= 0):
        problems.append("tabulated G must be strictly increasing")
    ratios = gs[1:] / g.table_z[1:]
    if np.any(np.diff(ratios) >= 0):
        problems.append("tabulated G(z)/z must be strictly decreasing")
    if not np.all(np.isfinite(gs)):
        problems.append("tabulated G contains non-finite values")
    return problems


def g_ratio_limit(g: GFunction) -> float:
    """Limiting value of G(z)/z for large z (0 for the rational family)."""
    if g.family == RATIONAL:
        return 0.0
    # constant extension beyond the table drives the ratio to zero
    return 0.0


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Full parameter record: rates, infection response, kernels, front speeds."""

    d1: float
    d2: float
    a: float
    b: float
    c: float
    g: GFunction
    k11: KernelSpec
    k12: KernelSpec
    k21: KernelSpec
    k22: KernelSpec
    mu1: float = 1.0
    mu2: float = 1.0

    def __post_init__(self):
        problems = []
        if self.d1 < 0 or self.d2 < 0:
            problems.append(f"diffusion rates must be nonnegative (d1={self.d1:g}, d2={self.d2:g})")
        for name in ("a", "b", "c", "mu1", "mu2"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} = {getattr(self, name):g} must be positive")
        problems += check_g(self.g)
        if not problems and g_ratio_limit(self.g) >= self.a * self.b / self.c:
            problems.append("G(z)/z must fall below a*b/c for large z")
        if problems:
            raise ValueError("invalid model parameters: " + "; ".join(problems))

    @property
    def r0(self) -> float:
        """Basic reproduction number c*G'(0)/(a*b)."""
        return self.c * self.g.gprime0 / (self.a * self.b)

    @property
    def kernels(self) -> tuple[KernelSpec, KernelSpec, KernelSpec, KernelSpec]:
        return (self.k11, self.k12, self.k21, self.k22)

    def linearization(self) -> Coefficients:
        """Coefficients of the eigenproblem linearized at the extinct state."""
        return Coefficients(a11=self.d1, a12=self.c, a21=self.g.gprime0,
                            a22=self.d2, b1=self.d1 + self.a, b2=self.d2 + self.b)


def shared_kernel_params(d1: float, d2: float, a: float, b: float, c: float,
                         g: GFunction, kernel: KernelSpec,
                         mu1: float = 1.0, mu2: float = 1.0) -> ModelParams:
    """Convenience constructor with one kernel in every role."""
    return ModelParams(d1=d1, d2=d2, a=a, b=b, c=c, g=g,
                       k11=kernel, k12=kernel, k21=kernel, k22=kernel,
                       mu1=mu1, mu2=mu2)


# ---------------------------------------------------------------------------
# homogeneous equilibrium
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Equilibrium:
    """Positive homogeneous equilibrium; exists exactly when R0 > 1."""

    u_star: float
    v_star: float
    exists: bool


def positive_equilibrium(p: ModelParams) -> Equilibrium:
    """Solve G(u*)/u* = a*b/c, v* = a*u*/c.

    The rational family admits the closed form u* = (c*beta - a*b)/(a*b*alpha);
    tabulated responses are bisected on the strictly decreasing map
    z -> G(z)/z - a*b/c.  R0 <= 1 yields exists=False (not an error).
    """
    if p.r0 <= 1.0:
        return Equilibrium(u_star=0.0, v_star=0.0, exists=False)
    target = p.a * p.b / p.c
    if p.g.family == RATIONAL:
        u = (p.c * p.g.beta - p.a * p.b) / (p.a * p.b * p.g.alpha)
    else:
        lo = p.g.table_z[1] * 1e-12
        hi = p.g.table_z[1]
        while g_eval(p.g, hi) / hi > target:
            hi *= 2.0
            if hi > 1e18:
                raise ArithmeticError("equilibrium bracket search ran away")
        u = scipy.optimize.bisect(lambda z: g_eval(p.g, z) / z - target,
                                  lo, hi, xtol=1e-15)
    eq = Equilibrium(u_star=float(u), v_star=float(p.a * u / p.c), exists=True)
    defect = abs(g_eval(p.g, eq.u_star) / eq.u_star - target)
    if defect > 1e-12 * max(1.0, target):
        raise ArithmeticError(f"equilibrium residual {defect:.3e} out of tolerance")
    return eq
