"""Principal eigenvalues of nonlocal dispersal operators.

Covers:

* the coupled two-component operator (shifted power iteration with a
  deterministic squaring acceleration for small spectral gaps),
* scalar operators coeff*(conv - I) - sink*I and the base curve nu(l),
* whole-line closed forms lambda_A / theta_A and the five lambda curves
  available when all four kernels coincide,
* a Collatz-Wielandt style upper bound from any positive test pair.

Everything is deterministic: power iterations start from the all-ones
vector and involve no randomness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .discretization import (
    BlockOperator,
    Coefficients,
    Grid,
    assemble_convolution,
    build_grid,
    trapezoid_weights,
)
from .kernels import KernelSpec

DEFAULT_TOL = 1e-10
# switch from plain power steps to matrix squaring once the gap looks small
PLAIN_ITER_BUDGET = 2000
MAX_SQUARINGS = 60
# plain steps interleaved after each squaring: the squaring roundoff lands
# mostly in well-separated modes, which plain steps remove cheaply
POLISH_STEPS = 30
MAX_ITER = 100_000


class PowerIterationError(RuntimeError):
    """Raised when the eigen iteration fails to converge.

    This signals a degenerate discretization (e.g. a grid too coarse to
    separate the leading modes), not a property of the model.
    """

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class EigenResult:
    """Principal eigenpair of the coupled discrete operator.

    The eigenfunction (phi1, phi2) is positive at every node and scaled so
    the maximum over both components is 1.  residual is the max norm of
    L phi - lambda_p phi.
    """

    lambda_p: float
    phi1: np.ndarray
    phi2: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True)
class AsymptoticPair:
    """Whole-line eigenpair: (lambda_A I - A)(theta_A, 1)^T = 0."""

    lambda_A: float
    theta_A: float


# ---------------------------------------------------------------------------
# core iteration
# ---------------------------------------------------------------------------

def _principal_of_shifted(m: np.ndarray, shift: float, weights: np.ndarray,
                          tol: float, max_iter: int = MAX_ITER):
    """Principal eigenpair of the nonnegative matrix m, reported for m - shift*I.

    Plain power steps first; if those cannot close the residual within their
    budget (spectral gap too small), switches to repeated squaring of the
    normalized matrix, which doubles the effective iteration count per step.
    The returned vector is exactly the one whose residual passed the test.

    Returns (lam, phi, steps, residual) with phi > 0 and max(phi) = 1.
    """
    phi = np.ones(m.shape[0])
    wphi = None
    lam = 0.0
    residual = np.inf
    steps = 0

    def _estimate(vec):
        mv = m @ vec
        wv = weights * vec
        rho = (wv @ mv) / (wv @ vec)
        return rho - shift, float(np.max(np.abs(mv - rho * vec)))

    for steps in range(1, min(PLAIN_ITER_BUDGET, max_iter) + 1):
        mphi = m @ phi
        wv = weights * phi
        rho = (wv @ mphi) / (wv @ phi)
        lam = rho - shift
        residual = float(np.max(np.abs(mphi - rho * phi)))
        if residual <= tol * max(1.0, abs(lam)):
            return lam, phi, steps, residual
        top = float(mphi.max())
        if top <= 0.0 or not np.isfinite(top):
            raise PowerIterationError(
                f"power iteration collapsed at step {steps}", residual, steps)
        phi = mphi / top

    # squaring acceleration: b -> (b/max b)^2 tracks m^(2^k) up to scaling
    b = m / m.max()
    ones = np.ones(m.shape[0])
    for _ in range(MAX_SQUARINGS):
        b = b @ b
        top = float(b.max())
        if top <= 0.0 or not np.isfinite(top):
            raise PowerIterationError(
                f"squaring acceleration collapsed after {steps} steps",
                residual, steps)
        b /= top
        phi = b @ ones
        phi /= phi.max()
        for _ in range(POLISH_STEPS):
            phi = m @ phi
            phi /= phi.max()
        steps += 1
        lam, residual = _estimate(phi)
        if residual <= tol * max(1.0, abs(lam)):
            return lam, phi, steps, residual

    raise PowerIterationError(
        f"eigen iteration did not converge after {steps} steps "
        f"(last residual {residual:.3e}); the discretization is degenerate",
        residual, steps)


# ---------------------------------------------------------------------------
# coupled and scalar eigenproblems
# ---------------------------------------------------------------------------

def principal_eigenpair(op: BlockOperator, tol: float = DEFAULT_TOL) -> EigenResult:
    """Principal eigenpair of the coupled operator.

    Power iteration runs on M = L + s I with shift s = max(b1, b2) + 1,
    which is entrywise nonnegative with strictly positive diagonal (the
    kernels are positive at zero), so the leading eigenvector is positive
    and unique.  lambda_p = rho(M) - s.
    """
    c = op.coeffs
    s = max(c.b1, c.b2) + 1.0
    m = op.as_matrix()
    np.fill_diagonal(m, m.diagonal() + s)
    w = trapezoid_weights(op.grid)
    weights = np.concatenate([w, w])

    lam, phi, steps, residual = _principal_of_shifted(m, s, weights, tol)

    n = op.n
    phi1, phi2 = phi[:n].copy(), phi[n:].copy()
    if not (np.all(phi1 > 0.0) and np.all(phi2 > 0.0)):
        raise PowerIterationError(
            "principal eigenvector is not strictly positive; "
            "the discretized operator is not irreducible", residual, steps)
    floor = -min(c.b1, c.b2)
    if not lam > floor:
        raise PowerIterationError(
            f"lambda_p = {lam:.6g} fell below its lower bound {floor:.6g}",
            residual, steps)
    return EigenResult(lambda_p=float(lam), phi1=phi1, phi2=phi2,
                       iterations=steps, residual=residual)


def _scalar_kappa(k: KernelSpec, coeff: float, sink: float, g: Grid,
                  tol: float = DEFAULT_TOL) -> float:
    """Principal eigenvalue of coeff*(W - I) - sink*I without sign gating."""
    if coeff == 0.0:
        return float(-sink)  # operator is literally -sink * identity
    shift = coeff + sink + 1.0
    m = coeff * assemble_convolution(k, g).entries
    np.fill_diagonal(m, m.diagonal() + 1.0)  # = operator + shift*I
    lam, _, _, _ = _principal_of_shifted(m, shift, trapezoid_weights(g), tol)
    return float(lam)


def scalar_principal_eigenvalue(k: KernelSpec, coeff: float, sink: float,
                                g: Grid, tol: float = DEFAULT_TOL) -> float:
    """Principal eigenvalue kappa of coeff*(conv - I)phi - sink*phi = kappa*phi.

    Equals coeff*nu(l) - sink when the kernel and interval match the base
    curve's; in particular coeff = 0 gives exactly -sink.

    Args:
        k: dispersal kernel.
        coeff: dispersal rate, >= 0.
        sink: removal rate, > 0.
        g: collocation grid.
    """
    if coeff < 0:
        raise ValueError(f"coeff must be nonnegative, got {coeff:g}")
    if sink <= 0:
        raise ValueError(f"sink must be positive, got {sink:g}")
    return _scalar_kappa(k, coeff, sink, g, tol=tol)


def nu_curve(k: KernelSpec, l: float, dx: float, tol: float = DEFAULT_TOL) -> float:
    """Base eigenvalue nu(l) of conv - I on the symmetric interval of length l.

    nu(l) lies in (-1, 0), increases strictly with l, and tends to -1 as
    l -> 0 and to 0 as l -> infinity.
    """
    if l <= 0:
        raise ValueError(f"interval length must be positive, got {l:g}")
    g = build_grid(-0.5 * l, 0.5 * l, dx)
    return _scalar_kappa(k, 1.0, 0.0, g, tol=tol)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def lambda_A_closed_form(coeffs: Coefficients) -> AsymptoticPair:
    """Whole-line principal eigenvalue of the coefficient matrix.

    lambda_A is the larger root of the 2x2 matrix
    [[a11 - b1, a12], [a21, a22 - b2]]; theta_A = a12/(lambda_A - a11 + b1)
    makes (theta_A, 1) the corresponding positive eigenvector.
    """
    c = coeffs
    if not c.a12 * c.a21 > 0:
        raise ValueError("need a12 * a21 > 0")
    p = c.a11 - c.b1
    q = c.a22 - c.b2
    lam = 0.5 * (p + q + np.sqrt((p - q) ** 2 + 4.0 * c.a12 * c.a21))
    theta = c.a12 / (lam - p)
    scale = max(1.0, abs(lam), c.a12, c.a21)
    # defensive: (theta, 1) must solve both rows of the eigensystem
    r1 = (lam - p) * theta - c.a12
    r2 = c.a21 * theta + q - lam
    if max(abs(r1), abs(r2)) > 1e-12 * scale:
        raise ArithmeticError("closed-form eigenpair failed its own residual check")
    return AsymptoticPair(lambda_A=float(lam), theta_A=float(theta))


def closed_form_lambdas(nu_val: float, *, d1: float, d2: float, a: float,
                        b: float, c: float, gprime0: float):
    """The five closed-form eigenvalue curves for identical kernels.

    Given nu = nu(l) in (-1, 0), returns (lambda1, ..., lambda4, lambda_p):

        lambda1 = d1*nu - a + c*G'(0)/b
        lambda2 = d1*nu - a + (c*G'(0)/b)*(nu + 1)
        lambda3, lambda4, lambda_p =
            (A1 + A2 + sqrt((A2 - A1)^2 + 4*c*G'(0)*m)) / 2
            with A1 = d1*nu - a, A2 = d2*nu - b and
            m = 1, (nu + 1), (nu + 1)^2 respectively.

    lambda1 > lambda2 and lambda3 > lambda4 > lambda_p for every such nu;
    as nu -> 0 the last three all tend to the whole-line value lambda_A.
    """
    if not -1.0 < nu_val < 0.0:
        raise ValueError(f"nu_val must lie in (-1, 0), got {nu_val:g}")
    cg = c * gprime0
    lam1 = d1 * nu_val - a + cg / b
    lam2 = d1 * nu_val - a + (cg / b) * (nu_val + 1.0)
    a1 = d1 * nu_val - a
    a2 = d2 * nu_val - b

    def root(mass):
        return 0.5 * (a1 + a2 + np.sqrt((a2 - a1) ** 2 + 4.0 * cg * mass))

    lam3 = root(1.0)
    lam4 = root(nu_val + 1.0)
    lam_p = root((nu_val + 1.0) ** 2)
    return float(lam1), float(lam2), float(lam3), float(lam4), float(lam_p)


def upper_bound_from_test(op: BlockOperator, phi1: np.ndarray,
                          phi2: np.ndarray) -> float:
    """Upper bound for lambda_p from a positive test pair.

    For any strictly positive (phi1, phi2), the maximum over nodes and
    components of (L phi) / phi dominates lambda_p of the same discrete
    operator, with equality when phi is the principal eigenfunction.
    """
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    if phi1.shape != (op.n,) or phi2.shape != (op.n,):
        raise ValueError("test pair must match the operator grid")
    if not (np.all(phi1 > 0.0) and np.all(phi2 > 0.0)):
        raise ValueError("test pair must be strictly positive at every node")
    out1, out2 = op.apply(phi1, phi2)
    return float(max(np.max(out1 / phi1), np.max(out2 / phi2)))
