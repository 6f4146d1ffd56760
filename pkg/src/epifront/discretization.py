"""Grids and trapezoid collocation of the nonlocal convolution operator.

A convolution term integral J(x - y) f(y) dy over [l1, l2] becomes a dense
matrix W with W[i, j] = w_j * J(x_i - x_j) on a uniform grid with trapezoid
weights w.  The coupled two-component operator

    (L phi)_1 = a11 W11 phi1 + a12 W12 phi2 - b1 phi1
    (L phi)_2 = a21 W21 phi1 + a22 W22 phi2 - b2 phi2

is assembled from four such blocks with the standing sign assumption
a12, a21, b1, b2 > 0 and a11, a22 >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import KernelSpec, kernel_eval, kernel_tail_mass

# grid sizing defaults: resolve the narrowest kernel and keep dense
# eigensolves desk-scale
DX_KERNEL_FRACTION = 1.0 / 20.0
DX_LENGTH_FRACTION = 1.0 / 200.0
N_MAX_DEFAULT = 4001


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [l1, l2] with n >= 3 nodes."""

    l1: float
    l2: float
    n: int
    dx: float
    nodes: np.ndarray


def build_grid(l1: float, l2: float, dx_target: float) -> Grid:
    """Smallest uniform grid whose spacing does not exceed dx_target.

    Rejects intervals shorter than 2 * dx_target (fewer than 3 nodes).
    """
    if dx_target <= 0:
        raise ValueError("dx_target must be positive")
    if not l1 < l2:
        raise ValueError("need l1 < l2")
    length = l2 - l1
    if length < 2.0 * dx_target:
        raise ValueError(
            f"interval of length {length:g} unresolvable at dx_target {dx_target:g}"
            " (needs at least 3 nodes)"
        )
    # small slack so an exactly divisible length is not bumped by rounding
    n = int(np.ceil(length / dx_target - 1e-9)) + 1
    nodes = np.linspace(l1, l2, n)
    return Grid(l1=float(l1), l2=float(l2), n=n, dx=length / (n - 1), nodes=nodes)


def auto_grid(l1: float, l2: float, scales, dx_target: float | None = None,
              n_max: int = N_MAX_DEFAULT) -> Grid:
    """Grid with the default sizing policy.

    dx resolves the narrowest kernel (scale/20) and the interval (length/200),
    then coarsens if needed so n stays within n_max.
    """
    length = l2 - l1
    if dx_target is None:
        smallest = min(float(s) for s in np.atleast_1d(scales))
        dx_target = min(smallest * DX_KERNEL_FRACTION, length * DX_LENGTH_FRACTION)
    dx_target = max(dx_target, length / (n_max - 1))
    # keep at least 3 nodes on very short intervals
    dx_target = min(dx_target, length / 2.0)
    return build_grid(l1, l2, dx_target)


def trapezoid_weights(g: Grid) -> np.ndarray:
    w = np.full(g.n, g.dx)
    w[0] = 0.5 * g.dx
    w[-1] = 0.5 * g.dx
    return w


@dataclass(frozen=True)
class ConvolutionMatrix:
    """Dense W[i, j] = w_j * J(x_i - x_j) for one kernel on one grid."""

    grid: Grid
    entries: np.ndarray


def assemble_convolution(k: KernelSpec, g: Grid) -> ConvolutionMatrix:
    diffs = g.nodes[:, None] - g.nodes[None, :]
    entries = np.asarray(kernel_eval(k, diffs)) * trapezoid_weights(g)[None, :]
    return ConvolutionMatrix(grid=g, entries=entries)


def partial_mass(k: KernelSpec, g: Grid, x) -> np.ndarray | float:
    """Exact integral of J(x - y) dy over [l1, l2], from the tail closed forms.

    This is what a row of the convolution matrix applied to the constant 1
    approximates; used as the quadrature-error oracle.
    """
    return kernel_tail_mass(k, np.asarray(x) - g.l2) - kernel_tail_mass(k, np.asarray(x) - g.l1)


@dataclass(frozen=True)
class Coefficients:
    """Coefficient record of the coupled operator.

    Standing assumption: a12, a21, b1, b2 > 0 and a11, a22 >= 0.
    """

    a11: float
    a12: float
    a21: float
    a22: float
    b1: float
    b2: float

    def __post_init__(self):
        problems = []
        if self.a11 < 0:
            problems.append(f"a11 = {self.a11:g} < 0")
        if self.a22 < 0:
            problems.append(f"a22 = {self.a22:g} < 0")
        for name in ("a12", "a21", "b1", "b2"):
            if getattr(self, name) <= 0:
                problems.append(f"{name} = {getattr(self, name):g} <= 0")
        if problems:
            raise ValueError("coefficient sign assumption violated: " + "; ".join(problems))


@dataclass(frozen=True)
class BlockOperator:
    """The discretized coupled operator; blocks carry the coefficients.

    block11 = a11 * W11 etc., so

        apply(phi)_1 = block11 @ phi1 + block12 @ phi2 - b1 * phi1
        apply(phi)_2 = block21 @ phi1 + block22 @ phi2 - b2 * phi2
    """

    grid: Grid
    block11: np.ndarray
    block12: np.ndarray
    block21: np.ndarray
    block22: np.ndarray
    coeffs: Coefficients

    @property
    def n(self) -> int:
        return self.grid.n

    def apply(self, phi1: np.ndarray, phi2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        out1 = self.block11 @ phi1 + self.block12 @ phi2 - self.coeffs.b1 * phi1
        out2 = self.block21 @ phi1 + self.block22 @ phi2 - self.coeffs.b2 * phi2
        return out1, out2

    def apply_stacked(self, phi: np.ndarray) -> np.ndarray:
        n = self.n
        out1, out2 = self.apply(phi[:n], phi[n:])
        return np.concatenate([out1, out2])

    def as_matrix(self) -> np.ndarray:
        """Dense (2n x 2n) matrix of the operator."""
        n = self.n
        eye = np.eye(n)
        top = np.hstack([self.block11 - self.coeffs.b1 * eye, self.block12])
        bot = np.hstack([self.block21, self.block22 - self.coeffs.b2 * eye])
        return np.vstack([top, bot])


def assemble_block_operator(coeffs: Coefficients,
                            kernels: tuple[KernelSpec, KernelSpec, KernelSpec, KernelSpec],
                            g: Grid) -> BlockOperator:
    """Build the coupled operator from (k11, k12, k21, k22) on grid g."""
    k11, k12, k21, k22 = kernels
    w11 = assemble_convolution(k11, g).entries
    w12 = assemble_convolution(k12, g).entries if k12 is not k11 else w11
    w21 = assemble_convolution(k21, g).entries if k21 not in (k11, k12) else (
        w11 if k21 is k11 else w12)
    w22 = assemble_convolution(k22, g).entries if k22 not in (k11, k12, k21) else (
        w11 if k22 is k11 else w12 if k22 is k12 else w21)
    return BlockOperator(
        grid=g,
        block11=coeffs.a11 * w11,
        block12=coeffs.a12 * w12,
        block21=coeffs.a21 * w21,
        block22=coeffs.a22 * w22,
        coeffs=coeffs,
    )
