"""Discretized boundary-integral operators on a truncated wire.

The Birman-Schwinger reduction replaces the 3D eigenvalue problem at energy
-kappa^2 by a one-dimensional integral operator acting on functions of arc
length,

    Q_kappa = T_kappa + B_kappa ,

where T_kappa is the translation-invariant part (a Fourier multiplier, the
whole operator for a straight wire) and B_kappa is the bending kernel

    B_kappa(s, s') = exp(-kappa*rho)/(4 pi rho) - exp(-kappa*sigma)/(4 pi sigma),
    rho = |gamma(s) - gamma(s')|,  sigma = |s - s'| ,

which is pointwise >= 0 because rho <= sigma and x -> exp(-kappa x)/x is
decreasing.  A bound state of coupling alpha corresponds to an eigenvalue
lambda(kappa) = alpha of Q_kappa with kappa above the continuum edge.

Discretization:

* T_kappa is assembled spectrally, as a symmetric circulant on the midpoint
  grid of [-L, L] with exact eigenvalues m_kappa(p_n) on the grid momenta
  p_n = pi n / L.  This sidesteps the logarithmic on-diagonal renormalization
  of the position-space kernel entirely and makes the straight wire exactly
  solvable on the grid: the top eigenvalue is s_kappa to machine precision.
* B_kappa uses midpoint quadrature with uniform weight Delta = 2L/N and its
  diagonal set to 0, the continuous extension (the kernel vanishes linearly
  on the diagonal for C^2 curves, B(s, s+u) ~ k(s)^2 u / (96 pi)).

Free-line constants:

    m_kappa(p) = (1/2pi) (psi(1) + ln 2 - ln sqrt(p^2 + kappa^2))
    s_kappa    = m_kappa(0) = (1/2pi) (psi(1) - ln(kappa/2))
    kappa0(alpha) = 2 exp(psi(1) - 2 pi alpha)   (solves s_kappa = alpha)
    zeta0(alpha)  = -kappa0(alpha)^2             (continuum edge)

with psi(1) = -0.57721566490153286, the digamma function at 1 (minus the
Euler-Mascheroni constant).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .curve import Curve, StraightLine
from .errors import GeometryError, InvalidKernelError, SingularGeometryError

PSI_ONE = -0.57721566490153286
TWO_PI = 2.0 * math.pi

#: entries of an assembled bending matrix may dip this far below zero
#: before we call the kernel invalid (pure floating-point noise floor)
KERNEL_NEGATIVITY_TOL = 1e-14


@dataclass(frozen=True)
class GridSpec:
    """Midpoint grid on [-L, L]: nodes s_i = -L + (i + 1/2) Delta."""

    L: float
    N: int

    def __post_init__(self):
        if self.L <= 0:
            raise GeometryError("grid half-length L must be positive")
        if self.N <= 0 or self.N % 2 != 0:
            raise GeometryError("grid size N must be a positive even integer")

    @property
    def delta(self) -> float:
        return 2.0 * self.L / self.N

    @cached_property
    def nodes(self) -> np.ndarray:
        return -self.L + (np.arange(self.N) + 0.5) * self.delta

    @cached_property
    def momenta(self) -> np.ndarray:
        """Grid momenta pi*n/L, n = -N/2 .. N/2 - 1, in FFT ordering."""
        return TWO_PI * np.fft.fftfreq(self.N, d=self.delta)


@dataclass
class DiscretizedOperator:
    """Real symmetric finite section of T, B or Q on a grid."""

    grid: GridSpec
    kappa: float
    matrix: np.ndarray
    kind: str  # "T" | "B" | "Q"

    def __post_init__(self):
        if self.kind not in ("T", "B", "Q"):
            raise GeometryError(f"unknown operator kind {self.kind!r}")
        m = self.matrix
        if m.shape != (self.grid.N, self.grid.N):
            raise GeometryError("matrix shape does not match the grid")
        scale = float(np.max(np.abs(m))) or 1.0
        asym = float(np.max(np.abs(m - m.T)))
        if asym > 1e-12 * scale:
            raise InvalidKernelError(
                f"{self.kind} matrix asymmetry {asym:.3e} exceeds 1e-12 * {scale:.3e}")


def s_kappa(kappa) -> float:
    """Top of the free-line spectrum, (1/2pi)(psi(1) - ln(kappa/2))."""
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0):
        raise GeometryError("kappa must be positive")
    out = (PSI_ONE - np.log(kappa / 2.0)) / TWO_PI
    return float(out) if out.ndim == 0 else out


def kappa0(alpha: float) -> float:
    """Unique kappa with s_kappa = alpha."""
    return 2.0 * math.exp(PSI_ONE - TWO_PI * alpha)


def zeta0(alpha: float) -> float:
    """Continuum edge -4 exp(2(psi(1) - 2 pi alpha)) = -kappa0(alpha)^2."""
    return -(kappa0(alpha) ** 2)


def t_multiplier(p, kappa):
    """Fourier multiplier of the free-line operator.

    m_kappa(p) = (1/2pi)(psi(1) + ln 2 - ln sqrt(p^2 + kappa^2)); the value
    at p = 0 is s_kappa and the function decreases monotonically in |p|.
    """
    if kappa <= 0:
        raise GeometryError("kappa must be positive")
    p = np.asarray(p, dtype=float)
    out = (PSI_ONE + math.log(2.0) - 0.5 * np.log(p * p + kappa * kappa)) / TWO_PI
    return float(out) if out.ndim == 0 else out


def b_kernel(curve: Curve, s, sp, kappa):
    """Bending kernel value(s); 0 on the diagonal (continuous extension)."""
    if kappa <= 0:
        raise GeometryError("kappa must be positive")
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    sp_arr = np.atleast_1d(np.asarray(sp, dtype=float))
    s_arr, sp_arr = np.broadcast_arrays(s_arr, sp_arr)
    sigma = np.abs(s_arr - sp_arr)
    rho = np.asarray(curve.chord_between(s_arr, sp_arr)).reshape(sigma.shape)
    out = _kernel_from_distances(rho, sigma, kappa)
    if np.isscalar(s) and np.isscalar(sp):
        return float(out.ravel()[0])
    return out


def _kernel_from_distances(rho, sigma, kappa):
    coincident = (rho < 1e-12) & (sigma > 1e-9)
    if np.any(coincident):
        idx = np.argwhere(coincident)[0]
        raise SingularGeometryError(
            f"distinct parameters map to the same point (pair index {tuple(idx)}); "
            "the curve violates the chord-arc condition")
    off = sigma > 0
    out = np.zeros_like(sigma)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = (np.exp(-kappa * rho) / rho - np.exp(-kappa * sigma) / sigma) / (4.0 * math.pi)
    out[off] = vals[off]
    return out


def bending_kernel_matrix(curve: Curve, grid: GridSpec, kappa: float) -> np.ndarray:
    """Kernel values B_kappa(s_i, s_j) on the grid nodes (no quadrature weight)."""
    nodes = grid.nodes
    rho = curve.pairwise_chords(nodes)
    sigma = np.abs(nodes[:, None] - nodes[None, :])
    return _kernel_from_distances(rho, sigma, kappa)


def assemble_T(grid: GridSpec, kappa: float) -> DiscretizedOperator:
    """Symmetric circulant with eigenvalues m_kappa(p_n) on the grid momenta.

    The constant vector is an exact eigenvector with eigenvalue
    m_kappa(0) = s_kappa.
    """
    row = _t_first_row(grid, kappa)
    idx = np.arange(grid.N)
    matrix = row[(idx[:, None] - idx[None, :]) % grid.N]
    return DiscretizedOperator(grid=grid, kappa=float(kappa), matrix=matrix, kind="T")


def _t_first_row(grid: GridSpec, kappa: float) -> np.ndarray:
    m = t_multiplier(grid.momenta, kappa)
    row = np.fft.ifft(m).real
    # enforce row[d] == row[N-d] exactly
    rev = np.roll(row[::-1], 1)
    return 0.5 * (row + rev)


def assemble_B(curve: Curve, grid: GridSpec, kappa: float) -> DiscretizedOperator:
    """Midpoint-quadrature section of the bending kernel: Delta * B(s_i, s_j)."""
    if isinstance(curve, StraightLine):
        matrix = np.zeros((grid.N, grid.N))
    else:
        matrix = grid.delta * bending_kernel_matrix(curve, grid, kappa)
    return DiscretizedOperator(grid=grid, kappa=float(kappa), matrix=matrix, kind="B")


def assemble_Q(curve: Curve, grid: GridSpec, kappa: float) -> DiscretizedOperator:
    """Q = T + B."""
    t = assemble_T(grid, kappa)
    b = assemble_B(curve, grid, kappa)
    return DiscretizedOperator(grid=grid, kappa=float(kappa),
                               matrix=t.matrix + b.matrix, kind="Q")


def hs_norm(op: DiscretizedOperator) -> float:
    """Grid estimate of the Hilbert-Schmidt norm (integral of the squared
    kernel); for the midpoint matrix this is its Frobenius norm."""
    if op.kind != "B":
        raise InvalidKernelError("hs_norm is defined for bending operators only")
    return float(np.sqrt(np.sum(op.matrix ** 2)))


def schur_holmgren_norm(op: DiscretizedOperator) -> float:
    """Row-integral bound sup_s int B(s, s') ds' for a positive kernel: the
    largest row sum of the midpoint matrix.  Dominates the operator 2-norm."""
    if op.kind != "B":
        raise InvalidKernelError("schur_holmgren_norm is defined for bending operators only")
    if float(op.matrix.min()) < -KERNEL_NEGATIVITY_TOL:
        i, j = np.unravel_index(int(np.argmin(op.matrix)), op.matrix.shape)
        raise InvalidKernelError(
            f"kernel entry ({i}, {j}) = {op.matrix[i, j]:.3e} is negative beyond tolerance")
    return float(np.max(np.sum(op.matrix, axis=1)))


def dump_matrix(op: DiscretizedOperator, path) -> None:
    """Binary dump: 8-byte little-endian N header + row-major float64 data."""
    data = np.ascontiguousarray(op.matrix, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<q", op.grid.N))
        fh.write(data.tobytes())


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        (n,) = struct.unpack("<q", fh.read(8))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * n:
        raise InvalidKernelError(f"dump holds {data.size} values, expected {n}x{n}")
    return data.reshape(n, n).astype(float)


class OperatorCache:
    """Per-(curve, grid) assembly cache for repeated kappa sweeps.

    The geometry (pairwise chord and arc distances) is computed once; each
    kappa then costs two exponentials over the N x N arrays.
    """

    def __init__(self, curve: Curve, grid: GridSpec):
        self.curve = curve
        self.grid = grid
        self._straight = isinstance(curve, StraightLine)
        if not self._straight:
            nodes = grid.nodes
            self._rho = curve.pairwise_chords(nodes)
            self._sigma = np.abs(nodes[:, None] - nodes[None, :])
            self._off = self._sigma > 0

    def kernel_matrix(self, kappa: float) -> np.ndarray:
        if self._straight:
            return np.zeros((self.grid.N, self.grid.N))
        return _kernel_from_distances(self._rho, self._sigma, kappa)

    def q_matrix(self, kappa: float) -> np.ndarray:
        row = _t_first_row(self.grid, kappa)
        idx = np.arange(self.grid.N)
        q = row[(idx[:, None] - idx[None, :]) % self.grid.N]
        if not self._straight:
            q = q + self.grid.delta * self.kernel_matrix(kappa)
        return q
