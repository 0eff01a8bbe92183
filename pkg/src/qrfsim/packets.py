"""Momentum-space wave packets on uniform 1D grids.

All states are natively momentum-space amplitudes Phi(p); position-space
quantities are obtained from phase derivatives or explicit Fourier sums, never
by FFT round trips.  Conventions (hbar = c = 1):

    psi(x) = (2*pi)**-0.5 * Integral Phi(p) exp(+i p x) dp
    x_hat  = +i d/dp      (a packet located at x0 carries the phase exp(-i p x0))

Expectations use a composite Simpson rule expressed as a weight vector so that
normalisation, moments and Fourier sums all share one quadrature convention.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import GridTooNarrow, NonFiniteSample, NonPositiveWidth

DispersionRelation = Callable[[np.ndarray], np.ndarray]

DEFAULT_GRID_POINTS = 2048
#: Hard floor on grid half-width in units of the packet momentum width.
MIN_HALF_WIDTH_SIGMAS = 6.0
#: Width floor used when a caller asks for a delta-like packet (width 0).
DELTA_WIDTH_FRACTION = 1e-3


def simpson_weights(n: int, spacing: float) -> np.ndarray:
    """Composite-Simpson quadrature weights for n uniformly spaced samples.

    For an even sample count the final interval is closed with a trapezoid;
    the packets this library integrates decay to ~1e-16 there, so the
    lower-order patch is irrelevant in practice.
    """
    if n < 3:
        raise NonPositiveWidth(f"quadrature needs at least 3 samples, got {n}")
    w = np.zeros(n)
    m = n if n % 2 == 1 else n - 1
    w[0:m:2] = 2.0
    w[1:m:2] = 4.0
    w[0] = 1.0
    w[m - 1] = 1.0
    w *= spacing / 3.0
    if m != n:
        w[-2] += 0.5 * spacing
        w[-1] += 0.5 * spacing
    return w


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Strictly increasing, uniform momentum lattice (collinear axis)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size < 3:
            raise NonPositiveWidth("grid must be a 1D array of at least 3 points")
        steps = np.diff(pts)
        if np.any(steps <= 0):
            raise NonPositiveWidth("grid points must be strictly increasing")
        if np.max(np.abs(steps - steps[0])) > 1e-12 * max(abs(pts[0]), abs(pts[-1]), 1.0):
            raise NonPositiveWidth("grid spacing is not uniform")

    @property
    def spacing(self) -> float:
        return float(self.points[1] - self.points[0])

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def extent(self) -> tuple[float, float]:
        return float(self.points[0]), float(self.points[-1])

    def quad_weights(self) -> np.ndarray:
        return simpson_weights(self.size, self.spacing)

    def covers(self, center: float, half_width: float) -> bool:
        lo, hi = self.extent
        slack = 1e-12 * max(abs(lo), abs(hi), 1.0)
        return lo <= center - half_width + slack and hi >= center + half_width - slack

    @classmethod
    def linspace(cls, p_min: float, p_max: float, n: int = DEFAULT_GRID_POINTS) -> "MomentumGrid":
        return cls(np.linspace(p_min, p_max, n))

    @classmethod
    def centered(cls, center: float, half_width: float, n: int = DEFAULT_GRID_POINTS) -> "MomentumGrid":
        if half_width <= 0:
            raise NonPositiveWidth("grid half-width must be positive")
        return cls(np.linspace(center - half_width, center + half_width, n))


@dataclass(frozen=True, eq=False)
class WavePacket:
    """Complex amplitude Phi(p) sampled on a MomentumGrid, unit L2 norm."""

    grid: MomentumGrid
    amplitudes: np.ndarray
    mass: float
    center: float = 0.0   # descriptive metadata, not re-derived after evolution
    width: float = 0.0

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amp)
        if amp.shape != self.grid.points.shape:
            raise NonPositiveWidth("amplitude array does not match the grid")
        if not np.all(np.isfinite(amp.view(float))):
            raise NonFiniteSample("packet amplitudes contain NaN/inf")
        if self.mass <= 0:
            raise NonPositiveWidth("mass must be positive")
        n = self.norm()
        if abs(n - 1.0) > 1e-9:
            raise NonPositiveWidth(f"packet norm {n!r} differs from 1 beyond 1e-9")

    def norm(self) -> float:
        w = self.grid.quad_weights()
        return float(np.sqrt(np.sum(w * np.abs(self.amplitudes) ** 2).real))

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def with_amplitudes(self, amp: np.ndarray) -> "WavePacket":
        return replace(self, amplitudes=amp)


def make_gaussian(grid: MomentumGrid, center: float, width: float, mass: float,
                  x0: float = 0.0) -> WavePacket:
    """Gaussian packet whose momentum *density* has standard deviation `width`.

    width = 0 requests a delta-like packet and is replaced by the floor
    1e-3 * max(|center|, 1).  An optional position offset x0 is applied as the
    translation phase exp(-i p x0).
    """
    if width < 0:
        raise NonPositiveWidth("packet width must be >= 0")
    if width == 0.0:
        width = DELTA_WIDTH_FRACTION * max(abs(center), 1.0)
    if not grid.covers(center, MIN_HALF_WIDTH_SIGMAS * width):
        raise GridTooNarrow(
            f"grid {grid.extent} does not cover {center} +- 6*{width}")
    p = grid.points
    amp = np.exp(-((p - center) ** 2) / (4.0 * width ** 2)).astype(complex)
    if x0 != 0.0:
        amp = amp * np.exp(-1j * p * x0)
    w = grid.quad_weights()
    amp /= np.sqrt(np.sum(w * np.abs(amp) ** 2).real)
    return WavePacket(grid, amp, mass, center=center, width=width)


def from_function(grid: MomentumGrid, fn: Callable[[np.ndarray], np.ndarray],
                  mass: float) -> WavePacket:
    """Packet from an arbitrary amplitude function, normalised on the grid."""
    amp = np.asarray(fn(grid.points), dtype=complex)
    if not np.all(np.isfinite(amp.view(float))):
        raise NonFiniteSample("amplitude function produced NaN/inf on the grid")
    w = grid.quad_weights()
    n2 = np.sum(w * np.abs(amp) ** 2).real
    if n2 <= 0:
        raise NonPositiveWidth("amplitude function vanishes on the grid")
    d = np.abs(amp) ** 2 / n2
    c = float(np.sum(w * d * grid.points))
    s = float(np.sqrt(max(np.sum(w * d * (grid.points - c) ** 2), 0.0)))
    return WavePacket(grid, amp / np.sqrt(n2), mass, center=c, width=s)


def default_grid(center: float, width: float, n: int = DEFAULT_GRID_POINTS) -> MomentumGrid:
    """Grid spanning center +- 6 sigma, the library default for new packets."""
    if width == 0.0:
        width = DELTA_WIDTH_FRACTION * max(abs(center), 1.0)
    return MomentumGrid.centered(center, MIN_HALF_WIDTH_SIGMAS * width, n)


def expectation(packet: WavePacket, f: Callable[[np.ndarray], np.ndarray]) -> complex:
    """<f(p)> over the packet's momentum density."""
    vals = np.asarray(f(packet.grid.points))
    if not np.all(np.isfinite(np.abs(vals))):
        raise NonFiniteSample("observable produced NaN/inf on the grid")
    w = packet.grid.quad_weights()
    return complex(np.sum(w * vals * packet.density()))


def variance(packet: WavePacket, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """Var f(p); tiny negative round-off (> -1e-12) is clamped to zero."""
    mean = expectation(packet, f)
    var = expectation(packet, lambda p: np.abs(np.asarray(f(p)) - mean) ** 2).real
    if var < 0 and var > -1e-12:
        var = 0.0
    return float(var)


def evolve_free(packet: WavePacket, hamiltonian: DispersionRelation, t: float) -> WavePacket:
    """Apply the free phase exp(-i E(p) t) mode by mode."""
    e = np.asarray(hamiltonian(packet.grid.points), dtype=float)
    if not np.all(np.isfinite(e)):
        raise NonFiniteSample("dispersion relation produced NaN/inf on the grid")
    return packet.with_amplitudes(packet.amplitudes * np.exp(-1j * e * t))


def _derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central differences, second-order one-sided at the edges."""
    d = np.empty_like(values)
    d[2:-2] = (values[:-4] - 8 * values[1:-3] + 8 * values[3:-1] - values[4:]) / (12 * h)
    d[0] = (-3 * values[0] + 4 * values[1] - values[2]) / (2 * h)
    d[1] = (values[2] - values[0]) / (2 * h)
    d[-2] = (values[-1] - values[-3]) / (2 * h)
    d[-1] = (3 * values[-1] - 4 * values[-2] + values[-3]) / (2 * h)
    return d


def derivative_roughness(packet: WavePacket) -> float:
    """Relative disagreement between 2nd- and 4th-order stencils (quality gauge)."""
    h = packet.grid.spacing
    amp = packet.amplitudes
    d4 = _derivative(amp, h)
    d2 = np.gradient(amp, h)
    scale = np.linalg.norm(d4)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(d4 - d2) / scale)


def position_mean(packet: WavePacket) -> float:
    """<x> = Re Integral Phi* (i dPhi/dp) dp  (phase-derivative centroid)."""
    w = packet.grid.quad_weights()
    d = _derivative(packet.amplitudes, packet.grid.spacing)
    return float(np.sum(w * np.conj(packet.amplitudes) * 1j * d).real)


def position_variance(packet: WavePacket) -> float:
    """Var x via <x^2> = Integral |dPhi/dp|^2 dp."""
    w = packet.grid.quad_weights()
    d = _derivative(packet.amplitudes, packet.grid.spacing)
    x2 = float(np.sum(w * np.abs(d) ** 2).real)
    var = x2 - position_mean(packet) ** 2
    if var < 0 and var > -1e-12:
        var = 0.0
    return var


def sym_xp_covariance(packet: WavePacket) -> float:
    """Symmetrised covariance <{x,p}>/2 - <x><p>; zero for real amplitudes."""
    w = packet.grid.quad_weights()
    p = packet.grid.points
    d = _derivative(packet.amplitudes, packet.grid.spacing)
    xphi = 1j * d
    sym = float(np.sum(w * np.conj(xphi) * p * packet.amplitudes).real)
    pbar = expectation(packet, lambda q: q).real
    return sym - position_mean(packet) * pbar


def position_wavefunction(packet: WavePacket, xs: np.ndarray) -> np.ndarray:
    """psi(x) on arbitrary sample points via the direct Fourier sum.

    Evaluated in blocks so the (n_x, n_p) kernel never exceeds ~16 MB.
    """
    xs = np.asarray(xs, dtype=float)
    weighted = packet.grid.quad_weights() * packet.amplitudes
    out = np.empty(xs.shape, dtype=complex)
    flat = xs.reshape(-1)
    block = max(1, (1 << 20) // packet.grid.size)
    for start in range(0, flat.size, block):
        chunk = flat[start:start + block]
        kernel = np.exp(1j * np.outer(chunk, packet.grid.points))
        out.reshape(-1)[start:start + block] = kernel @ weighted
    return out / np.sqrt(2.0 * np.pi)


def position_density(packet: WavePacket, xs: np.ndarray) -> np.ndarray:
    return np.abs(position_wavefunction(packet, xs)) ** 2


@dataclass(frozen=True, eq=False)
class ProductState:
    """Uncorrelated multi-body state: one packet per body, optional clock."""

    factors: tuple[WavePacket, ...]
    internal: object | None = None

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) < 1:
            raise NonPositiveWidth("a product state needs at least one factor")

    def joint_expectation(self, fs) -> complex:
        """Product of single-factor expectations <f1(p1)> * <f2(p2)> * ..."""
        if len(fs) != len(self.factors):
            raise NonPositiveWidth("one observable per factor required")
        out = complex(1.0)
        for packet, f in zip(self.factors, fs):
            out *= expectation(packet, f)
        return out
