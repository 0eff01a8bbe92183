"""Nonrelativistic quantum reference frames.

Jacobi canonical charts per frame body, the exchange operators connecting
them (dilatation * rotation * parity * dilatation), the infinite-mass
"absolute" frame limit, internal Hamiltonians, and the measurement-reduction
density matrix for a relative-position measurement.

Charts are plain linear maps over body indices: q = A r and pi = B p with
A B^T = 1 (canonical pairing).  Unitary frame changes act on amplitudes as
push-forwards through these maps with the |det|^(-1/2) Jacobian factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BadLabel,
    ChartMismatch,
    ConfigError,
    EmptyBin,
    NonPositiveWidth,
)
from .packets import ProductState, position_mean, position_variance, position_wavefunction

#: Mass ratio used to realize the infinite-mass frame body numerically.
ARF_MASS_RATIO = 1e8


@dataclass(frozen=True)
class Body:
    mass: float
    role: str = "frame"  # "frame" bodies can carry a chart; "particle" cannot

    def __post_init__(self):
        if not np.isfinite(self.mass) or self.mass <= 0:
            raise NonPositiveWidth(f"body mass must be positive and finite, got {self.mass}")
        if self.role not in ("frame", "particle"):
            raise ConfigError(f"unknown body role {self.role!r}")


@dataclass(frozen=True)
class FrameSystem:
    """Ordered collection of bodies; labels are 1-based body indices."""

    bodies: tuple[Body, ...]

    def __post_init__(self):
        object.__setattr__(self, "bodies", tuple(self.bodies))
        # one body alone is legal only as input to the infinite-mass frame limit
        if len(self.bodies) < 1:
            raise ConfigError("a frame system needs at least one body")

    @classmethod
    def from_masses(cls, masses: Sequence[float], roles: Sequence[str] | None = None) -> "FrameSystem":
        roles = roles or ["frame"] * len(masses)
        return cls(tuple(Body(m, r) for m, r in zip(masses, roles)))

    @property
    def size(self) -> int:
        return len(self.bodies)

    @property
    def masses(self) -> np.ndarray:
        return np.array([b.mass for b in self.bodies])

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())


@dataclass(frozen=True, eq=False)
class JacobiChart:
    """Canonical chart for one body ordering.

    ordering holds 1-based body labels, frame body first.  coord_map rows are
    chart coordinates, columns original body indices; the last row is the
    center of mass.  reduced_masses[i] weights row i's kinetic term (the last
    entry is the total mass).
    """

    ordering: tuple[int, ...]
    coord_map: np.ndarray
    momentum_map: np.ndarray
    reduced_masses: np.ndarray
    frame_label: int | None = None

    @property
    def size(self) -> int:
        return len(self.ordering)

    def pairing_matrix(self) -> np.ndarray:
        """{q_i, pi_j} assembled numerically; identity iff canonical."""
        return self.coord_map @ self.momentum_map.T


def chart_for_ordering(system: FrameSystem, ordering: Sequence[int],
                       frame_label: int | None = None) -> JacobiChart:
    """Jacobi chart for an explicit body ordering (1-based labels)."""
    n = system.size
    ordering = tuple(int(l) for l in ordering)
    if sorted(ordering) != list(range(1, n + 1)):
        raise BadLabel(f"ordering {ordering} is not a permutation of 1..{n}")
    masses = system.masses
    m_ord = masses[[l - 1 for l in ordering]]
    tails = np.concatenate((np.cumsum(m_ord[::-1])[::-1][1:], [0.0]))  # mass after position i
    total = float(m_ord.sum())

    a_ord = np.zeros((n, n))
    b_ord = np.zeros((n, n))
    mu = np.zeros(n)
    for i in range(n - 1):
        mu[i] = 1.0 / (1.0 / m_ord[i] + 1.0 / tails[i])
        a_ord[i, i] = -1.0
        a_ord[i, i + 1:] = m_ord[i + 1:] / tails[i]
        b_ord[i, i] = -mu[i] / m_ord[i]
        b_ord[i, i + 1:] = mu[i] / tails[i]
    mu[n - 1] = total
    a_ord[n - 1, :] = m_ord / total
    b_ord[n - 1, :] = 1.0

    cols = [l - 1 for l in ordering]
    a = np.zeros((n, n))
    b = np.zeros((n, n))
    a[:, cols] = a_ord
    b[:, cols] = b_ord
    return JacobiChart(ordering, a, b, mu, frame_label)


def frame_ordering(n: int, label: int) -> tuple[int, ...]:
    """Body ordering of frame `label`: the frame first, the rest in index order."""
    return (label,) + tuple(j for j in range(1, n + 1) if j != label)


def build_chart(system: FrameSystem, frame_label: int) -> JacobiChart:
    """Canonical chart attached to the given frame body."""
    n = system.size
    if not (1 <= frame_label <= n):
        raise BadLabel(f"frame label {frame_label} outside 1..{n}")
    if system.bodies[frame_label - 1].role != "frame":
        raise BadLabel(f"body {frame_label} has role 'particle' and cannot carry a frame")
    return chart_for_ordering(system, frame_ordering(n, frame_label), frame_label)


def exchange_angle(m1: float, m2: float, m3: float) -> float:
    """Rotation angle of the two-coordinate exchange block.

    m1, m2 are the swapped pair's masses; m3 is the total mass beyond the
    pair (0 when the pair sits at the tail, giving a pure parity).  Always
    in [-pi/2, 0].
    """
    if m1 <= 0 or m2 <= 0 or m3 < 0:
        raise NonPositiveWidth("exchange angle needs positive pair masses, nonnegative rest mass")
    c = np.sqrt(m2 * m1 / ((m3 + m2) * (m1 + m3)))
    return float(-np.arccos(np.clip(c, -1.0, 1.0)))


@dataclass(frozen=True, eq=False)
class ExchangeOp:
    """Adjacent-body swap realized as dilatation * rotation * parity * dilatation.

    `position` is the 0-based slot of the first swapped body in the source
    ordering.  `matrix` maps source-chart coordinate vectors to target-chart
    ones; only rows touching the affected coordinates differ from identity.
    """

    source: JacobiChart
    target: JacobiChart
    position: int
    beta: float
    pre_factors: tuple[float, ...]   # sqrt(mu) of the source rows
    post_factors: tuple[float, ...]  # 1/sqrt(mu') of the target rows
    parity: bool
    matrix: np.ndarray


def adjacent_exchange(system: FrameSystem, chart: JacobiChart, position: int) -> ExchangeOp:
    """Exchange the bodies at ordering slots (position, position+1)."""
    n = chart.size
    if not (0 <= position <= n - 2):
        raise BadLabel(f"swap position {position} outside 0..{n - 2}")
    new_ordering = list(chart.ordering)
    new_ordering[position], new_ordering[position + 1] = (
        new_ordering[position + 1], new_ordering[position])
    target = chart_for_ordering(system, new_ordering)

    masses = system.masses
    m_ord = masses[[l - 1 for l in chart.ordering]]
    a, b = m_ord[position], m_ord[position + 1]
    rest = float(m_ord[position + 2:].sum())
    beta = exchange_angle(a, b, rest)

    full = np.eye(n)
    if position == n - 2:
        # tail pair: the single relative coordinate just flips sign
        pre = (np.sqrt(chart.reduced_masses[position]),)
        post = (1.0 / np.sqrt(target.reduced_masses[position]),)
        full[position, position] = -post[0] * pre[0]  # == -1, mu is pair-symmetric
    else:
        pre = tuple(np.sqrt(chart.reduced_masses[position:position + 2]))
        post = tuple(1.0 / np.sqrt(target.reduced_masses[position:position + 2]))
        rot = np.array([[np.cos(beta), -np.sin(beta)], [np.sin(beta), np.cos(beta)]])
        block = np.diag(post) @ rot @ np.diag([-1.0, 1.0]) @ np.diag(pre)
        full[position:position + 2, position:position + 2] = block
    return ExchangeOp(chart, target, position, beta, pre, post, True, full)


def exchange_chain(system: FrameSystem, to_label: int) -> list[ExchangeOp]:
    """Adjacent exchanges carrying frame 1's chart into frame `to_label`'s."""
    n = system.size
    if not (1 <= to_label <= n):
        raise BadLabel(f"frame label {to_label} outside 1..{n}")
    ops: list[ExchangeOp] = []
    chart = build_chart(system, 1)
    for pos in range(to_label - 2, -1, -1):  # bubble the body to the front
        op = adjacent_exchange(system, chart, pos)
        ops.append(op)
        chart = op.target
    return ops


@dataclass(frozen=True, eq=False)
class ChartTransform:
    """Linear coordinate map between two charts of one system."""

    source: JacobiChart
    target: JacobiChart
    matrix: np.ndarray

    @property
    def momentum_matrix(self) -> np.ndarray:
        return np.linalg.inv(self.matrix).T


def compose_transform(system: FrameSystem, from_label: int, to_label: int) -> ChartTransform:
    """Coordinate map q^to = U q^from between frame charts."""
    src = build_chart(system, from_label)
    dst = build_chart(system, to_label)
    u = dst.coord_map @ np.linalg.inv(src.coord_map)
    return ChartTransform(src, dst, u)


def arf_limit_chart(system: FrameSystem, mass_ratio: float = ARF_MASS_RATIO) -> JacobiChart:
    """Chart of an appended near-infinite-mass frame body (label N+1)."""
    m_a = mass_ratio * float(system.masses.max())
    extended = FrameSystem(system.bodies + (Body(m_a, "frame"),))
    return build_chart(extended, system.size + 1)


@dataclass(frozen=True, eq=False)
class ChartState:
    """Amplitude over chart coordinates: amplitude(Q) with Q.shape == (..., N)."""

    chart: JacobiChart
    amplitude: Callable[[np.ndarray], np.ndarray]


def gaussian_chart_state(chart: JacobiChart, means: Sequence[float],
                         widths: Sequence[float]) -> ChartState:
    """Product of normalized 1D Gaussians, one per chart coordinate."""
    mu = np.asarray(means, dtype=float)
    sig = np.asarray(widths, dtype=float)
    if mu.shape != (chart.size,) or sig.shape != (chart.size,):
        raise ConfigError("need one mean and one width per chart coordinate")
    if np.any(sig <= 0):
        raise NonPositiveWidth("chart-state widths must be positive")
    norm = np.prod((2.0 * np.pi * sig ** 2) ** -0.25)

    def amp(q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        return norm * np.exp(-np.sum((q - mu) ** 2 / (4.0 * sig ** 2), axis=-1))

    return ChartState(chart, amp)


def apply_transform(state: ChartState, op: ExchangeOp | ChartTransform) -> ChartState:
    """Push the amplitude through q' = U q with the Jacobian factor."""
    if state.chart is not op.source and tuple(state.chart.ordering) != tuple(op.source.ordering):
        raise ChartMismatch(
            f"state on ordering {state.chart.ordering} fed to a transform from {op.source.ordering}")
    u_inv_t = np.linalg.inv(op.matrix).T
    scale = abs(np.linalg.det(op.matrix)) ** -0.5
    inner = state.amplitude

    def amp(q: np.ndarray) -> np.ndarray:
        return scale * inner(np.asarray(q) @ u_inv_t)

    return ChartState(op.target, amp)


def apply_exchange(state: ChartState, op: ExchangeOp) -> ChartState:
    return apply_transform(state, op)


@dataclass(frozen=True, eq=False)
class InternalHamiltonian:
    """Kinetic quadratic forms in the original single-body momenta.

    internal_form excludes the center-of-mass term; cm_form is that term
    alone.  Their sum reproduces sum(p_j^2 / 2 m_j) identically.
    """

    chart: JacobiChart
    internal_form: np.ndarray
    cm_form: np.ndarray

    def internal_energy(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.einsum("...i,ij,...j->...", p, self.internal_form, p)

    def cm_energy(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.einsum("...i,ij,...j->...", p, self.cm_form, p)

    def mode_energies(self, pi_internal: np.ndarray) -> np.ndarray:
        """Energy from internal chart momenta directly: sum pi_i^2 / 2 mu_i."""
        pi = np.asarray(pi_internal, dtype=float)
        mu = self.chart.reduced_masses[:-1]
        return np.sum(pi ** 2 / (2.0 * mu), axis=-1)


def internal_hamiltonian(system: FrameSystem, chart: JacobiChart) -> InternalHamiltonian:
    pairing = chart.pairing_matrix()
    if np.max(np.abs(pairing - np.eye(chart.size))) > 1e-10:
        raise ChartMismatch("chart is not canonical; refusing to build a Hamiltonian on it")
    b = chart.momentum_map
    mu = chart.reduced_masses
    internal = sum(np.outer(b[i], b[i]) / (2.0 * mu[i]) for i in range(chart.size - 1))
    cm = np.outer(b[-1], b[-1]) / (2.0 * mu[-1])
    return InternalHamiltonian(chart, np.asarray(internal), cm)


# --- measurement reduction -------------------------------------------------

@dataclass(frozen=True, eq=False)
class ReducedDensityMatrix:
    """Post-measurement state over a discretized relative coordinate.

    matrix is a density kernel rho(delta_a, delta_b); the trace carries the
    grid measure, trace = sum(diag) * delta_spacing.  masks are the kept
    bins' projectors on the grid; weights their branch probabilities.
    """

    delta_grid: np.ndarray
    bin_edges: np.ndarray
    masks: tuple[np.ndarray, ...]
    weights: np.ndarray
    matrix: np.ndarray
    widths: np.ndarray
    dropped_bins: tuple[int, ...]
    meta: dict

    @property
    def delta_spacing(self) -> float:
        return float(self.delta_grid[1] - self.delta_grid[0])

    def trace(self) -> float:
        return float(np.sum(np.diag(self.matrix)).real * self.delta_spacing)


def _bin_masks(delta: np.ndarray, edges: np.ndarray) -> list[np.ndarray]:
    """Half-open bins (e_{j-1}, e_j]; an edge tie goes to the lower bin."""
    idx = np.searchsorted(edges, delta, side="left") - 1
    idx[delta <= edges[0]] = 0  # the first bin is closed on the left
    return [idx == j for j in range(len(edges) - 1)]


def _validate_bins(edges: np.ndarray, lo: float, hi: float) -> np.ndarray:
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ConfigError("bins must be a strictly increasing edge array of length >= 2")
    if edges[0] > lo or edges[-1] < hi:
        raise ConfigError(
            f"bins [{edges[0]}, {edges[-1]}] do not cover the relative-coordinate range [{lo}, {hi}]")
    return edges


def _rereduce(rho: ReducedDensityMatrix, edges: np.ndarray) -> ReducedDensityMatrix:
    edges = _validate_bins(edges, float(rho.delta_grid[0]), float(rho.delta_grid[-1]))
    masks = _bin_masks(rho.delta_grid, edges)
    block = np.zeros_like(rho.matrix, dtype=bool)
    for m in masks:
        block |= np.outer(m, m)
    matrix = np.where(block, rho.matrix, 0.0)
    d = rho.delta_spacing
    weights = np.array([np.sum(np.diag(matrix).real[m]) * d for m in masks])
    keep = [j for j, w in enumerate(weights) if w > 1e-14]
    if not keep:
        raise EmptyBin("every bin captured zero probability")
    same = (edges.size == rho.bin_edges.size and np.allclose(edges, rho.bin_edges))
    widths = rho.widths if same else np.array([])
    return ReducedDensityMatrix(
        rho.delta_grid, edges, tuple(masks[j] for j in keep), weights[keep],
        matrix, widths, tuple(j for j in range(len(masks)) if j not in keep),
        dict(rho.meta, rereduced=True))


def measurement_reduce(state: ProductState | ReducedDensityMatrix, bins,
                       mesh_points: int = 384, fine_points: int = 4096) -> ReducedDensityMatrix:
    """Reduce a two-body product state over a binned relative-position measurement.

    The relative coordinate is delta = x_n - x_1 with the measured particle
    first and the frame body second.  Each bin's projector keeps its block of
    the (delta, cm) amplitude; cross-bin coherences are erased.  Bins that
    capture no probability are dropped and recorded, not errors, unless every
    bin is empty.
    """
    if isinstance(state, ReducedDensityMatrix):
        return _rereduce(state, np.asarray(bins, dtype=float))
    if len(state.factors) != 2:
        raise ConfigError("measurement reduction expects exactly two bodies")
    pk_n, pk_1 = state.factors
    m_n, m_1 = pk_n.mass, pk_1.mass
    m_tot = m_n + m_1

    xbar_n, sig_n = position_mean(pk_n), np.sqrt(position_variance(pk_n))
    xbar_1, sig_1 = position_mean(pk_1), np.sqrt(position_variance(pk_1))
    sig_d = np.hypot(sig_n, sig_1)
    sig_x = np.hypot(m_n * sig_n, m_1 * sig_1) / m_tot

    delta = np.linspace(xbar_n - xbar_1 - 8 * sig_d, xbar_n - xbar_1 + 8 * sig_d, mesh_points)
    xbar_cm = (m_n * xbar_n + m_1 * xbar_1) / m_tot
    xcm = np.linspace(xbar_cm - 8 * sig_x, xbar_cm + 8 * sig_x, mesh_points)
    dd = delta[1] - delta[0]
    dx = xcm[1] - xcm[0]

    # body positions on the (delta, cm) mesh; jacobian of (x_n, x_1) -> (delta, cm) is 1
    xn_mesh = xcm[None, :] + (m_1 / m_tot) * delta[:, None]
    x1_mesh = xcm[None, :] - (m_n / m_tot) * delta[:, None]

    def on_mesh(packet, mesh):
        fine = np.linspace(mesh.min() - 1e-9, mesh.max() + 1e-9, fine_points)
        psi = position_wavefunction(packet, fine)
        return (np.interp(mesh, fine, psi.real) + 1j * np.interp(mesh, fine, psi.imag))

    chi = on_mesh(pk_n, xn_mesh) * on_mesh(pk_1, x1_mesh)
    norm2 = np.sum(np.abs(chi) ** 2) * dd * dx
    if norm2 <= 0:
        raise EmptyBin("joint amplitude vanishes on the mesh")
    chi = chi / np.sqrt(norm2)  # trace is now exactly 1 on the mesh

    edges = _validate_bins(np.asarray(bins, dtype=float), float(delta[0]), float(delta[-1]))
    masks = _bin_masks(delta, edges)

    gram = (chi @ chi.conj().T) * dx  # rho(delta_a, delta_b) before projection
    block = np.zeros_like(gram, dtype=bool)
    for m in masks:
        block |= np.outer(m, m)
    matrix = np.where(block, gram, 0.0)

    prob = np.abs(chi) ** 2 * dd * dx
    weights = np.array([prob[m].sum() for m in masks])
    widths = np.full(len(masks), np.nan)
    for j, m in enumerate(masks):
        w = weights[j]
        if w <= 1e-14:
            continue
        pj = prob[m, :] / w
        mean = np.sum(pj * xn_mesh[m, :])
        widths[j] = np.sqrt(max(np.sum(pj * (xn_mesh[m, :] - mean) ** 2), 0.0))

    keep = [j for j, w in enumerate(weights) if w > 1e-14]
    if not keep:
        raise EmptyBin("every bin captured zero probability")
    dropped = tuple(j for j in range(len(masks)) if j not in keep)
    meta = {
        "masses": (m_n, m_1),
        "mesh_points": mesh_points,
        "captured_probability": float(weights.sum()),
    }
    return ReducedDensityMatrix(
        delta, edges, tuple(masks[j] for j in keep), weights[keep], matrix,
        widths[keep], dropped, meta)
