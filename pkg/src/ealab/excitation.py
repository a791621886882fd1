"""Excitation pairs, flexibilities, critical droplets and windowed energy vectors.

For an edge b the excitation pair is the best configuration with sigma_b = +1
and the best with sigma_b = -1. Their energy difference is the flexibility
F_b, and the edges on which they disagree form the critical droplet boundary.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .disorder import CouplingField, InterpolationPath, interpolate
from .groundstate import (
    DEGENERACY_TOL,
    FREE,
    BoundaryCondition,
    FastSolver,
)
from .lattice import BoxLattice, Region, connected_components, edge_values, gauge_align

MAX_WINDOW_EDGES = 4
CROSSING_TOL = 1e-12
DRIFT_TOL = 1e-9
MAX_T = 50.0


class DegenerateOrderError(ValueError):
    """Window couplings sit on (or numerically at) a critical hyperplane."""


# --- excitation pairs and flexibility ---------------------------------------

@dataclass(frozen=True, eq=False)
class ExcitationPair:
    edge: int
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    E_plus: float
    E_minus: float
    degenerate: bool = False

    @property
    def ground(self) -> np.ndarray:
        return self.sigma_plus if self.E_plus <= self.E_minus else self.sigma_minus

    @property
    def ground_energy(self) -> float:
        return min(self.E_plus, self.E_minus)


@dataclass(frozen=True)
class FlexibilityRecord:
    edge: int
    F: float
    C: float
    ground_sign: int
    degenerate: bool = False


def _solver(lattice: BoxLattice, J: CouplingField, bc: BoundaryCondition, method: str) -> FastSolver:
    if J.lattice != lattice:
        raise ValueError("couplings belong to a different lattice")
    return FastSolver(lattice, bc, method)


def _check_edge(lattice: BoxLattice, b: int) -> int:
    b = int(b)
    if not 0 <= b < lattice.n_edges:
        raise ValueError(f"edge {b} outside lattice")
    return b


def _pair_from(solver: FastSolver, values: np.ndarray, b: int) -> ExcitationPair:
    rp = solver.solve_values(values, edge=b, sign=1)
    rm = solver.solve_values(values, edge=b, sign=-1)
    degenerate = rp.degenerate or rm.degenerate
    return ExcitationPair(b, rp.config, rm.config, rp.energy, rm.energy, degenerate)


def excitation_pair(lattice: BoxLattice, J: CouplingField, bc: BoundaryCondition = FREE,
                    b: int = 0, method: str = "auto") -> ExcitationPair:
    """Exact minimisers with sigma_b = +1 and sigma_b = -1."""
    b = _check_edge(lattice, b)
    return _pair_from(_solver(lattice, J, bc, method), J.values, b)


def _edge_sign(lattice: BoxLattice, bc: BoundaryCondition, b: int) -> float:
    """+1, or -1 when the boundary condition negates the coupling on b."""
    unit = np.zeros(lattice.n_edges)
    unit[b] = 1.0
    return float(bc.effective_couplings(lattice, unit)[b])


def _flex_from(solver: FastSolver, values: np.ndarray, b: int,
               pair: Optional[ExcitationPair] = None) -> tuple[FlexibilityRecord, ExcitationPair]:
    lattice = solver.lattice
    if pair is None:
        pair = _pair_from(solver, values, b)
    zeroed = np.array(values, dtype=np.float64)
    zeroed[b] = 0.0
    a0 = solver.solve_values(zeroed, edge=b, sign=1)
    b0 = solver.solve_values(zeroed, edge=b, sign=-1)
    s = _edge_sign(lattice, solver.bc, b)
    # E_plus = A0 - s*J_b and E_minus = B0 + s*J_b, so the ground edge flips at J_b = C_b
    C = s * (a0.energy - b0.energy) / 2.0
    F = abs(pair.E_plus - pair.E_minus)
    sign = 1 if pair.E_plus < pair.E_minus else -1
    degenerate = pair.degenerate or a0.degenerate or b0.degenerate
    return FlexibilityRecord(b, F, C, sign, degenerate), pair


def flexibility(lattice: BoxLattice, J: CouplingField, bc: BoundaryCondition = FREE,
                b: int = 0, method: str = "auto") -> FlexibilityRecord:
    """F_b = |E_plus - E_minus| and the critical value C_b.

    C_b comes from a separate pair of constrained solves with J_b set to zero,
    so ``F == 2 * |J_b - C_b|`` is a genuine cross-check.
    """
    b = _check_edge(lattice, b)
    rec, _ = _flex_from(_solver(lattice, J, bc, method), J.values, b)
    return rec


# --- critical droplets --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DropletReport:
    edge: int
    boundary: np.ndarray
    region: Region
    flex: FlexibilityRecord
    pair: ExcitationPair = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.boundary)

    @property
    def n_vertices(self) -> int:
        return len(self.region)

    CSV_HEADER = ("seed", "d", "L", "bc", "edge", "F_b", "C_b", "boundary_size", "droplet_vertices")

    def csv_row(self, seed: Optional[int], lattice: BoxLattice, bc_label: str) -> tuple:
        return (
            "" if seed is None else int(seed),
            lattice.d,
            "x".join(map(str, lattice.shape)),
            bc_label,
            self.edge,
            repr(float(self.flex.F)),
            repr(float(self.flex.C)),
            self.size,
            self.n_vertices,
        )


def _droplet_region(lattice: BoxLattice, pair: ExcitationPair, flip_symmetric: bool) -> Region:
    plus = pair.sigma_plus
    minus = gauge_align(plus, pair.sigma_minus) if flip_symmetric else pair.sigma_minus
    diff = Region.from_vertices(lattice, np.flatnonzero(plus != minus))
    a, c = (int(x) for x in lattice.edges[pair.edge])
    comps = connected_components(lattice, diff)
    for endpoint in (a, c):
        for comp in comps:
            if endpoint in comp:
                return comp
    return Region(lattice, 0)


def _droplet_from(solver: FastSolver, values: np.ndarray, b: int) -> DropletReport:
    lattice = solver.lattice
    rec, pair = _flex_from(solver, values, b)
    boundary = np.flatnonzero(edge_values(lattice, pair.sigma_plus) != edge_values(lattice, pair.sigma_minus))
    region = _droplet_region(lattice, pair, solver.bc.flip_symmetric)
    return DropletReport(b, boundary, region, rec, pair)


def critical_droplet(lattice: BoxLattice, J: CouplingField, bc: BoundaryCondition = FREE,
                     b: int = 0, method: str = "auto") -> DropletReport:
    """Edges where the excitation pair disagrees, plus the flipped vertex cluster at b."""
    b = _check_edge(lattice, b)
    return _droplet_from(_solver(lattice, J, bc, method), J.values, b)


def droplet_boundary_size(solver: FastSolver, values: np.ndarray, b: int) -> tuple[float, int, int, bool]:
    """(F_b, |boundary|, ground sign at b, degenerate) from one excitation pair."""
    pair = _pair_from(solver, values, b)
    ev_p = edge_values(solver.lattice, pair.sigma_plus)
    ev_m = edge_values(solver.lattice, pair.sigma_minus)
    sign = 1 if pair.E_plus < pair.E_minus else -1
    return abs(pair.E_plus - pair.E_minus), int(np.count_nonzero(ev_p != ev_m)), sign, pair.degenerate


# --- windowed energy vectors --------------------------------------------------

@dataclass(frozen=True, eq=False)
class WindowEnergyVector:
    """Outside-energy differences E(eta, eta0) for every reachable window edge-config.

    ``configs[k]`` is an edge-config (tuple of +-1, one per window edge) and
    ``values[k] = E(configs[k], reference)``. The reference is the all-satisfied
    config (+1 on every window edge).
    """

    lattice: BoxLattice
    bc: BoundaryCondition
    edges: tuple[int, ...]
    configs: tuple[tuple[int, ...], ...]
    values: np.ndarray
    bound: float
    edge_signs: np.ndarray

    @property
    def reference(self) -> tuple[int, ...]:
        return (1,) * len(self.edges)

    def index(self, eta: Sequence[int]) -> int:
        return self.configs.index(tuple(int(x) for x in eta))

    def E(self, eta: Sequence[int], eta_prime: Sequence[int]) -> float:
        return float(self.values[self.index(eta)] - self.values[self.index(eta_prime)])

    def window_energy(self, eta: Sequence[int], J_w: np.ndarray) -> float:
        """-sum J_e eta_e over window edges with the boundary condition's signs."""
        return float(-np.sum(self.edge_signs * np.asarray(J_w, dtype=np.float64) * np.asarray(eta)))

    def critical_values(self, eta, eta_prime) -> tuple[np.ndarray, float]:
        """Hyperplane sum_e J_e (eta_e - eta'_e) = E(eta, eta') in raw window couplings.

        Returned as (normal vector, offset) with the BC sign folded into the normal.
        """
        v = self.edge_signs * (np.asarray(eta, dtype=np.float64) - np.asarray(eta_prime, dtype=np.float64))
        return v, self.E(eta, eta_prime)


def window_vertices(lattice: BoxLattice, edges: Sequence[int]) -> list[int]:
    return sorted({int(v) for e in edges for v in lattice.edges[e]})


def _validate_window(lattice: BoxLattice, edges: Sequence[int]) -> tuple[int, ...]:
    edges = tuple(sorted({int(e) for e in edges}))
    if not edges:
        raise ValueError("window needs at least one edge")
    if len(edges) > MAX_WINDOW_EDGES:
        raise ValueError(f"window limited to {MAX_WINDOW_EDGES} edges, got {len(edges)}")
    for e in edges:
        _check_edge(lattice, e)
    verts = set(window_vertices(lattice, edges))
    induced = {e for v in verts for u, e in lattice.incidence[v] if u in verts}
    if induced != set(edges):
        raise ValueError("window edges must be all edges among the window vertices")
    return edges


def window_boundary_bound(lattice: BoxLattice, J: CouplingField, bc: BoundaryCondition,
                          edges: Sequence[int]) -> float:
    """sum over edges leaving the window (and outer-layer couplings) of 2|J_e|."""
    verts = window_vertices(lattice, edges)
    inside = np.zeros(lattice.n_vertices, dtype=bool)
    inside[verts] = True
    e = lattice.edges
    leaving = inside[e[:, 0]] != inside[e[:, 1]]
    total = 2.0 * float(np.sum(np.abs(J.values[leaving])))
    if bc.kind == "fixed":
        slots = lattice.boundary_slots
        total += 2.0 * float(np.sum(np.abs(bc.couplings[inside[slots]])))
    return total


def _outside_minima(solver: FastSolver, values: np.ndarray, edges: tuple[int, ...],
                    verts: list[int]) -> dict[tuple[int, ...], float]:
    """Min over spin representatives of (constrained minimum - window energy) per edge-config."""
    lattice = solver.lattice
    jeff = solver.bc.effective_couplings(lattice, values)
    ends = lattice.edges[list(edges)]
    pos = {v: k for k, v in enumerate(verts)}
    n = len(verts)
    # fixing the first window spin is a symmetry only for flip-symmetric BCs
    first = [1] if solver.bc.flip_symmetric else [1, -1]
    out: dict[tuple[int, ...], float] = {}
    for s0 in first:
        for rest in itertools.product((1, -1), repeat=n - 1):
            spins = (s0,) + rest
            pins = {v: spins[k] for k, v in enumerate(verts)}
            eta = tuple(spins[pos[int(a)]] * spins[pos[int(c)]] for a, c in ends)
            m = solver.solve_values(values, pins=pins).energy
            h_w = -sum(jeff[e] * eta[k] for k, e in enumerate(edges))
            o = m - h_w
            if eta not in out or o < out[eta]:
                out[eta] = o
    return out


def window_energy_vector(outer: BoxLattice, J: CouplingField, bc: BoundaryCondition = FREE,
                         window: Sequence[int] = (0,), method: str = "auto") -> WindowEnergyVector:
    """E(eta, eta0) for every reachable edge-config of a window of <= 4 edges.

    Each value is the minimum energy outside the window with the window
    edges held at eta, differenced against the all-satisfied reference.
    """
    edges = _validate_window(outer, window)
    solver = _solver(outer, J, bc, method)
    verts = window_vertices(outer, edges)
    mins = _outside_minima(solver, J.values, edges, verts)
    ref = (1,) * len(edges)
    configs = tuple(sorted(mins, key=lambda eta: tuple(-x for x in eta)))
    if ref not in mins:
        raise ValueError("window reference configuration is unreachable")
    values = np.array([mins[eta] - mins[ref] for eta in configs])
    signs = np.array([_edge_sign(outer, bc, e) for e in edges])
    bound = window_boundary_bound(outer, J, bc, edges)
    return WindowEnergyVector(outer, bc, edges, configs, values, bound, signs)


def config_energies(E: WindowEnergyVector, J_w: np.ndarray) -> np.ndarray:
    """T(eta) = E(eta, eta0) + H_w(eta), the best total energy with the window at eta (up to a constant)."""
    J_w = np.asarray(J_w, dtype=np.float64)
    if J_w.shape != (len(E.edges),):
        raise ValueError("need one coupling per window edge")
    return np.array([E.values[k] + E.window_energy(eta, J_w) for k, eta in enumerate(E.configs)])


def order_configs(E: WindowEnergyVector, J_w: np.ndarray) -> list[tuple[int, ...]]:
    """Window edge-configs from most to least favourable for window couplings ``J_w``.

    eta precedes eta' iff E(eta, eta') + H_w(eta) - H_w(eta') < 0.
    """
    T = config_energies(E, J_w)
    order = np.argsort(T, kind="stable")
    gaps = np.diff(T[order])
    if len(gaps) and gaps.min() <= DEGENERACY_TOL:
        k = int(np.argmin(gaps))
        raise DegenerateOrderError(
            f"configs {E.configs[order[k]]} and {E.configs[order[k + 1]]} tie (gap {gaps.min():.3g})"
        )
    return [E.configs[k] for k in order]


# --- hyperplane crossings along the interpolation path ------------------------

def solve_crossing(a: float, b: float, c: float, t_max: float) -> list[float]:
    """Roots t in (0, t_max] of a e^-t + b sqrt(1 - e^-2t) = c.

    With e^-t = cos(phi), phi in [0, pi/2), the left side is R cos(phi - phi0),
    so the roots are phi0 +- acos(c / R) restricted to (0, phi_max].
    """
    if not 0 < t_max <= MAX_T:
        raise ValueError(f"t_max must lie in (0, {MAX_T}]")
    R = math.hypot(a, b)
    if R == 0.0 or abs(c) > R:
        return []
    phi0 = math.atan2(b, a)
    half = math.acos(max(-1.0, min(1.0, c / R)))
    phi_max = math.acos(math.exp(-t_max))
    roots = []
    for phi in sorted({phi0 - half, phi0 + half}):
        if 0.0 < phi <= phi_max:
            # -ln cos(phi) written to stay accurate for small phi
            t = -math.log1p(-2.0 * math.sin(0.5 * phi) ** 2)
            if t > 0.0 and (not roots or t - roots[-1] > CROSSING_TOL):
                roots.append(min(t, t_max))
    return roots


def crossing_events(E: WindowEnergyVector, J_w: np.ndarray, J_w_target: np.ndarray,
                    t_max: float) -> list[tuple[float, tuple[int, ...], tuple[int, ...]]]:
    """(t, eta, eta') for every hyperplane crossing of the window path, sorted by t."""
    J_w = np.asarray(J_w, dtype=np.float64)
    J_w_target = np.asarray(J_w_target, dtype=np.float64)
    events = []
    for eta, eta_p in itertools.combinations(E.configs, 2):
        v, offset = E.critical_values(eta, eta_p)
        for t in solve_crossing(float(v @ J_w), float(v @ J_w_target), offset, t_max):
            events.append((t, eta, eta_p))
    events.sort(key=lambda ev: ev[0])
    return events


def crossing_times(E: WindowEnergyVector, path: InterpolationPath, t_max: float = 10.0) -> list[float]:
    """Sorted times at which the window couplings cross any critical hyperplane.

    Only the window edges of ``path`` move; the E-vector does not depend on
    them, so crossings reduce to one scalar equation per config pair.
    """
    idx = list(E.edges)
    events = crossing_events(E, path.base.values[idx], path.target.values[idx], t_max)
    return [t for t, _, _ in events]


# --- stability and drift along whole-box paths --------------------------------

@dataclass(frozen=True, eq=False)
class StabilityReport:
    edge: int
    t_grid: np.ndarray
    sigma_b: np.ndarray
    F: np.ndarray
    droplet_size: np.ndarray
    slack: np.ndarray
    violations: list[int]
    n_degenerate: int

    @property
    def ok(self) -> bool:
        return not self.violations


def _coupling_scale(J: CouplingField, J_prime: CouplingField) -> float:
    return float(np.max(np.maximum(np.abs(J.values), np.abs(J_prime.values))))


def _path_samples(lattice, J, J_prime, bc, b, t_grid, method):
    solver = _solver(lattice, J, bc, method)
    path = InterpolationPath(J, J_prime)
    n = len(t_grid)
    F = np.empty(n)
    size = np.empty(n, dtype=np.int64)
    sig = np.empty(n, dtype=np.int8)
    n_deg = 0
    for i, t in enumerate(t_grid):
        f, sz, s, deg = droplet_boundary_size(solver, interpolate(path, float(t)).values, b)
        F[i], size[i], sig[i] = f, sz, s
        n_deg += int(deg)
    return F, size, sig, n_deg


def stability_scan(lattice: BoxLattice, J: CouplingField, J_prime: CouplingField,
                   bc: BoundaryCondition = FREE, b: int = 0, t_grid: Sequence[float] = (0.0,),
                   method: str = "auto") -> StabilityReport:
    """Track sigma_b(t) and F_b(t) along the whole-box path from J to J'.

    Between adjacent grid points F_b can move by at most
    6 sqrt(dt) max(|J|, |J'|) max|boundary|, so a flip of sigma_b across an
    interval whose endpoint flexibilities both exceed that slack is a violation.
    """
    b = _check_edge(lattice, b)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0 or t_grid[-1] > MAX_T:
        raise ValueError(f"t_grid must be strictly increasing inside [0, {MAX_T}]")
    F, size, sig, n_deg = _path_samples(lattice, J, J_prime, bc, b, t_grid, method)
    scale = _coupling_scale(J, J_prime)
    dt = np.diff(t_grid)
    slack = 6.0 * np.sqrt(dt) * scale * np.maximum(size[:-1], size[1:])
    flips = sig[:-1] != sig[1:]
    safe = np.minimum(F[:-1], F[1:]) > slack
    violations = [int(i) for i in np.flatnonzero(flips & safe)]
    return StabilityReport(b, t_grid, sig, F, size, slack, violations, n_deg)


@dataclass(frozen=True)
class DriftReport:
    edge: int
    t: float
    lhs: float
    rhs: float
    max_droplet: int
    ok: bool


def drift_check(lattice: BoxLattice, J: CouplingField, J_prime: CouplingField,
                bc: BoundaryCondition = FREE, b: int = 0, t: float = 1.0,
                n_grid: int = 101, method: str = "auto") -> DriftReport:
    """Compare |F_b(t) - F_b(0)| with 6 sqrt(t) max(|J|,|J'|) max_{s<=t} |boundary(s)|."""
    b = _check_edge(lattice, b)
    if not 0.0 <= t <= 1.0:
        raise ValueError("drift bound is only established for 0 <= t <= 1")
    if n_grid < 100:
        raise ValueError("drift check needs at least 100 grid points")
    if t == 0.0:
        return DriftReport(b, 0.0, 0.0, 0.0, 0, True)
    grid = np.linspace(0.0, t, n_grid)
    F, size, _, _ = _path_samples(lattice, J, J_prime, bc, b, grid, method)
    lhs = abs(F[-1] - F[0])
    rhs = 6.0 * math.sqrt(t) * _coupling_scale(J, J_prime) * int(size.max())
    return DriftReport(b, float(t), float(lhs), float(rhs), int(size.max()), lhs <= rhs + DRIFT_TOL)


__all__ = [
    "ExcitationPair",
    "FlexibilityRecord",
    "DropletReport",
    "WindowEnergyVector",
    "StabilityReport",
    "DriftReport",
    "DegenerateOrderError",
    "excitation_pair",
    "flexibility",
    "critical_droplet",
    "window_energy_vector",
    "config_energies",
    "order_configs",
    "crossing_times",
    "crossing_events",
    "solve_crossing",
    "stability_scan",
    "drift_check",
]
