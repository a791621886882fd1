"""Exact zero-temperature ground states of the EA Hamiltonian on small boxes.

Spin configurations are ``int8`` arrays of +-1 indexed by lattice vertex.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Optional

import numpy as np

from . import _kernels
from .disorder import CouplingField
from .lattice import BoxLattice, Region, edge_values

DEGENERACY_TOL = 1e-12
MAX_ENUM_SPINS = 28
MAX_DP_WIDTH = 12
CRITERION_TOL = 1e-12
MAX_CRITERION_K = 6


class SolverError(ValueError):
    """Instance too large or unsupported for the requested solver."""


@dataclass(frozen=True, eq=False)
class BoundaryCondition:
    """free | periodic | antiperiodic(axis) | fixed(outer-layer spins, boundary couplings).

    ``free`` and ``periodic`` use the lattice edges as they are; ``periodic``
    additionally insists that the lattice has a periodic axis. ``antiperiodic``
    negates the wrap couplings along ``axis``. ``fixed`` adds a one-vertex-thick
    outer layer of spins ``xi`` coupled through ``couplings``, one entry per
    boundary slot of the lattice (see ``BoxLattice.boundary_slots``).
    """

    kind: str = "free"
    axis: int = 0
    xi: Optional[np.ndarray] = None
    couplings: Optional[np.ndarray] = None

    @classmethod
    def free(cls) -> "BoundaryCondition":
        return cls("free")

    @classmethod
    def periodic(cls) -> "BoundaryCondition":
        return cls("periodic")

    @classmethod
    def antiperiodic(cls, axis: int = 0) -> "BoundaryCondition":
        return cls("antiperiodic", axis=axis)

    @classmethod
    def fixed(cls, xi, couplings) -> "BoundaryCondition":
        xi = np.asarray(xi, dtype=np.int8)
        couplings = np.asarray(couplings, dtype=np.float64)
        if xi.shape != couplings.shape:
            raise ValueError("xi and boundary couplings must have one entry per slot")
        if not np.all(np.abs(xi) == 1):
            raise ValueError("outer-layer spins must be +-1")
        return cls("fixed", xi=xi, couplings=couplings)

    @property
    def flip_symmetric(self) -> bool:
        return self.kind != "fixed"

    @property
    def label(self) -> str:
        if self.kind == "antiperiodic":
            return f"antiperiodic{self.axis}"
        return self.kind

    def validate(self, lattice: BoxLattice) -> None:
        if self.kind in ("free",):
            return
        if self.kind == "periodic":
            if not any(lattice.periodic):
                raise ValueError("periodic BC needs a lattice with a periodic axis")
        elif self.kind == "antiperiodic":
            if not 0 <= self.axis < lattice.d or not lattice.periodic[self.axis]:
                raise ValueError(f"antiperiodic BC needs periodic axis {self.axis}")
        elif self.kind == "fixed":
            if self.xi is None or len(self.xi) != lattice.n_boundary_slots:
                raise ValueError(
                    f"fixed BC needs {lattice.n_boundary_slots} outer-layer spins, "
                    f"got {None if self.xi is None else len(self.xi)}"
                )
        else:
            raise ValueError(f"unknown boundary condition {self.kind!r}")

    def effective_couplings(self, lattice: BoxLattice, values: np.ndarray) -> np.ndarray:
        if self.kind != "antiperiodic":
            return np.asarray(values, dtype=np.float64)
        flip = lattice.edge_wraps & (lattice.edge_axis == self.axis)
        out = np.array(values, dtype=np.float64)
        out[flip] *= -1.0
        return out

    def fields(self, lattice: BoxLattice) -> np.ndarray:
        h = np.zeros(lattice.n_vertices)
        if self.kind == "fixed":
            np.add.at(h, lattice.boundary_slots, self.couplings * self.xi)
        return h

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "antiperiodic":
            out["axis"] = self.axis
        if self.kind == "fixed":
            out["xi"] = self.xi.tolist()
            out["couplings"] = [float(x) for x in self.couplings]
        return out


FREE = BoundaryCondition.free()


@dataclass(frozen=True, eq=False)
class GroundStateResult:
    config: np.ndarray
    energy: float
    method: str
    gap: float
    bc_label: str = "free"

    @property
    def degenerate(self) -> bool:
        return self.gap < DEGENERACY_TOL

    def bitstring(self) -> str:
        return "".join("1" if s < 0 else "0" for s in self.config)

    def to_dict(self, lattice: BoxLattice, seed: Optional[int] = None) -> dict:
        return {
            "d": lattice.d,
            "L": list(lattice.shape),
            "topology": lattice.topology_label,
            "bc": self.bc_label,
            "seed": seed,
            "energy": float(self.energy),
            "config": self.bitstring(),
            "degenerate": bool(self.degenerate),
            "gap": None if math.isinf(self.gap) else float(self.gap),
            "method": self.method,
        }

    def to_json(self, lattice: BoxLattice, seed: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(lattice, seed), sort_keys=True)


def _check(lattice: BoxLattice, J: CouplingField) -> None:
    if J.lattice != lattice:
        raise ValueError("couplings belong to a different lattice")


def energy(lattice: BoxLattice, J: CouplingField, sigma: np.ndarray, bc: BoundaryCondition = FREE) -> float:
    """EA energy including antiperiodic signs and fixed-layer terms."""
    _check(lattice, J)
    sigma = np.asarray(sigma)
    if sigma.shape != (lattice.n_vertices,):
        raise ValueError("spin configuration does not match lattice")
    bc.validate(lattice)
    jeff = bc.effective_couplings(lattice, J.values)
    return _energy_arrays(lattice, jeff, bc.fields(lattice), sigma)


def _energy_arrays(lattice: BoxLattice, jeff: np.ndarray, h: np.ndarray, sigma: np.ndarray) -> float:
    s = sigma.astype(np.float64)
    return float(-np.sum(jeff * edge_values(lattice, s)) - np.sum(h * s))


def interior_energy(lattice: BoxLattice, J: CouplingField, sigma: np.ndarray) -> float:
    """Sum of -J_e sigma_e over the lattice edges with the raw couplings."""
    return float(-np.sum(J.values * edge_values(lattice, np.asarray(sigma, dtype=np.float64))))


def edge_overlap(lattice: BoxLattice, sigma1: np.ndarray, sigma2: np.ndarray) -> float:
    sigma1 = np.asarray(sigma1)
    sigma2 = np.asarray(sigma2)
    if sigma1.shape != sigma2.shape or sigma1.shape != (lattice.n_vertices,):
        raise ValueError("spin configurations do not match lattice")
    return float(np.mean(edge_values(lattice, sigma1) * edge_values(lattice, sigma2)))


# --- solver plumbing ----------------------------------------------------------

@lru_cache(maxsize=64)
def _csr(lattice: BoxLattice):
    ptr = np.zeros(lattice.n_vertices + 1, dtype=np.int64)
    idx, eid = [], []
    for v in range(lattice.n_vertices):
        for u, e in lattice.incidence[v]:
            idx.append(u)
            eid.append(e)
        ptr[v + 1] = len(idx)
    return ptr, np.array(idx, dtype=np.int64), np.array(eid, dtype=np.int64)


@lru_cache(maxsize=64)
def _grid_maps(lattice: BoxLattice):
    """Flat positions of every edge inside the (Lx, W) down/right arrays."""
    if lattice.d > 2:
        raise SolverError("column_dp supports d <= 2")
    Lx = lattice.shape[0]
    W = lattice.shape[1] if lattice.d == 2 else 1
    coords = lattice.coords
    pos = np.empty(lattice.n_edges, dtype=np.int64)
    for e, (a, b) in enumerate(lattice.edges):
        frm = b if lattice.edge_wraps[e] else a
        c = coords[frm]
        i = int(c[0])
        j = int(c[1]) if lattice.d == 2 else 0
        pos[e] = i * W + j
    is_down = lattice.edge_axis == 0
    per0 = lattice.periodic[0]
    per1 = lattice.periodic[1] if lattice.d == 2 else False
    return Lx, W, pos, is_down, per0, per1


def _resolve_method(lattice: BoxLattice, method: str, n_free: int) -> str:
    if method == "auto":
        if lattice.d <= 2 and (lattice.shape[1] if lattice.d == 2 else 1) <= MAX_DP_WIDTH:
            return "column_dp"
        if n_free <= MAX_ENUM_SPINS:
            return "enumeration"
        raise SolverError(f"no exact solver for box {lattice.shape}")
    if method == "enumeration":
        if n_free > MAX_ENUM_SPINS:
            raise SolverError(f"enumeration limited to {MAX_ENUM_SPINS} free spins, got {n_free}")
        return method
    if method == "column_dp":
        if lattice.d > 2:
            raise SolverError("column_dp supports d <= 2 only")
        W = lattice.shape[1] if lattice.d == 2 else 1
        if W > MAX_DP_WIDTH:
            raise SolverError(f"column_dp cross-section limited to {MAX_DP_WIDTH}, got {W}")
        return method
    raise ValueError(f"unknown method {method!r}")


def _solve_arrays(lattice, jeff, h, pin, force, symmetric, method):
    """Core exact minimisation on raw arrays; returns (best, second, spins, method)."""
    n_free = int(np.count_nonzero(pin == 0))
    method = _resolve_method(lattice, method, n_free)
    pin = pin.astype(np.int8, copy=True)
    if symmetric and not np.any(pin):
        pin[0] = 1  # quotient by the global flip
    if method == "enumeration":
        ptr, idx, eid = _csr(lattice)
        best, second, spins = _kernels.enumerate_min(
            ptr, idx, jeff[eid], force[eid].astype(np.int8), h, pin, False
        )
    else:
        Lx, W, pos, is_down, per0, per1 = _grid_maps(lattice)
        Jd = np.zeros(Lx * W)
        Jr = np.zeros(Lx * W)
        fd = np.zeros(Lx * W, dtype=np.int8)
        fr = np.zeros(Lx * W, dtype=np.int8)
        Jd[pos[is_down]] = jeff[is_down]
        Jr[pos[~is_down]] = jeff[~is_down]
        fd[pos[is_down]] = force[is_down]
        fr[pos[~is_down]] = force[~is_down]
        best, second, spins = _kernels.column_dp_min(
            Jd.reshape(Lx, W), Jr.reshape(Lx, W), h.reshape(Lx, W), pin.reshape(Lx, W),
            fd.reshape(Lx, W), fr.reshape(Lx, W), per0, per1,
        )
    return best, second, spins, method


def _finish(lattice, jeff, h, best, second, spins, method, bc_label) -> GroundStateResult:
    if math.isinf(best):
        raise SolverError("constraint admits no configuration")
    e = _energy_arrays(lattice, jeff, h, spins)
    gap = second - best
    return GroundStateResult(spins, e, method, gap, bc_label)


def solve(lattice: BoxLattice, J: CouplingField, bc: BoundaryCondition = FREE, method: str = "auto") -> GroundStateResult:
    """Exact ground state (lowest-indexed spin +1 for flip-symmetric BCs)."""
    return constrained_solve(lattice, J, bc, method=method)


def constrained_solve(
    lattice: BoxLattice,
    J: CouplingField,
    bc: BoundaryCondition = FREE,
    edge: Optional[int] = None,
    sign: Optional[int] = None,
    pins: Optional[Mapping[int, int]] = None,
    method: str = "auto",
) -> GroundStateResult:
    """Exact minimiser among configurations with ``sigma_edge == sign`` and/or pinned spins."""
    _check(lattice, J)
    bc.validate(lattice)
    jeff = bc.effective_couplings(lattice, J.values)
    h = bc.fields(lattice)
    pin = np.zeros(lattice.n_vertices, dtype=np.int8)
    force = np.zeros(lattice.n_edges, dtype=np.int8)
    if edge is not None:
        if sign not in (-1, 1):
            raise ValueError("edge constraint sign must be +1 or -1")
        if not 0 <= edge < lattice.n_edges:
            raise ValueError(f"edge {edge} outside lattice")
        force[edge] = sign
    if pins:
        for v, s in pins.items():
            if s not in (-1, 1) or not 0 <= v < lattice.n_vertices:
                raise ValueError(f"bad pin {v}->{s}")
            pin[v] = s
    best, second, spins, used = _solve_arrays(lattice, jeff, h, pin, force, bc.flip_symmetric, method)
    return _finish(lattice, jeff, h, best, second, spins, used, bc.label)


class FastSolver:
    """Repeated solves on one (lattice, BC) pair with varying couplings.

    Skips per-call validation; used by the Monte Carlo drivers.
    """

    def __init__(self, lattice: BoxLattice, bc: BoundaryCondition = FREE, method: str = "auto"):
        bc.validate(lattice)
        self.lattice = lattice
        self.bc = bc
        self.h = bc.fields(lattice)
        self.method = method
        self._pin = np.zeros(lattice.n_vertices, dtype=np.int8)
        self._force = np.zeros(lattice.n_edges, dtype=np.int8)

    def solve_values(self, values: np.ndarray, edge: Optional[int] = None, sign: int = 0,
                     pins: Optional[Mapping[int, int]] = None) -> GroundStateResult:
        jeff = self.bc.effective_couplings(self.lattice, values)
        force = self._force
        pin = self._pin
        if edge is not None:
            force = force.copy()
            force[edge] = sign
        if pins:
            pin = pin.copy()
            for v, s in pins.items():
                pin[v] = s
        best, second, spins, used = _solve_arrays(
            self.lattice, jeff, self.h, pin, force, self.bc.flip_symmetric, self.method
        )
        return _finish(self.lattice, jeff, self.h, best, second, spins, used, self.bc.label)


# --- ground-state criterion ---------------------------------------------------

def connected_subsets(lattice: BoxLattice, k: int):
    """Bitmasks of all connected vertex subsets of size 1..k."""
    inc = lattice.incidence
    level = {1 << v for v in range(lattice.n_vertices)}
    out = list(sorted(level))
    for _ in range(k - 1):
        nxt = set()
        for m in level:
            mm, v = m, 0
            while mm:
                if mm & 1:
                    for u, _e in inc[v]:
                        if not (m >> u) & 1:
                            nxt.add(m | (1 << u))
                mm >>= 1
                v += 1
        level = nxt
        out.extend(sorted(level))
    return out


@dataclass(frozen=True)
class CriterionReport:
    passed: bool
    worst_subset: Region
    worst_value: float
    n_subsets: int


def check_gs_criterion(lattice: BoxLattice, J: CouplingField, sigma: np.ndarray,
                       bc: BoundaryCondition = FREE, k: int = 4) -> CriterionReport:
    """Check sum_{boundary of B} J_xy sigma_x sigma_y >= 0 for connected B with |B| <= k.

    Outer-layer couplings of a fixed BC count as boundary edges of B.
    """
    if k > MAX_CRITERION_K:
        raise ValueError(f"subset budget k <= {MAX_CRITERION_K}, got {k}")
    _check(lattice, J)
    bc.validate(lattice)
    sigma = np.asarray(sigma, dtype=np.float64)
    jeff = bc.effective_couplings(lattice, J.values)
    h = bc.fields(lattice)
    ev = jeff * edge_values(lattice, sigma)
    # local[v]: flip cost / 2 of vertex v alone
    local = h * sigma
    np.add.at(local, lattice.edges[:, 0], ev)
    np.add.at(local, lattice.edges[:, 1], ev)
    lookup = lattice.edge_lookup
    worst, worst_mask = math.inf, 0
    subsets = connected_subsets(lattice, k)
    for m in subsets:
        verts = Region(lattice, m).vertices()
        total = sum(local[v] for v in verts)
        for a in range(len(verts)):
            for b in range(a + 1, len(verts)):
                e = lookup.get((verts[a], verts[b]))
                if e is not None:
                    total -= 2.0 * ev[e]
        if total < worst:
            worst, worst_mask = total, m
    return CriterionReport(worst >= -CRITERION_TOL, Region(lattice, worst_mask), float(worst), len(subsets))
