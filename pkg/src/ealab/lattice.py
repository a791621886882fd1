"""Finite boxes in Z^d: vertices, nearest-neighbour edges, regions and gauge alignment."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

Topology = Union[str, Sequence[bool]]


@dataclass(frozen=True)
class BoxLattice:
    """A box with per-axis side lengths and per-axis open/periodic topology.

    Vertices are indexed row-major over ``shape`` (last axis fastest). Edges are
    enumerated by (vertex, axis): for every vertex in index order and every axis,
    the edge to the forward neighbour along that axis if it exists (wrapping on
    periodic axes). Endpoints are stored with ``a < b``.
    """

    shape: tuple[int, ...]
    periodic: tuple[bool, ...]

    def __post_init__(self):
        d = len(self.shape)
        if not 1 <= d <= 3:
            raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
        if len(self.periodic) != d:
            raise ValueError("topology must give one flag per axis")
        for L, per in zip(self.shape, self.periodic):
            if L < 2:
                raise ValueError(f"side length must be >= 2, got {L}")
            if per and L < 3:
                raise ValueError("periodic axes need side length >= 3")

    @property
    def d(self) -> int:
        return len(self.shape)

    @property
    def L(self) -> int:
        """Side length; only defined for cubic boxes."""
        if len(set(self.shape)) != 1:
            raise ValueError(f"box {self.shape} is not cubic")
        return self.shape[0]

    @property
    def n_vertices(self) -> int:
        return int(np.prod(self.shape))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def fully_open(self) -> bool:
        return not any(self.periodic)

    @property
    def fully_periodic(self) -> bool:
        return all(self.periodic)

    @property
    def topology_label(self) -> str:
        if self.fully_open:
            return "open"
        if self.fully_periodic:
            return "periodic"
        return "".join("p" if p else "o" for p in self.periodic)

    @cached_property
    def coords(self) -> np.ndarray:
        """(N, d) integer coordinates, row-major order."""
        grids = np.indices(self.shape).reshape(self.d, -1)
        return np.ascontiguousarray(grids.T)

    def index(self, coord: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(coord), self.shape))

    @cached_property
    def _edge_tables(self):
        coords = self.coords
        ends, axes, wraps = [], [], []
        for v in range(self.n_vertices):
            for ax in range(self.d):
                c = coords[v].copy()
                c[ax] += 1
                wrap = False
                if c[ax] == self.shape[ax]:
                    if not self.periodic[ax]:
                        continue
                    c[ax] = 0
                    wrap = True
                u = self.index(c)
                ends.append((min(u, v), max(u, v)))
                axes.append(ax)
                wraps.append(wrap)
        edges = np.array(ends, dtype=np.int64).reshape(-1, 2)
        return edges, np.array(axes, dtype=np.int64), np.array(wraps, dtype=bool)

    @property
    def edges(self) -> np.ndarray:
        """(E, 2) array of endpoints, ``edges[e, 0] < edges[e, 1]``."""
        return self._edge_tables[0]

    @property
    def edge_axis(self) -> np.ndarray:
        return self._edge_tables[1]

    @property
    def edge_wraps(self) -> np.ndarray:
        """True for edges that close a periodic axis."""
        return self._edge_tables[2]

    @cached_property
    def edge_lookup(self) -> dict[tuple[int, int], int]:
        return {(int(a), int(b)): e for e, (a, b) in enumerate(self.edges)}

    def edge_index(self, u: int, v: int) -> int:
        try:
            return self.edge_lookup[(min(u, v), max(u, v))]
        except KeyError:
            raise ValueError(f"({u}, {v}) is not an edge") from None

    @cached_property
    def incidence(self) -> list[list[tuple[int, int]]]:
        """Per vertex, a list of (neighbour, edge index)."""
        inc: list[list[tuple[int, int]]] = [[] for _ in range(self.n_vertices)]
        for e, (a, b) in enumerate(self.edges):
            inc[a].append((int(b), e))
            inc[b].append((int(a), e))
        return inc

    @cached_property
    def boundary_slots(self) -> np.ndarray:
        """Vertices carrying an outer-layer neighbour, one row per slot.

        Slots are enumerated axis by axis over open axes only, low face then
        high face, face vertices in index order. A corner vertex owns one slot
        per open face it lies on.
        """
        coords = self.coords
        slots = []
        for ax in range(self.d):
            if self.periodic[ax]:
                continue
            for side in (0, self.shape[ax] - 1):
                slots.extend(np.flatnonzero(coords[:, ax] == side).tolist())
        return np.array(slots, dtype=np.int64)

    @property
    def n_boundary_slots(self) -> int:
        return len(self.boundary_slots)

    def expected_edge_count(self) -> int:
        total = 0
        for ax in range(self.d):
            others = int(np.prod([L for k, L in enumerate(self.shape) if k != ax]))
            per_line = self.shape[ax] if self.periodic[ax] else self.shape[ax] - 1
            total += others * per_line
        return total


def _parse_topology(topology: Topology, d: int) -> tuple[bool, ...]:
    if isinstance(topology, str):
        if topology == "open":
            return (False,) * d
        if topology == "periodic":
            return (True,) * d
        if len(topology) == d and set(topology) <= {"o", "p"}:
            return tuple(ch == "p" for ch in topology)
        raise ValueError(f"unknown topology {topology!r}")
    flags = tuple(bool(x) for x in topology)
    if len(flags) != d:
        raise ValueError("topology must give one flag per axis")
    return flags


def build(d: int, L: Union[int, Sequence[int]], topology: Topology = "open") -> BoxLattice:
    """Build a box of dimension ``d``; ``L`` is a side length or per-axis sizes."""
    if not 1 <= d <= 3:
        raise ValueError(f"dimension must be 1, 2 or 3, got {d}")
    shape = (int(L),) * d if np.isscalar(L) else tuple(int(x) for x in L)
    if len(shape) != d:
        raise ValueError(f"shape {shape} does not match d={d}")
    return BoxLattice(shape, _parse_topology(topology, d))


@dataclass(frozen=True)
class Region:
    """A vertex subset stored as an integer bitmask (bit v set iff v is inside)."""

    lattice: BoxLattice
    mask: int = 0

    @classmethod
    def from_vertices(cls, lattice: BoxLattice, vertices: Iterable[int]) -> "Region":
        mask = 0
        for v in vertices:
            v = int(v)
            if not 0 <= v < lattice.n_vertices:
                raise ValueError(f"vertex {v} outside lattice")
            mask |= 1 << v
        return cls(lattice, mask)

    @classmethod
    def full(cls, lattice: BoxLattice) -> "Region":
        return cls(lattice, (1 << lattice.n_vertices) - 1)

    def vertices(self) -> list[int]:
        out, m, v = [], self.mask, 0
        while m:
            if m & 1:
                out.append(v)
            m >>= 1
            v += 1
        return out

    def indicator(self) -> np.ndarray:
        ind = np.zeros(self.lattice.n_vertices, dtype=bool)
        ind[self.vertices()] = True
        return ind

    def complement(self) -> "Region":
        return Region(self.lattice, ((1 << self.lattice.n_vertices) - 1) & ~self.mask)

    def __contains__(self, v: int) -> bool:
        return bool((self.mask >> v) & 1)

    def __len__(self) -> int:
        return bin(self.mask).count("1")


def boundary_edges(lattice: BoxLattice, region: Region) -> np.ndarray:
    """Sorted indices of edges with exactly one endpoint inside ``region``."""
    if region.lattice != lattice:
        raise ValueError("region belongs to a different lattice")
    inside = region.indicator()
    e = lattice.edges
    return np.flatnonzero(inside[e[:, 0]] != inside[e[:, 1]])


def connected_components(lattice: BoxLattice, vertices: Region) -> list[Region]:
    """Nearest-neighbour connected pieces of ``vertices``, ordered by smallest vertex."""
    remaining = set(vertices.vertices())
    comps = []
    for start in sorted(remaining):
        if start not in remaining:
            continue
        remaining.discard(start)
        comp, queue = [start], deque([start])
        while queue:
            v = queue.popleft()
            for u, _ in lattice.incidence[v]:
                if u in remaining:
                    remaining.discard(u)
                    comp.append(u)
                    queue.append(u)
        comps.append(Region.from_vertices(lattice, comp))
    return comps


def gauge_align(sigma1: np.ndarray, sigma2: np.ndarray) -> np.ndarray:
    """Return ``sigma2`` or its global flip, whichever is closer to ``sigma1``.

    An exact tie (distance N/2) keeps ``sigma2``.
    """
    sigma1 = np.asarray(sigma1)
    sigma2 = np.asarray(sigma2)
    if sigma1.shape != sigma2.shape:
        raise ValueError("spin configurations differ in size")
    dist = int(np.count_nonzero(sigma1 != sigma2))
    if 2 * dist > sigma1.size:
        return -sigma2
    return sigma2.copy()


def edge_values(lattice: BoxLattice, sigma: np.ndarray) -> np.ndarray:
    """Edge variables sigma_x * sigma_y in canonical edge order."""
    e = lattice.edges
    sigma = np.asarray(sigma)
    return sigma[e[:, 0]] * sigma[e[:, 1]]


__all__ = [
    "BoxLattice",
    "Region",
    "build",
    "boundary_edges",
    "connected_components",
    "gauge_align",
    "edge_values",
]
