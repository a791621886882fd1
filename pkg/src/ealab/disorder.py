"""Gaussian coupling fields, the exponential interpolation path and the Delta-J perturbation.

Random numbers come from a Philox (counter-based) generator keyed by
``(master seed, realization, stream)``, so a realization's couplings never
depend on how realizations are distributed over workers.
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .lattice import BoxLattice

# Stream tags for the quantities drawn per realization.
STREAM_J = 0
STREAM_JPRIME = 1
STREAM_ETA = 2
STREAM_BOUNDARY_J = 3
STREAM_XI1 = 4
STREAM_XI2 = 5

_MAGIC = b"EACF"
_FORMAT_VERSION = 1


def rng(seed: int, realization: int = 0, stream: int = 0) -> np.random.Generator:
    """Independent generator for one (seed, realization, stream) key."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(int(realization), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True, eq=False)
class CouplingField:
    """One real coupling per canonical edge of ``lattice``."""

    lattice: BoxLattice
    values: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.shape != (self.lattice.n_edges,):
            raise ValueError(f"expected {self.lattice.n_edges} couplings, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("couplings must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CouplingField):
            return NotImplemented
        return self.lattice == other.lattice and np.array_equal(self.values, other.values)

    def with_values(self, values: np.ndarray) -> "CouplingField":
        return CouplingField(self.lattice, values, self.seed)

    def with_edge(self, e: int, value: float) -> "CouplingField":
        vals = self.values.copy()
        vals[e] = value
        return CouplingField(self.lattice, vals, self.seed)


def sample(lattice: BoxLattice, seed: int, realization: int = 0, stream: int = STREAM_J) -> CouplingField:
    """I.i.d. standard normal couplings, one per edge in canonical order."""
    vals = rng(seed, realization, stream).standard_normal(lattice.n_edges)
    return CouplingField(lattice, vals, seed)


def constant(lattice: BoxLattice, value: float = 1.0) -> CouplingField:
    return CouplingField(lattice, np.full(lattice.n_edges, float(value)))


@dataclass(frozen=True, eq=False)
class InterpolationPath:
    """J(t) = e^-t J + sqrt(1 - e^-2t) J' on ``edges``; other edges stay at J."""

    base: CouplingField
    target: CouplingField
    edges: Optional[np.ndarray] = None  # None means every edge

    def __post_init__(self):
        if self.base.lattice != self.target.lattice:
            raise ValueError("base and target live on different lattices")
        if self.edges is not None:
            mask = np.zeros(self.base.lattice.n_edges, dtype=bool)
            mask[np.asarray(self.edges, dtype=np.int64)] = True
            object.__setattr__(self, "edges", np.flatnonzero(mask))

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.base.lattice.n_edges, dtype=bool)
        if self.edges is None:
            m[:] = True
        else:
            m[self.edges] = True
        return m


def interpolation_weights(t: float) -> tuple[float, float]:
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    a = math.exp(-t)
    # -expm1(-2t) keeps precision for tiny t
    b = math.sqrt(-math.expm1(-2.0 * t))
    return a, b


def interpolate(path: InterpolationPath, t: float) -> CouplingField:
    a, b = interpolation_weights(t)
    if t == 0:
        return path.base
    vals = path.base.values.copy()
    m = path.mask
    vals[m] = a * path.base.values[m] + b * path.target.values[m]
    return path.base.with_values(vals)


def perturb(J: CouplingField, eta: CouplingField, delta_j: float) -> CouplingField:
    """J -> (J + eta * dJ) / sqrt(1 + dJ^2), marginals stay standard normal."""
    if delta_j < 0:
        raise ValueError(f"Delta J must be nonnegative, got {delta_j}")
    if J.lattice != eta.lattice:
        raise ValueError("J and eta live on different lattices")
    if delta_j == 0:
        return J
    return J.with_values((J.values + eta.values * delta_j) / math.sqrt(1.0 + delta_j**2))


def deltaj_to_t(delta_j: float) -> float:
    """t with Corr(J, J(t)) = Corr(J, perturb(J, eta, dJ)), i.e. e^-t = (1 + dJ^2)^-1/2."""
    if delta_j < 0:
        raise ValueError(f"Delta J must be nonnegative, got {delta_j}")
    return 0.5 * math.log1p(delta_j**2)


def t_to_deltaj(t: float) -> float:
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return math.sqrt(math.expm1(2.0 * t))


# --- serialization -----------------------------------------------------------

def _header(field: CouplingField) -> dict:
    lat = field.lattice
    return {
        "d": lat.d,
        "shape": list(lat.shape),
        "periodic": [int(p) for p in lat.periodic],
        "seed": "none" if field.seed is None else int(field.seed),
    }


def to_bytes(field: CouplingField) -> bytes:
    """Binary layout (little endian): magic, u32 version, u32 d, d x u32 sides,
    d x u8 periodic flags, u8 has-seed flag, u64 seed, u64 n_edges, n_edges x f64."""
    lat = field.lattice
    buf = io.BytesIO()
    buf.write(_MAGIC)
    buf.write(struct.pack("<II", _FORMAT_VERSION, lat.d))
    buf.write(struct.pack(f"<{lat.d}I", *lat.shape))
    buf.write(struct.pack(f"<{lat.d}B", *[int(p) for p in lat.periodic]))
    seed = 0 if field.seed is None else int(field.seed)
    buf.write(struct.pack("<BQQ", field.seed is not None, seed, lat.n_edges))
    buf.write(field.values.astype("<f8").tobytes())
    return buf.getvalue()


def from_bytes(data: bytes) -> CouplingField:
    if data[:4] != _MAGIC:
        raise ValueError("not a coupling-field file")
    off = 4
    version, d = struct.unpack_from("<II", data, off)
    off += 8
    if version != _FORMAT_VERSION:
        raise ValueError(f"unsupported format version {version}")
    shape = struct.unpack_from(f"<{d}I", data, off)
    off += 4 * d
    periodic = struct.unpack_from(f"<{d}B", data, off)
    off += d
    has_seed, seed, n = struct.unpack_from("<BQQ", data, off)
    off += 17
    lat = BoxLattice(tuple(shape), tuple(bool(p) for p in periodic))
    if n != lat.n_edges:
        raise ValueError("edge count does not match header lattice")
    vals = np.frombuffer(data, dtype="<f8", count=n, offset=off).astype(np.float64)
    return CouplingField(lat, vals, seed if has_seed else None)


def to_csv(field: CouplingField) -> str:
    h = _header(field)
    lines = [
        f"# format=ealab-couplings version={_FORMAT_VERSION}",
        f"# d={h['d']} shape={','.join(map(str, h['shape']))} "
        f"periodic={','.join(map(str, h['periodic']))} seed={h['seed']}",
        "edge,value",
    ]
    # repr() of a Python float round-trips exactly
    lines += [f"{e},{float(v)!r}" for e, v in enumerate(field.values)]
    return "\n".join(lines) + "\n"


def from_csv(text: str) -> CouplingField:
    lines = text.splitlines()
    meta = dict(kv.split("=", 1) for kv in lines[1].lstrip("# ").split())
    shape = tuple(int(x) for x in meta["shape"].split(","))
    periodic = tuple(bool(int(x)) for x in meta["periodic"].split(","))
    seed = None if meta["seed"] == "none" else int(meta["seed"])
    vals = [float(line.split(",")[1]) for line in lines[3:] if line.strip()]
    lat = BoxLattice(shape, periodic)
    return CouplingField(lat, np.array(vals), seed)


def save(field: CouplingField, path: Union[str, Path]) -> None:
    path = Path(path)
    if path.suffix == ".csv":
        path.write_text(to_csv(field))
    else:
        path.write_bytes(to_bytes(field))


def load(path: Union[str, Path]) -> CouplingField:
    path = Path(path)
    if path.suffix == ".csv":
        return from_csv(path.read_text())
    return from_bytes(path.read_bytes())
