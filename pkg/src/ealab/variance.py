"""Monte Carlo checks of the variance machinery.

* the Gaussian interpolation identity Var h(Y) = int_0^inf sum_i E[d_i h(Y) d_i h(Y(s))] e^-s ds,
* the lower bound on Var(H(sigma1) - H(sigma2)) for replica pairs built from
  coupling-independent boundary conditions,
* its single-edge version, and
* the periodic/antiperiodic stiffness scan.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid as _trapezoid

from . import disorder as dis
from .excitation import _flex_from, solve_crossing
from .groundstate import BoundaryCondition, FastSolver, interior_energy
from .lattice import BoxLattice, build, edge_values
from .parallel import ordered_map
from .stats import ExponentFit, TrendTest, jackknife, loglog_fit, mann_kendall, mean_se, sample_variance

SCHEMA_VERSION = 1


# --- Gaussian identity ---------------------------------------------------------

# (variance, gradient) per test function; gradients act on an (m, n) sample array
_TEST_FUNCTIONS = {
    "linear": (1.0, lambda Y: np.stack([np.ones(len(Y))] + [np.zeros(len(Y))] * (Y.shape[1] - 1), axis=1)),
    "square": (2.0, lambda Y: np.concatenate([2 * Y[:, :1], np.zeros((len(Y), Y.shape[1] - 1))], axis=1)),
    "product": (1.0, lambda Y: np.concatenate([Y[:, 1:2], Y[:, :1], np.zeros((len(Y), Y.shape[1] - 2))], axis=1)),
    "cubic": (15.0, lambda Y: np.concatenate([3 * Y[:, :1] ** 2, np.zeros((len(Y), Y.shape[1] - 1))], axis=1)),
}


@dataclass(frozen=True)
class IdentityTest:
    h: str
    n: int
    n_samples: int
    exact: float
    estimate: float
    se: float
    tail: float
    quadrature_error: float
    passed: bool


def default_s_grid(s_max: float = 20.0, n: int = 400) -> np.ndarray:
    return np.concatenate([[0.0], np.logspace(-4, math.log10(s_max), n)])


def gaussian_identity_selftest(h: str = "linear", n: int = 4, n_samples: int = 100_000,
                               s_grid: Optional[Sequence[float]] = None, seed: int = 0,
                               chunk: int = 10_000) -> IdentityTest:
    """Monte Carlo estimate of the right side of the identity against the exact variance.

    For each sample pair (Y, Y') the integrand sum_i d_i h(Y) d_i h(Y(s)) e^-s,
    with Y(s) = e^-s Y + sqrt(1 - e^-2s) Y', is integrated over ``s_grid`` by the
    trapezoid rule. The tail beyond s_max is bounded by sup|integrand| e^-s_max
    through Cauchy-Schwarz and added to the error budget along with a
    quadrature error estimate (half-grid refinement difference).
    """
    if h not in _TEST_FUNCTIONS:
        raise ValueError(f"unknown test function {h!r}; choose from {sorted(_TEST_FUNCTIONS)}")
    if h == "product" and n < 2:
        raise ValueError("product test function needs n >= 2")
    exact, grad = _TEST_FUNCTIONS[h]
    s = default_s_grid() if s_grid is None else np.asarray(s_grid, dtype=np.float64)
    a = np.exp(-s)
    b = np.sqrt(-np.expm1(-2 * s))
    gen = dis.rng(seed, 0, 0)
    vals = np.empty(n_samples)
    coarse = np.empty(n_samples)
    g2 = np.empty(n_samples)  # E|grad h|^2 for the tail bound
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        Y = gen.standard_normal((m, n))
        Yp = gen.standard_normal((m, n))
        gY = grad(Y)
        integrand = np.empty((m, len(s)))
        for k in range(len(s)):
            integrand[:, k] = np.sum(gY * grad(a[k] * Y + b[k] * Yp), axis=1) * a[k]
        vals[done:done + m] = _trapezoid(integrand, s, axis=1)
        coarse[done:done + m] = _trapezoid(integrand[:, ::2], s[::2], axis=1)
        g2[done:done + m] = np.sum(gY * gY, axis=1)
        done += m
    est, se = mean_se(vals)
    # |E[grad h(Y) . grad h(Y(s))]| <= E|grad h|^2 by Cauchy-Schwarz and stationarity
    tail = float(np.mean(g2)) * math.exp(-s[-1])
    quad = abs(float(np.mean(vals) - np.mean(coarse)))
    budget = math.sqrt(se**2 + tail**2 + quad**2)
    passed = abs(est - exact) <= 3 * budget
    return IdentityTest(h, n, n_samples, exact, est, se, tail, quad, passed)


# --- replica ensembles ---------------------------------------------------------------

@dataclass(frozen=True)
class ReplicaEnsemble:
    """How the two replicas' boundary conditions are generated.

    ``PA``: periodic box, replica 1 periodic, replica 2 antiperiodic along axis 0.
    ``FF``: open box with an outer layer; both replicas share the outer-layer
    couplings, and each draws its own random outer spins.
    ``identical``: both replicas use the same boundary condition (diagnostic).
    All boundary data is drawn from streams independent of the interior couplings.
    """

    kind: str = "FF"
    d: int = 2
    method: str = "auto"
    identical_bc: str = "periodic"

    def __post_init__(self):
        if self.kind not in ("PA", "FF", "identical"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")

    def lattice(self, L: int) -> BoxLattice:
        if self.kind == "PA" or (self.kind == "identical" and self.identical_bc == "periodic"):
            return build(self.d, L, "periodic")
        return build(self.d, L, "open")

    def boundary_conditions(self, lattice: BoxLattice, seed: int, r: int) -> tuple[BoundaryCondition, BoundaryCondition]:
        if self.kind == "PA":
            return BoundaryCondition.periodic(), BoundaryCondition.antiperiodic(0)
        if self.kind == "identical":
            bc = BoundaryCondition.periodic() if self.identical_bc == "periodic" else BoundaryCondition.free()
            return bc, bc
        m = lattice.n_boundary_slots
        Jb = dis.rng(seed, r, dis.STREAM_BOUNDARY_J).standard_normal(m)
        xi1 = 1 - 2 * dis.rng(seed, r, dis.STREAM_XI1).integers(0, 2, m)
        xi2 = 1 - 2 * dis.rng(seed, r, dis.STREAM_XI2).integers(0, 2, m)
        return BoundaryCondition.fixed(xi1, Jb), BoundaryCondition.fixed(xi2, Jb)

    @property
    def label(self) -> str:
        return self.kind if self.kind != "identical" else f"identical-{self.identical_bc}"


def wrap_bookkeeping(lattice: BoxLattice, J: dis.CouplingField, sigma: np.ndarray, axis: int = 0) -> float:
    """2 sum over wrap edges of ``axis`` of J_e sigma_e, so that
    H(sigma) = E_antiperiodic(sigma) - wrap_bookkeeping(sigma)."""
    mask = lattice.edge_wraps & (lattice.edge_axis == axis)
    return float(2.0 * np.sum(J.values[mask] * edge_values(lattice, sigma)[mask]))


# --- per-realization records ------------------------------------------------------------

@dataclass(frozen=True)
class ReplicaRecord:
    r: int
    dH: float
    E1: float
    E2: float
    bookkeeping: float
    q12: float  # 1 - Q(sigma1, sigma2)
    d1: np.ndarray  # 1 - Q(sigma1, sigma1(s)) per s
    d2: np.ndarray
    cross: np.ndarray  # sum_b (sigma1_b(s)-sigma2_b(s))(sigma1_b(0)-sigma2_b(0)) per s
    degenerate: bool


def _replica_realization(r: int, ens: ReplicaEnsemble, lattice: BoxLattice, seed: int,
                         s_grid: np.ndarray) -> ReplicaRecord:
    J = dis.sample(lattice, seed, r, dis.STREAM_J)
    Jp = dis.sample(lattice, seed, r, dis.STREAM_JPRIME)
    bc1, bc2 = ens.boundary_conditions(lattice, seed, r)
    s1 = FastSolver(lattice, bc1, ens.method)
    s2 = s1 if ens.kind == "identical" else FastSolver(lattice, bc2, ens.method)
    g1 = s1.solve_values(J.values)
    g2 = g1 if ens.kind == "identical" else s2.solve_values(J.values)
    deg = g1.degenerate or g2.degenerate
    dH = interior_energy(lattice, J, g1.config) - interior_energy(lattice, J, g2.config)
    book = wrap_bookkeeping(lattice, J, g2.config) if ens.kind == "PA" else 0.0
    ev1 = edge_values(lattice, g1.config)
    ev2 = edge_values(lattice, g2.config)
    q12 = 1.0 - float(np.mean(ev1 * ev2))
    path = dis.InterpolationPath(J, Jp)
    n = len(s_grid)
    d1, d2, cross = np.zeros(n), np.zeros(n), np.zeros(n)
    for k, s in enumerate(s_grid):
        if s == 0:
            e1s, e2s = ev1, ev2
        else:
            vals = dis.interpolate(path, float(s)).values
            h1 = s1.solve_values(vals)
            h2 = h1 if ens.kind == "identical" else s2.solve_values(vals)
            deg |= h1.degenerate or h2.degenerate
            e1s = edge_values(lattice, h1.config)
            e2s = edge_values(lattice, h2.config)
        d1[k] = 1.0 - float(np.mean(ev1 * e1s))
        d2[k] = 1.0 - float(np.mean(ev2 * e2s))
        cross[k] = float(np.sum((e1s - e2s) * (ev1 - ev2)))
    return ReplicaRecord(r, dH, g1.energy, g2.energy, book, q12, d1, d2, cross, deg)


def replica_records(ens: ReplicaEnsemble, L: int, n_real: int, seed: int,
                    s_grid: Sequence[float] = (0.0,), workers: int = 1) -> tuple[list[ReplicaRecord], int]:
    lattice = ens.lattice(L)
    task = functools.partial(_replica_realization, ens=ens, lattice=lattice, seed=seed,
                             s_grid=np.asarray(s_grid, dtype=np.float64))
    recs = ordered_map(task, range(n_real), workers)
    kept = [r for r in recs if not r.degenerate or ens.kind == "identical"]
    return kept, n_real - len(kept)


# --- bound sides --------------------------------------------------------------------------

@dataclass(frozen=True)
class SideEstimate:
    value: float
    se: float


def lhs_from_records(recs: Sequence[ReplicaRecord]) -> SideEstimate:
    dH = np.array([r.dH for r in recs])
    v, se = jackknife(dH, sample_variance)
    return SideEstimate(v, 0.0 if math.isnan(se) else se)


def lhs_variance(ens: ReplicaEnsemble, L: int, n_real: int, seed: int = 0, workers: int = 1) -> SideEstimate:
    """Sample variance of H(sigma1) - H(sigma2) over the box's own edges, jackknife SE."""
    recs, _ = replica_records(ens, L, n_real, seed, (0.0,), workers)
    return lhs_from_records(recs)


def rhs_s_grid(t: float, n: int = 20) -> np.ndarray:
    """0 followed by ``n`` log-spaced points ending at t."""
    return np.concatenate([[0.0], t * np.logspace(-3, 0, n)])


def _rhs_value(data: np.ndarray, s: np.ndarray, n_edges: int) -> float:
    """data columns: q12, d1(s)..., d2(s)...; square roots act on the means."""
    m = data.mean(axis=0)
    k = len(s)
    q12 = m[0]
    d1 = m[1:1 + k]
    d2 = m[1 + k:1 + 2 * k]
    integrand = (q12 - np.sqrt(np.maximum(2 * d1, 0.0)) - np.sqrt(np.maximum(2 * d2, 0.0))) * np.exp(-s)
    return float(2 * n_edges * _trapezoid(integrand, s))


def rhs_from_records(recs: Sequence[ReplicaRecord], s_grid: np.ndarray, n_edges: int) -> SideEstimate:
    data = np.array([np.concatenate([[r.q12], r.d1, r.d2]) for r in recs])
    v, se = jackknife(data, lambda x: _rhs_value(x, s_grid, n_edges))
    return SideEstimate(v, 0.0 if math.isnan(se) else se)


def rhs_bound(ens: ReplicaEnsemble, L: int, t: float, s_grid: Optional[Sequence[float]] = None,
              n_real: int = 100, seed: int = 0, workers: int = 1) -> SideEstimate:
    """2|E| int_0^t {E[1-Q(s1,s2)] - sum_i (2 E[1-Q(s_i, s_i(s))])^(1/2)} e^-s ds."""
    if t <= 0:
        raise ValueError("t must be positive")
    s = rhs_s_grid(t) if s_grid is None else np.asarray(s_grid, dtype=np.float64)
    if np.any(s < 0) or np.any(s > t):
        raise ValueError("s_grid must lie in [0, t]")
    recs, _ = replica_records(ens, L, n_real, seed, s, workers)
    return rhs_from_records(recs, s, ens.lattice(L).n_edges)


def _verdict(lhs: SideEstimate, rhs: SideEstimate) -> str:
    if rhs.value <= 0:
        return "bound holds trivially"
    if lhs.value - 2 * lhs.se >= rhs.value + 2 * rhs.se:
        return "bound holds"
    if lhs.value + 2 * lhs.se >= rhs.value - 2 * rhs.se:
        return "inconclusive"
    return "violated"


@dataclass(frozen=True, eq=False)
class VarianceReport:
    L: int
    ensemble: str
    n_real: int
    n_discarded: int
    t: float
    s_grid: np.ndarray
    lhs: SideEstimate
    rhs: SideEstimate
    incongruence: SideEstimate
    cross_mean: np.ndarray
    cross_se: np.ndarray
    verdict: str
    seed: int
    records: list = field(repr=False, default_factory=list)

    @property
    def consistent(self) -> bool:
        """LHS + 2 SE >= RHS - 2 SE."""
        return self.lhs.value + 2 * self.lhs.se >= self.rhs.value - 2 * self.rhs.se

    @property
    def cross_nonnegative(self) -> bool:
        return bool(np.all(self.cross_mean >= -3 * self.cross_se))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "L": self.L,
            "ensemble": self.ensemble,
            "seed": self.seed,
            "n_real": self.n_real,
            "n_discarded": self.n_discarded,
            "t": self.t,
            "s_grid": [float(x) for x in self.s_grid],
            "lhs": {"value": self.lhs.value, "se": self.lhs.se},
            "rhs": {"value": self.rhs.value, "se": self.rhs.se},
            "incongruence_proxy": {"value": self.incongruence.value, "se": self.incongruence.se},
            "cross_term_mean": [float(x) for x in self.cross_mean],
            "cross_term_se": [float(x) for x in self.cross_se],
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    CSV_HEADER = ("r", "dH", "E1", "E2", "bookkeeping", "one_minus_Q12")

    def csv_rows(self) -> list[tuple]:
        return [(r.r, repr(r.dH), repr(r.E1), repr(r.E2), repr(r.bookkeeping), repr(r.q12)) for r in self.records]


def variance_report(ens: ReplicaEnsemble, L: int, t: float = 0.5, n_real: int = 200, seed: int = 0,
                    s_grid: Optional[Sequence[float]] = None, workers: int = 1) -> VarianceReport:
    """Both sides of the variance bound from one shared set of realizations."""
    s = rhs_s_grid(t) if s_grid is None else np.asarray(s_grid, dtype=np.float64)
    recs, n_disc = replica_records(ens, L, n_real, seed, s, workers)
    lattice = ens.lattice(L)
    lhs = lhs_from_records(recs)
    rhs = rhs_from_records(recs, s, lattice.n_edges)
    q = mean_se([r.q12 for r in recs])
    cross = np.array([r.cross for r in recs])
    cm = cross.mean(axis=0)
    cse = cross.std(axis=0, ddof=1) / math.sqrt(len(recs)) if len(recs) > 1 else np.zeros(len(s))
    return VarianceReport(int(L), ens.label, len(recs), n_disc, float(t), s, lhs, rhs,
                          SideEstimate(q[0], 0.0 if math.isnan(q[1]) else q[1]), cm, cse,
                          _verdict(lhs, rhs), int(seed), recs)


def triangle_check(lattice: BoxLattice, n_triples: int, seed: int = 0, tol: float = 1e-12) -> tuple[bool, float]:
    """sqrt(2 - 2 Q(a, c)) <= sqrt(2 - 2 Q(a, b)) + sqrt(2 - 2 Q(b, c)) on random configs.

    Returns (all passed, worst slack).
    """
    gen = dis.rng(seed, 0, 0)
    S = 1 - 2 * gen.integers(0, 2, size=(n_triples, 3, lattice.n_vertices)).astype(np.int8)
    e = lattice.edges
    ev = (S[:, :, e[:, 0]] * S[:, :, e[:, 1]]).astype(np.float64)

    def dist(i, j):
        q = np.mean(ev[:, i] * ev[:, j], axis=1)
        return np.sqrt(np.maximum(2.0 - 2.0 * q, 0.0))

    slack = dist(0, 1) + dist(1, 2) - dist(0, 2)
    worst = float(slack.min())
    return worst >= -tol, worst


# --- single edge --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SingleEdgeReport:
    edge: int
    L: int
    ensemble: str
    n_real: int
    t: float
    lhs: SideEstimate
    rhs: SideEstimate
    verdict: str
    exit_times: np.ndarray  # per realization and replica, first time sigma_b(t) != sigma_b(0) (inf if none)
    window_lower: np.ndarray  # guaranteed constancy time from F_b(0)
    window_violations: int


def _flip_count(times: Sequence[float], s: float) -> int:
    return sum(1 for x in times if x <= s)


def _single_edge_realization(r: int, ens: ReplicaEnsemble, lattice: BoxLattice, seed: int, b: int,
                             s_grid: np.ndarray, t: float):
    J = dis.sample(lattice, seed, r, dis.STREAM_J)
    Jp = dis.sample(lattice, seed, r, dis.STREAM_JPRIME)
    bc1, bc2 = ens.boundary_conditions(lattice, seed, r)
    out = []
    deg = False
    for bc in (bc1, bc2):
        solver = FastSolver(lattice, bc, ens.method)
        rec, pair = _flex_from(solver, J.values, b)
        deg |= rec.degenerate
        sign = rec.ground_sign
        # sigma_b(s) flips exactly when J_b(s) crosses C_b (only J_b moves)
        times = solve_crossing(float(J.values[b]), float(Jp.values[b]), rec.C, max(t, 1.0))
        scale = max(abs(J.values[b]), abs(Jp.values[b]))
        lower = min(1.0, (rec.F / (6.0 * scale)) ** 2)
        g = pair.ground
        out.append((sign, times, lower, g))
    (s1, t1, l1, g1), (s2, t2, l2, g2) = out
    dH = interior_energy(lattice, J, g1) - interior_energy(lattice, J, g2)
    d1 = np.array([1.0 - (-1) ** _flip_count(t1, s) for s in s_grid])  # 1 - sigma_b(0) sigma_b(s)
    d2 = np.array([1.0 - (-1) ** _flip_count(t2, s) for s in s_grid])
    q12 = 1.0 - s1 * s2
    exits = (t1[0] if t1 else math.inf, t2[0] if t2 else math.inf)
    return dH, q12, d1, d2, exits, (l1, l2), deg


def single_edge_bound(ens: ReplicaEnsemble, L: int, b: int, n_real: int = 200, seed: int = 0,
                      t: float = 0.5, s_grid: Optional[Sequence[float]] = None, workers: int = 1) -> SingleEdgeReport:
    """Variance bound with only edge b interpolated and Q replaced by sigma1_b sigma2_b.

    Exit times of sigma_b come from the exact crossings of J_b(s) with C_b;
    each is compared with the guaranteed window (F_b(0) / (6 max(|J_b|, |J'_b|)))^2.
    """
    lattice = ens.lattice(L)
    if not 0 <= b < lattice.n_edges:
        raise ValueError(f"edge {b} outside lattice")
    s = rhs_s_grid(t) if s_grid is None else np.asarray(s_grid, dtype=np.float64)
    task = functools.partial(_single_edge_realization, ens=ens, lattice=lattice, seed=seed, b=b, s_grid=s, t=t)
    res = [x for x in ordered_map(task, range(n_real), workers) if not x[6]]
    dH = np.array([x[0] for x in res])
    lhs = SideEstimate(*jackknife(dH, sample_variance))
    data = np.array([np.concatenate([[x[1]], x[2], x[3]]) for x in res])

    def rhs_fn(x):
        m = x.mean(axis=0)
        k = len(s)
        integrand = (m[0] - np.sqrt(2 * m[1:1 + k]) - np.sqrt(2 * m[1 + k:])) * np.exp(-s)
        return float(2 * _trapezoid(integrand, s))

    rhs = SideEstimate(*jackknife(data, rhs_fn))
    exits = np.array([x[4] for x in res])
    lower = np.array([x[5] for x in res])
    viol = int(np.count_nonzero(exits < lower))
    return SingleEdgeReport(b, int(L), ens.label, len(res), float(t), lhs, rhs, _verdict(lhs, rhs),
                            exits, lower, viol)


# --- stiffness --------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StiffnessScan:
    d: int
    L_list: tuple
    var: np.ndarray
    var_se: np.ndarray
    mean: np.ndarray
    n_real: dict
    n_discarded: dict
    theta2: ExponentFit
    ratio: np.ndarray  # Var(X) / L^(d-1)
    trend: TrendTest
    samples: dict = field(repr=False, default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "d": self.d,
            "L": list(self.L_list),
            "var": [float(v) for v in self.var],
            "var_se": [float(v) for v in self.var_se],
            "mean": [float(v) for v in self.mean],
            "n_real": {str(k): v for k, v in self.n_real.items()},
            "n_discarded": {str(k): v for k, v in self.n_discarded.items()},
            "two_theta": self.theta2.to_dict(),
            "var_over_L^(d-1)": [float(v) for v in self.ratio],
            "trend": {"tau": self.trend.tau, "p_value": self.trend.p_value, "increasing": self.trend.increasing},
        }


def _stiffness_realization(r: int, lattice: BoxLattice, seed: int, method: str, ferromagnet: bool):
    J = dis.constant(lattice, 1.0) if ferromagnet else dis.sample(lattice, seed, r, dis.STREAM_J)
    gp = FastSolver(lattice, BoundaryCondition.periodic(), method).solve_values(J.values)
    ga = FastSolver(lattice, BoundaryCondition.antiperiodic(0), method).solve_values(J.values)
    return gp.energy - ga.energy, gp.degenerate or ga.degenerate


def stiffness_samples(d: int, L: int, n_real: int, seed: int = 0, method: str = "auto", workers: int = 1,
                      ferromagnet: bool = False) -> tuple[np.ndarray, int]:
    """X = E_periodic - E_antiperiodic per realization (degenerate ones dropped unless ferromagnetic)."""
    lattice = build(d, L, "periodic")
    task = functools.partial(_stiffness_realization, lattice=lattice, seed=seed, method=method,
                             ferromagnet=ferromagnet)
    res = ordered_map(task, range(n_real), workers)
    X = np.array([x for x, deg in res if ferromagnet or not deg])
    return X, n_real - len(X)


def stiffness_scan(d: int, L_list: Sequence[int], n_real: int = 500, seed: int = 0, method: str = "auto",
                   workers: int = 1, ferromagnet: bool = False) -> StiffnessScan:
    """Var(E_P - E_AP) per L, 2 theta from a log-log fit, and a trend test on Var / L^(d-1)."""
    if len(L_list) < 3:
        raise ValueError("need at least 3 sizes")
    var, var_se, mean, nr, nd, samples = [], [], [], {}, {}, {}
    for L in L_list:
        X, n_disc = stiffness_samples(d, L, n_real, seed, method, workers, ferromagnet)
        v, se = jackknife(X, sample_variance)
        var.append(v)
        var_se.append(0.0 if math.isnan(se) else se)
        mean.append(float(X.mean()))
        nr[int(L)] = len(X)
        nd[int(L)] = n_disc
        samples[int(L)] = X
    var = np.array(var)
    Ls = np.array(L_list, dtype=np.float64)
    if np.all(var > 0):
        theta2 = loglog_fit(Ls, var, fit_range=tuple(int(L) for L in L_list))
    else:
        theta2 = ExponentFit(math.nan, math.nan, math.nan, math.nan, tuple(int(L) for L in L_list))
    ratio = var / Ls ** (d - 1)
    trend = mann_kendall(Ls, ratio)
    return StiffnessScan(d, tuple(int(L) for L in L_list), var, np.array(var_se), np.array(mean),
                         nr, nd, theta2, ratio, trend, samples)


__all__ = [
    "IdentityTest",
    "gaussian_identity_selftest",
    "ReplicaEnsemble",
    "ReplicaRecord",
    "SideEstimate",
    "VarianceReport",
    "SingleEdgeReport",
    "StiffnessScan",
    "lhs_variance",
    "rhs_bound",
    "variance_report",
    "single_edge_bound",
    "stiffness_scan",
    "stiffness_samples",
    "triangle_check",
    "wrap_bookkeeping",
]
