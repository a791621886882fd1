"""Disorder-chaos experiments: overlap decay along the interpolation path,
chaos thresholds and their scaling, droplet sizes, flexibility densities,
finite-size collapse of the overlap curves, and exponent-relation checks.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy import interpolate as _interp
from scipy import optimize as _opt
from scipy import special as _special

from . import disorder as dis
from .excitation import _droplet_from, droplet_boundary_size
from .groundstate import BoundaryCondition, FastSolver
from .lattice import BoxLattice, build, edge_values
from .parallel import ordered_map
from .stats import ExponentFit, binomial_se, loglog_fit

MAX_DEGENERATE_FRACTION = 1e-3

BCSpec = Union[str, BoundaryCondition]


def default_t_grid(n: int = 25, t_min: float = 1e-6, t_max: float = 10.0) -> np.ndarray:
    """t = 0 followed by ``n`` log-spaced points in [t_min, t_max]."""
    return np.concatenate([[0.0], np.logspace(math.log10(t_min), math.log10(t_max), n)])


def resolve_bc(bc: BCSpec) -> BoundaryCondition:
    if isinstance(bc, BoundaryCondition):
        return bc
    if bc == "free":
        return BoundaryCondition.free()
    if bc == "periodic":
        return BoundaryCondition.periodic()
    if bc.startswith("antiperiodic"):
        axis = int(bc[len("antiperiodic"):] or 0)
        return BoundaryCondition.antiperiodic(axis)
    raise ValueError(f"unsupported boundary condition {bc!r}")


def make_lattice(d: int, L, bc: BoundaryCondition, topology: Optional[str] = None) -> BoxLattice:
    if topology is None:
        topology = "periodic" if bc.kind in ("periodic", "antiperiodic") else "open"
    return build(d, L, topology)


class DegeneracyError(RuntimeError):
    """Too many realizations had tied ground states."""


def _check_degenerate(n_disc: int, n_real: int, limit: float) -> None:
    if n_disc > limit * n_real:
        raise DegeneracyError(f"{n_disc} of {n_real} realizations degenerate (limit {limit:.1%})")


# --- overlap curves -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChaosCurve:
    d: int
    L: int
    bc: str
    t_grid: np.ndarray
    mean: np.ndarray
    se: np.ndarray
    q05: np.ndarray
    q50: np.ndarray
    q95: np.ndarray
    n_real: int
    n_discarded: int
    seed: int
    overlaps: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "L": self.L,
            "bc": self.bc,
            "seed": self.seed,
            "n_real": self.n_real,
            "n_discarded": self.n_discarded,
            "t": [float(x) for x in self.t_grid],
            "mean": [float(x) for x in self.mean],
            "se": [float(x) for x in self.se],
            "q05": [float(x) for x in self.q05],
            "q50": [float(x) for x in self.q50],
            "q95": [float(x) for x in self.q95],
        }

    def csv_rows(self) -> list[tuple]:
        return [
            (self.d, self.L, self.bc, repr(float(t)), repr(float(m)), repr(float(s)),
             repr(float(a)), repr(float(b)), repr(float(c)), self.n_real)
            for t, m, s, a, b, c in zip(self.t_grid, self.mean, self.se, self.q05, self.q50, self.q95)
        ]

    CSV_HEADER = ("d", "L", "bc", "t", "mean_Q", "se_Q", "q05", "q50", "q95", "n_real")


def _chaos_realization(r: int, lattice: BoxLattice, bc: BoundaryCondition, method: str,
                       seed: int, t_grid: np.ndarray, same_target: bool):
    J = dis.sample(lattice, seed, r, dis.STREAM_J)
    Jp = J if same_target else dis.sample(lattice, seed, r, dis.STREAM_JPRIME)
    path = dis.InterpolationPath(J, Jp)
    solver = FastSolver(lattice, bc, method)
    g0 = solver.solve_values(J.values)
    ev0 = edge_values(lattice, g0.config)
    q = np.empty(len(t_grid))
    degenerate = g0.degenerate
    for k, t in enumerate(t_grid):
        if t == 0:
            q[k] = 1.0
            continue
        g = solver.solve_values(dis.interpolate(path, float(t)).values)
        degenerate |= g.degenerate
        q[k] = float(np.mean(ev0 * edge_values(lattice, g.config)))
    return q, degenerate


def chaos_curve(d: int, L: int, bc: BCSpec = "free", t_grid: Optional[Sequence[float]] = None,
                n_real: int = 100, seed: int = 0, topology: Optional[str] = None,
                method: str = "auto", workers: int = 1, same_target: bool = False,
                max_degenerate: float = MAX_DEGENERATE_FRACTION) -> ChaosCurve:
    """Edge overlap Q(sigma(0), sigma(t)) statistics over ``n_real`` disorder samples.

    ``same_target`` sets J' = J, which makes the path constant.
    """
    if n_real < 1:
        raise ValueError("n_real must be >= 1")
    bc = resolve_bc(bc)
    lattice = make_lattice(d, L, bc, topology)
    bc.validate(lattice)
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=np.float64)
    if np.any(t_grid < 0) or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be nonnegative and strictly increasing")
    task = functools.partial(_chaos_realization, lattice=lattice, bc=bc, method=method,
                             seed=seed, t_grid=t_grid, same_target=same_target)
    results = ordered_map(task, range(n_real), workers)
    kept = [q for q, deg in results if not deg]
    n_disc = n_real - len(kept)
    _check_degenerate(n_disc, n_real, max_degenerate)
    Q = np.array(kept).reshape(len(kept), len(t_grid))
    mean = Q.mean(axis=0)
    se = Q.std(axis=0, ddof=1) / math.sqrt(len(Q)) if len(Q) > 1 else np.full(len(t_grid), np.nan)
    q05, q50, q95 = np.quantile(Q, [0.05, 0.5, 0.95], axis=0)
    return ChaosCurve(d, int(L), bc.label, t_grid, mean, se, q05, q50, q95, len(kept), n_disc, int(seed), Q)


# --- chaos threshold and its scaling -------------------------------------------

@dataclass(frozen=True)
class Threshold:
    t_star: float
    eps: float
    flagged: bool


def adc_threshold(curve: ChaosCurve, eps: float) -> Threshold:
    """End of the initial run of positive grid times with mean(1 - Q) <= eps.

    If even the first positive grid time fails, that time is returned with
    ``flagged`` set.
    """
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    pos = np.flatnonzero(curve.t_grid > 0)
    if len(pos) == 0:
        raise ValueError("curve has no positive grid times")
    ok = (1.0 - curve.mean[pos]) <= eps
    if not ok[0]:
        return Threshold(float(curve.t_grid[pos[0]]), eps, True)
    n_ok = len(ok) if ok.all() else int(np.argmin(ok))
    return Threshold(float(curve.t_grid[pos[n_ok - 1]]), eps, False)


def fit_alpha(thresholds: Sequence[tuple[int, float]], d: int) -> ExponentFit:
    """alpha from t* ~ |Lambda|^-alpha, i.e. minus the slope of log t* on d log L."""
    if len(thresholds) < 3:
        raise ValueError("need at least 3 sizes")
    Ls = np.array([L for L, _ in thresholds], dtype=np.float64)
    ts = np.array([t for _, t in thresholds], dtype=np.float64)
    return loglog_fit(Ls**d, ts, sign=-1.0, fit_range=tuple(int(L) for L in Ls))


# --- droplet sizes --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DropletScan:
    d: int
    L_list: tuple[int, ...]
    sizes: dict  # L -> (n_real_kept, n_edges) array of |boundary|
    gamma: ExponentFit
    d_f: ExponentFit
    n_discarded: dict
    rows: list = field(repr=False, default_factory=list)

    def tail_cdf(self, L: int) -> tuple[np.ndarray, np.ndarray]:
        """P(|boundary| >= k) for every observed size k."""
        s = np.sort(self.sizes[L].ravel())
        ks = np.unique(s)
        frac = np.array([np.mean(s >= k) for k in ks])
        return ks, frac

    def summary(self) -> dict:
        out = {"d": self.d, "L": list(self.L_list), "gamma": self.gamma.to_dict(), "d_f": self.d_f.to_dict(),
               "per_L": {}}
        for L in self.L_list:
            s = self.sizes[L]
            ks, frac = self.tail_cdf(L)
            out["per_L"][str(L)] = {
                "n_real": int(s.shape[0]),
                "n_discarded": int(self.n_discarded[L]),
                "mean_size": float(s.mean()),
                "mean_max_size": float(s.max(axis=1).mean()),
                "tail_k": [int(k) for k in ks],
                "tail_p": [float(p) for p in frac],
            }
        return out


def _droplet_realization(r: int, lattice: BoxLattice, bc: BoundaryCondition, method: str, seed: int,
                         ferromagnet: bool):
    J = dis.constant(lattice, 1.0) if ferromagnet else dis.sample(lattice, seed, r, dis.STREAM_J)
    solver = FastSolver(lattice, bc, method)
    reps = [_droplet_from(solver, J.values, b) for b in range(lattice.n_edges)]
    deg = any(rep.flex.degenerate for rep in reps)
    rows = [rep.csv_row(seed, lattice, bc.label) + (r,) for rep in reps]
    return np.array([rep.size for rep in reps]), deg, rows


def _size_fit(Ls, values, d, per_volume: bool) -> ExponentFit:
    x = np.asarray(Ls, dtype=np.float64) ** (d if per_volume else 1)
    return loglog_fit(x, values, fit_range=tuple(int(L) for L in Ls))


def droplet_size_scan(d: int, L_list: Sequence[int], bc: BCSpec = "free", n_real: int = 20, seed: int = 0,
                      topology: Optional[str] = None, method: str = "auto", workers: int = 1,
                      ferromagnet: bool = False) -> DropletScan:
    """Critical droplets of every edge; gamma from max_b |boundary| vs |Lambda|, d_f from mean size vs L.

    In ``ferromagnet`` mode every coupling is 1; ties are then expected and
    realizations are kept.
    """
    if len(L_list) < 3:
        raise ValueError("need at least 3 sizes")
    bc = resolve_bc(bc)
    sizes, n_disc, rows = {}, {}, []
    mean_max, mean_size = [], []
    for L in L_list:
        lattice = make_lattice(d, L, bc, topology)
        bc.validate(lattice)
        task = functools.partial(_droplet_realization, lattice=lattice, bc=bc, method=method,
                                 seed=seed, ferromagnet=ferromagnet)
        res = ordered_map(task, range(1 if ferromagnet else n_real), workers)
        kept = [s for s, deg, _ in res if ferromagnet or not deg]
        n_disc[L] = len(res) - len(kept)
        _check_degenerate(n_disc[L], len(res), MAX_DEGENERATE_FRACTION)
        for s, deg, rr in res:
            if ferromagnet or not deg:
                rows.extend(rr)
        arr = np.array(kept)
        sizes[L] = arr
        mean_max.append(arr.max(axis=1).mean())
        mean_size.append(arr.mean())
    gamma = _size_fit(L_list, mean_max, d, per_volume=True)
    d_f = _size_fit(L_list, mean_size, d, per_volume=False)
    return DropletScan(d, tuple(int(L) for L in L_list), sizes, gamma, d_f, n_disc, rows)


# --- flexibility density ----------------------------------------------------------

@dataclass(frozen=True)
class FlexibilityBin:
    delta: float
    count: int
    n: int
    p: float
    se: float
    bound: float
    asserted: bool
    passed: bool
    exact: Optional[float] = None
    exact_passed: Optional[bool] = None


@dataclass(frozen=True, eq=False)
class FlexibilityHistogram:
    d: int
    L: int
    bc: str
    n_samples: int
    bins: list
    flex: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return all(b.passed and b.exact_passed is not False for b in self.bins)


def _flex_realization(r: int, lattice: BoxLattice, bc: BoundaryCondition, method: str, seed: int):
    J = dis.sample(lattice, seed, r, dis.STREAM_J)
    solver = FastSolver(lattice, bc, method)
    out = np.empty(lattice.n_edges)
    deg = False
    for b in range(lattice.n_edges):
        F, _, _, dg = droplet_boundary_size(solver, J.values, b)
        out[b] = F
        deg |= dg
    return out, deg


def flexibility_histogram(d: int, L: int, bc: BCSpec = "free", n_real: int = 100,
                          deltas: Sequence[float] = (0.05, 0.1, 0.2), seed: int = 0,
                          topology: Optional[str] = None, method: str = "auto", workers: int = 1) -> FlexibilityHistogram:
    """Empirical P(F_b <= delta), pooled over edges and realizations.

    For delta < 1 it is checked against delta / sqrt(2 pi) + 3 SE. In one
    dimension C_b = 0, so the exact value erf(delta / (2 sqrt 2)) is also checked.
    """
    bc = resolve_bc(bc)
    lattice = make_lattice(d, L, bc, topology)
    bc.validate(lattice)
    task = functools.partial(_flex_realization, lattice=lattice, bc=bc, method=method, seed=seed)
    res = ordered_map(task, range(n_real), workers)
    kept = [f for f, deg in res if not deg]
    _check_degenerate(n_real - len(kept), n_real, MAX_DEGENERATE_FRACTION)
    flex = np.concatenate(kept)
    n = len(flex)
    bins = []
    for delta in deltas:
        count = int(np.count_nonzero(flex <= delta))
        p = count / n
        se = binomial_se(p, n)
        bound = delta / math.sqrt(2 * math.pi)
        asserted = delta < 1
        passed = (p <= bound + 3 * se) if asserted else True
        exact = exact_ok = None
        if d == 1 and bc.kind == "free":
            exact = float(_special.erf(delta / (2 * math.sqrt(2))))
            # SE from the exact p so a zero count does not give a zero-width test
            exact_ok = abs(p - exact) <= 3 * binomial_se(exact, n)
        bins.append(FlexibilityBin(float(delta), count, n, p, se, bound, asserted, bool(passed), exact, exact_ok))
    return FlexibilityHistogram(d, int(L), bc.label, n, bins, flex)


# --- finite-size collapse ----------------------------------------------------------

@dataclass(frozen=True)
class CollapseFit:
    xi: float
    se: float
    residual: float
    flat: bool
    at_boundary: bool
    message: str
    ell_c: dict

    def to_dict(self) -> dict:
        return {
            "xi": self.xi, "se": self.se, "residual": self.residual, "flat": self.flat,
            "at_boundary": self.at_boundary, "message": self.message,
            "ell_c": {repr(k): v for k, v in self.ell_c.items()},
            "note": "collapse applied to edge overlaps",
        }


XI_BOUNDS = (0.01, 5.0)


def _dispersion(xi: float, Ls: np.ndarray, t: np.ndarray, Q: np.ndarray) -> float:
    """Mean squared mismatch between curves after rescaling t to L t^(1/(2 xi))."""
    logx = np.log(Ls)[:, None] + np.log(t)[None, :] / (2.0 * xi)
    total, count = 0.0, 0
    for i in range(len(Ls)):
        f = _interp.PchipInterpolator(logx[i], Q[i], extrapolate=False)
        for j in range(len(Ls)):
            if i == j:
                continue
            inside = (logx[j] >= logx[i, 0]) & (logx[j] <= logx[i, -1])
            if not inside.any():
                continue
            diff = f(logx[j][inside]) - Q[j][inside]
            total += float(np.sum(diff * diff))
            count += int(inside.sum())
    if count < 2 * len(Ls):
        return math.inf
    return total / count


def _best_xi(Ls, t, Q, bounds=XI_BOUNDS, n_scan: int = 60) -> tuple[float, float, np.ndarray]:
    grid = np.exp(np.linspace(math.log(bounds[0]), math.log(bounds[1]), n_scan))
    vals = np.array([_dispersion(x, Ls, t, Q) for x in grid])
    k = int(np.argmin(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, n_scan - 1)]
    if hi > lo:
        res = _opt.minimize_scalar(lambda x: _dispersion(x, Ls, t, Q), bracket=None, bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-6})
        xi, val = float(res.x), float(res.fun)
        if val > vals[k]:
            xi, val = float(grid[k]), float(vals[k])
    else:
        xi, val = float(grid[k]), float(vals[k])
    return xi, val, vals


def collapse_fit(curves: Sequence[ChaosCurve], n_boot: int = 30, seed: int = 0) -> CollapseFit:
    """xi minimising the dispersion of mean Q plotted against L t^(1/(2 xi)).

    The standard error comes from refitting curves perturbed by their own
    standard errors (a fixed-seed parametric bootstrap).
    """
    if len(curves) < 3:
        raise ValueError("collapse needs at least 3 sizes")
    t0 = curves[0].t_grid
    for c in curves[1:]:
        if not np.array_equal(c.t_grid, t0):
            raise ValueError("curves must share a t grid")
    pos = t0 > 0
    t = t0[pos]
    Ls = np.array([c.L for c in curves], dtype=np.float64)
    if len(set(Ls)) != len(Ls):
        raise ValueError("curves must have distinct sizes")
    Q = np.array([c.mean[pos] for c in curves])
    se = np.array([np.nan_to_num(c.se[pos]) for c in curves])
    xi, val, scan = _best_xi(Ls, t, Q)
    finite = scan[np.isfinite(scan)]
    identical = bool(np.all(np.abs(Q - Q[0]) < 1e-12))
    flat = identical or len(finite) == 0 or float(finite.max() - finite.min()) <= 1e-12 * (1 + float(finite.max()))
    at_boundary = xi <= XI_BOUNDS[0] * 1.05 or xi >= XI_BOUNDS[1] / 1.05
    msgs = []
    if flat:
        msgs.append("flat objective: curves carry no size dependence")
    if at_boundary:
        msgs.append("optimum at search boundary")
    boot = []
    if n_boot > 0 and np.any(se > 0) and not flat:
        rng = np.random.default_rng(seed)
        for _ in range(n_boot):
            Qb = np.clip(Q + rng.standard_normal(Q.shape) * se, -1.0, 1.0)
            boot.append(_best_xi(Ls, t, Qb)[0])
    xi_se = float(np.std(boot, ddof=1)) if len(boot) > 1 else 0.0
    ell = {float(tt): float(tt ** (-1.0 / (2.0 * xi))) for tt in t}
    return CollapseFit(xi, xi_se, val, flat, at_boundary, "; ".join(msgs) or "ok", ell)


# --- exponent relations ---------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    value: float
    se: float = 0.0


@dataclass(frozen=True)
class RelationCheck:
    relation: str
    lhs: float
    rhs: float
    diff: float
    se: float
    verdict: str  # pass | inconclusive | fail


def _as_est(x) -> Estimate:
    if isinstance(x, Estimate):
        return x
    if isinstance(x, ExponentFit):
        return Estimate(x.exponent, 0.0 if math.isnan(x.se) else x.se)
    if isinstance(x, CollapseFit):
        return Estimate(x.xi, x.se)
    if isinstance(x, tuple):
        return Estimate(float(x[0]), float(x[1]))
    return Estimate(float(x), 0.0)


def _inequality(name, lhs, rhs, se, strict: bool) -> RelationCheck:
    diff = lhs - rhs
    lo, hi = diff - 2 * se, diff + 2 * se
    if (lo > 0) or (not strict and lo >= 0):
        v = "pass"
    elif (hi < 0) or (strict and hi <= 0):
        v = "fail"
    else:
        v = "inconclusive"
    return RelationCheck(name, lhs, rhs, diff, se, v)


def _equality(name, lhs, rhs, se) -> RelationCheck:
    diff = lhs - rhs
    if abs(diff) > 2 * se:
        v = "fail"
    elif 2 * se <= 0.5 * max(abs(lhs), abs(rhs), 1e-12) or se == 0:
        v = "pass"
    else:
        # interval contains the identity but is too wide to discriminate
        v = "inconclusive"
    return RelationCheck(name, lhs, rhs, diff, se, v)


@dataclass(frozen=True)
class RelationReport:
    d: int
    checks: list
    incongruence_excluded: Optional[bool]

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "checks": [c.__dict__ for c in self.checks],
            "d_f_below_(d-2theta)/2": self.incongruence_excluded,
        }


def relation_report(alpha, gamma, xi, theta, d_f, d: int) -> RelationReport:
    """Evaluate alpha > 2 gamma, alpha = 2 xi / d, alpha = 2 d_f / d and alpha >= 1/d.

    Each input is a value, a (value, SE) tuple, an ``Estimate`` or a fit.
    Verdicts use 2-SE intervals and never raise.
    """
    a, g, x, th, df = (_as_est(v) for v in (alpha, gamma, xi, theta, d_f))
    checks = [
        _inequality("alpha > 2 gamma", a.value, 2 * g.value, math.hypot(a.se, 2 * g.se), strict=True),
        _equality("alpha = 2 xi / d", a.value, 2 * x.value / d, math.hypot(a.se, 2 * x.se / d)),
        _equality("alpha = 2 d_f / d", a.value, 2 * df.value / d, math.hypot(a.se, 2 * df.se / d)),
        _inequality("alpha >= 1/d", a.value, 1.0 / d, a.se, strict=False),
    ]
    # a droplet boundary dimension below (d - 2 theta)/2 rules out incongruent pairs
    bound = (d - 2 * th.value) / 2
    se_b = math.hypot(df.se, th.se)
    if df.value + 2 * se_b < bound:
        excl = True
    elif df.value - 2 * se_b >= bound:
        excl = False
    else:
        excl = None
    return RelationReport(d, checks, excl)


# --- zero-chaos window ---------------------------------------------------------------

def safe_time(lattice: BoxLattice, bc: BoundaryCondition, J: dis.CouplingField, Jp: dis.CouplingField,
              method: str = "auto") -> float:
    """(min_b F_b(0) / (6 max(|J|,|J'|) max_b |boundary_b(0)|))^2, capped at 1."""
    solver = FastSolver(lattice, bc, method)
    Fs, sizes = [], []
    for b in range(lattice.n_edges):
        F, sz, _, _ = droplet_boundary_size(solver, J.values, b)
        Fs.append(F)
        sizes.append(sz)
    scale = float(np.max(np.maximum(np.abs(J.values), np.abs(Jp.values))))
    return min(1.0, (min(Fs) / (6.0 * scale * max(sizes))) ** 2)


__all__ = [
    "ChaosCurve",
    "ExponentFit",
    "Threshold",
    "DropletScan",
    "FlexibilityHistogram",
    "CollapseFit",
    "RelationReport",
    "Estimate",
    "default_t_grid",
    "chaos_curve",
    "adc_threshold",
    "fit_alpha",
    "droplet_size_scan",
    "flexibility_histogram",
    "collapse_fit",
    "relation_report",
    "safe_time",
]
