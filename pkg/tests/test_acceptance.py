"""Acceptance criteria 1-13, each at its stated size and tolerance.

Every test records one PASS/FAIL line (shown in the terminal summary) and then
asserts the same outcome. Run alone with ``pytest tests/test_acceptance.py -v``
or ``python tests/test_acceptance.py``.
"""

import itertools
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, window_minimum
from ealab import chaos as ch
from ealab import disorder as dis
from ealab import excitation as ex
from ealab import groundstate as gs
from ealab import variance as va
from ealab.config import ExperimentConfig
from ealab.experiments import run
from ealab.lattice import build

SEED = 20240101


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def result_bytes(out: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(Path(out).iterdir())
            if p.suffix in (".csv", ".json") and p.name != "manifest.json"}


# runner configurations shared by criteria 6, 10, 12 and 13
RUN_CONFIGS = {
    "selftest": dict(kind="selftest"),
    "gs": dict(kind="gs", d=2, L=(3, 4), n_real=200),
    "variance_FF": dict(kind="variance", d=2, L=(4, 5), ensemble="FF", t=0.5, n_real=2000),
    "variance_PA": dict(kind="variance", d=2, L=(4, 5), ensemble="PA", bc="periodic", t=0.5, n_real=2000),
    "droplet_1d": dict(kind="droplet", d=1, L=(8, 16, 32), n_real=20),
    "stiffness": dict(kind="stiffness", d=2, L=(4, 6, 8, 10), bc="periodic", n_real=1000),
    "chaos": dict(kind="chaos", d=2, L=(4, 6, 8), n_real=500, n_real_droplet=200, eps=0.05),
}


class Runs:
    """Runs each acceptance configuration once at one worker, on demand."""

    def __init__(self, root: Path):
        self.root = root
        self.done = {}

    def config(self, name: str, workers: int = 1, **extra) -> ExperimentConfig:
        kw = dict(RUN_CONFIGS[name], **extra)
        if name == "chaos":
            kw.update(self._theta())
        return ExperimentConfig(seed=SEED, out=str(self.root / f"{name}_w{workers}"), workers=workers, **kw)

    def _theta(self) -> dict:
        summary = json.loads((Path(self.get("stiffness")[0].out) / "stiffness_summary.json").read_text())
        fit = summary["two_theta"]
        se = fit["se"] if isinstance(fit["se"], float) else 0.0
        return {"theta2": fit["exponent"], "theta2_se": se}

    def get(self, name: str):
        if name not in self.done:
            cfg = self.config(name)
            start = time.perf_counter()
            m = run(cfg)
            self.done[name] = (cfg, m, time.perf_counter() - start)
        return self.done[name]


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    return Runs(tmp_path_factory.mktemp("acceptance"))


@pytest.fixture(scope="module")
def solver_instances():
    """Criterion 1 instances with both solvers' results."""
    out = []
    start = time.perf_counter()
    for shape in ((3, 3), (4, 4), (4, 5)):
        lat = build(2, shape)
        for r in range(200):
            J = dis.sample(lat, SEED, r)
            out.append((lat, J, gs.solve(lat, J, method="enumeration"), gs.solve(lat, J, method="column_dp")))
    return out, time.perf_counter() - start


# --- 1 --------------------------------------------------------------------------------

def test_criterion_01_solver_exactness(solver_instances):
    inst, elapsed = solver_instances
    worst_e, bad_cfg = 0.0, 0
    for lat, J, a, b in inst:
        worst_e = max(worst_e, abs(a.energy - b.energy))
        bad_cfg += not (np.array_equal(a.config, b.config) or np.array_equal(a.config, -b.config))
    ok = worst_e <= 1e-12 and bad_cfg == 0 and elapsed < 60
    verdict(1, ok, f"{len(inst)} instances, max |dE| = {worst_e:.1e}, config mismatches = {bad_cfg}, "
                   f"{elapsed:.1f} s")


# --- 2 --------------------------------------------------------------------------------

def test_criterion_02_ground_state_criterion(solver_instances):
    inst, _ = solver_instances
    fails = 0
    for lat, J, a, b in inst:
        for res in (a, b):
            fails += not gs.check_gs_criterion(lat, J, res.config, gs.FREE, k=4).passed
    verdict(2, fails == 0, f"connected subsets up to size 4 on {len(inst)} instances x 2 solvers, "
                           f"{fails} failures")


# --- 3 --------------------------------------------------------------------------------

def test_criterion_03_flexibility_identity():
    lat = build(2, 4)
    worst = 0.0
    for r in range(100):
        J = dis.sample(lat, SEED, r)
        for b in range(lat.n_edges):
            f = ex.flexibility(lat, J, b=b)
            worst = max(worst, abs(f.F - 2 * abs(J.values[b] - f.C)))
    gen = dis.rng(SEED, 0, 99)
    drift = 0.0
    for r in range(10):
        J = dis.sample(lat, SEED, 1000 + r)
        for b in range(lat.n_edges):
            c0 = ex.flexibility(lat, J, b=b).C
            for x in gen.standard_normal(50):
                drift = max(drift, abs(ex.flexibility(lat, J.with_edge(b, float(x)), b=b).C - c0))
    ok = worst <= 1e-10 and drift <= 1e-10
    verdict(3, ok, f"max |F - 2|J-C|| = {worst:.1e} over 100 x {lat.n_edges} edges; "
                   f"max C_b change over 50 resamplings = {drift:.1e}")


# --- 4 --------------------------------------------------------------------------------

def _windows(lat):
    singles = [(e,) for e in range(lat.n_edges)]
    pairs = []
    for w in itertools.combinations(range(lat.n_edges), 2):
        try:
            ex._validate_window(lat, w)
        except ValueError:
            continue
        pairs.append(w)
    return singles + pairs


@pytest.mark.slow
def test_criterion_04_window_energy_laws():
    lat = build(2, 5)
    windows = _windows(lat)
    law_err, bound_excess, direct_err, tie_err = 0.0, -math.inf, 0.0, 0.0
    n_vectors = n_lines = 0
    gen = dis.rng(SEED, 0, 98)
    for r in range(100):
        J = dis.sample(lat, SEED, r)
        direct_pick = set(gen.choice(len(windows), 5, replace=False).tolist())
        pairs_only = [k for k, w in enumerate(windows) if len(w) == 2]
        line_pick = int(gen.choice(pairs_only))
        for k, w in enumerate(windows):
            E = ex.window_energy_vector(lat, J, gs.FREE, w, method="column_dp")
            n_vectors += 1
            cfgs = E.configs
            for a, b, c in itertools.product(cfgs, repeat=3):
                law_err = max(law_err, abs(E.E(a, c) - E.E(a, b) - E.E(b, c)))
            for a, b in itertools.product(cfgs, repeat=2):
                law_err = max(law_err, abs(E.E(a, b) + E.E(b, a)))
                bound_excess = max(bound_excess, abs(E.E(a, b)) - E.bound)
            if k in direct_pick:
                # second route: window couplings set to zero, minima by pinned solves
                vals = J.values.copy()
                vals[list(w)] = 0.0
                J0 = J.with_values(vals)
                m0 = {eta: window_minimum(lat, J0, gs.FREE, w, eta, "enumeration") for eta in cfgs}
                for a, b in itertools.product(cfgs, repeat=2):
                    direct_err = max(direct_err, abs(E.E(a, b) - (m0[a] - m0[b])))
            if k == line_pick:
                Jw = J.values[list(w)]
                for eta, etap in itertools.combinations(cfgs, 2):
                    v, offset = E.critical_values(eta, etap)
                    vals = J.values.copy()
                    vals[list(w)] = Jw + (offset - v @ Jw) / (v @ v) * v
                    Jx = J.with_values(vals)
                    tie = window_minimum(lat, Jx, gs.FREE, w, eta) - window_minimum(lat, Jx, gs.FREE, w, etap)
                    tie_err = max(tie_err, abs(tie))
                    n_lines += 1
    ok = law_err <= 1e-9 and bound_excess <= 1e-9 and direct_err <= 1e-9 and tie_err <= 1e-10
    verdict(4, ok, f"{n_vectors} E-vectors ({len(windows)} windows x 100): linearity/antisymmetry "
                   f"{law_err:.1e}, bound excess {bound_excess:.1e}, direct route {direct_err:.1e}; "
                   f"{n_lines} critical lines, max tie gap {tie_err:.1e}")


# --- 5 --------------------------------------------------------------------------------

def test_criterion_05_gaussian_identity():
    start = time.perf_counter()
    res = [va.gaussian_identity_selftest(h, n=4, n_samples=100_000, seed=SEED) for h in ("linear", "square", "product")]
    elapsed = time.perf_counter() - start
    ok = all(x.passed for x in res) and [x.exact for x in res] == [1.0, 2.0, 1.0] and elapsed < 30
    detail = ", ".join(f"{x.h} {x.estimate:.4f} (exact {x.exact:g}, se {x.se:.4f})" for x in res)
    verdict(5, ok, f"{detail}; {elapsed:.1f} s")


# --- 6 --------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_06_variance_bound(runs):
    parts, ok, elapsed = [], True, 0.0
    for name in ("variance_FF", "variance_PA"):
        cfg, m, dt = runs.get(name)
        elapsed += dt
        reports = json.loads((Path(cfg.out) / "variance_summary.json").read_text())["reports"]
        for rep in reports:
            lhs, rhs = rep["lhs"], rep["rhs"]
            good = lhs["value"] + 2 * lhs["se"] >= rhs["value"] - 2 * rhs["se"]
            ok &= good and rep["n_real"] + rep["n_discarded"] == 2000
            parts.append(f"{rep['ensemble']} L={rep['L']}: LHS {lhs['value']:.3f}+-{lhs['se']:.3f} "
                         f"RHS {rhs['value']:.3f}+-{rhs['se']:.3f} ({rep['verdict']})")
        ok &= m.ok
    ok &= elapsed < 600
    verdict(6, ok, "; ".join(parts) + f"; {elapsed:.0f} s")


# --- 7 --------------------------------------------------------------------------------

def test_criterion_07_stability_and_drift():
    lat = build(2, 4)
    grid = np.linspace(0.0, 1.0, 1001)
    gen = dis.rng(SEED, 0, 97)
    n_viol, n_drift_fail, n_checks = 0, 0, 0
    for r in range(100):
        J, Jp = dis.sample(lat, SEED, r), dis.sample(lat, SEED, r, dis.STREAM_JPRIME)
        b = int(gen.integers(0, lat.n_edges))
        rep = ex.stability_scan(lat, J, Jp, b=b, t_grid=grid)
        n_viol += len(rep.violations)
        for t in (1e-3, 1e-2, 0.1, 0.5, 1.0):
            n_drift_fail += not ex.drift_check(lat, J, Jp, b=b, t=t).ok
            n_checks += 1
    verdict(7, n_viol == 0 and n_drift_fail == 0,
            f"100 paths, dt = 1e-3: {n_viol} stability violations, {n_drift_fail}/{n_checks} drift failures")


# --- 8 --------------------------------------------------------------------------------

def test_criterion_08_crossing_counts():
    lat = build(2, 4)
    windows = [w for w in _windows(lat) if len(w) == 2]
    gen = dis.rng(SEED, 0, 96)
    max2, max1 = 0, 0
    for r in range(1000):
        J, Jp = dis.sample(lat, SEED, r), dis.sample(lat, SEED, r, dis.STREAM_JPRIME)
        w = windows[int(gen.integers(0, len(windows)))]
        E = ex.window_energy_vector(lat, J, window=w)
        max2 = max(max2, len(ex.crossing_times(E, dis.InterpolationPath(J, Jp, edges=list(w)))))
        b = int(gen.integers(0, lat.n_edges))
        E1 = ex.window_energy_vector(lat, J, window=[b])
        max1 = max(max1, len(ex.crossing_times(E1, dis.InterpolationPath(J, Jp, edges=[b]))))
    verdict(8, max2 <= 16 and max1 <= 2,
            f"1000 two-edge paths: max {max2} crossings (bound 16); 1000 single-edge paths: max {max1} (bound 2)")


# --- 9 --------------------------------------------------------------------------------

def test_criterion_09_flexibility_density():
    h2 = ch.flexibility_histogram(2, 4, n_real=417, deltas=(0.05, 0.1, 0.2), seed=SEED)
    h1 = ch.flexibility_histogram(1, 33, n_real=313, deltas=(0.05, 0.1, 0.2), seed=SEED)
    ok = h2.n_samples >= 10_000 and h1.n_samples >= 10_000 and h2.passed and h1.passed
    ok &= all(b.exact_passed for b in h1.bins)
    d2 = ", ".join(f"P(F<={b.delta:g}) = {b.p:.4f} vs {b.bound:.4f}+3se" for b in h2.bins)
    d1 = ", ".join(f"{b.p:.4f} vs erf {b.exact:.4f}" for b in h1.bins)
    verdict(9, ok, f"2D L=4 ({h2.n_samples} samples): {d2}; 1D ({h1.n_samples} samples): {d1}")


# --- 10 -------------------------------------------------------------------------------

def test_criterion_10_one_dimensional_droplets(runs):
    scan = ch.droplet_size_scan(1, [8, 16, 32], n_real=20, seed=SEED)
    ok = all(np.all(scan.sizes[L] == 1) for L in (8, 16, 32)) and scan.gamma.exponent == 0.0
    cfg, m, _ = runs.get("droplet_1d")
    summary = json.loads((Path(cfg.out) / "droplet_summary.json").read_text())
    ok &= summary["gamma"]["exponent"] == 0.0 and m.ok
    ok &= all(v["tail_k"] == [1] for v in summary["per_L"].values())
    verdict(10, ok, f"|boundary| = 1 on every edge of L = 8, 16, 32; gamma = {scan.gamma.exponent!r}")


# --- 11 -------------------------------------------------------------------------------

def test_criterion_11_triangle_inequality():
    lattices = [build(2, L) for L in (3, 4, 5, 6, 8)] + [build(2, (4, 5))]
    lattices += [build(2, L, "periodic") for L in (4, 5, 6, 8, 10)] + [build(1, L) for L in (8, 16, 32, 33)]
    results = [va.triangle_check(lat, 10_000, SEED) for lat in lattices]
    worst = min(w for _, w in results)
    verdict(11, all(ok for ok, _ in results),
            f"{len(lattices)} lattice sizes x 10^4 triples, smallest slack {worst:.3e}")


# --- 13 (before 12, which reruns these) -----------------------------------------------

@pytest.mark.slow
def test_criterion_13_reported_estimates(runs):
    s_cfg, s_m, s_dt = runs.get("stiffness")
    c_cfg, c_m, c_dt = runs.get("chaos")
    st = json.loads((Path(s_cfg.out) / "stiffness_summary.json").read_text())
    cs = json.loads((Path(c_cfg.out) / "chaos_summary.json").read_text())
    names = {c["relation"] for c in cs["relations"]["checks"]}
    want = {"alpha > 2 gamma", "alpha = 2 xi / d", "alpha = 2 d_f / d", "alpha >= 1/d"}
    present = all(k in cs for k in ("alpha", "gamma", "collapse", "relations")) and "two_theta" in st
    elapsed = s_dt + c_dt
    ok = present and names == want and elapsed < 1800 and s_m.ok and c_m.ok

    def fmt(fit):
        return f"{fit['exponent']:.3f}+-{fit['se']:.3f}" if isinstance(fit["se"], float) else str(fit["exponent"])

    rel = ", ".join(f"{c['relation']}: {c['verdict']}" for c in cs["relations"]["checks"])
    verdict(13, ok, f"alpha {fmt(cs['alpha'])}, gamma {fmt(cs['gamma'])}, 2theta {fmt(st['two_theta'])}, "
                    f"xi {cs['collapse']['xi']:.3f}+-{cs['collapse']['se']:.3f}; {rel}; {elapsed:.0f} s")


# --- 12 -------------------------------------------------------------------------------

@pytest.mark.slow
def test_criterion_12_determinism(runs):
    mismatched = []
    for name in RUN_CONFIGS:
        cfg1, _, _ = runs.get(name)
        cfg8 = runs.config(name, workers=8)
        run(cfg8)
        if cfg8.config_hash() != cfg1.config_hash() or result_bytes(cfg1.out) != result_bytes(cfg8.out):
            mismatched.append(name)
    verdict(12, not mismatched,
            f"{len(RUN_CONFIGS)} acceptance runs repeated at 8 workers; byte mismatches: {mismatched or 'none'}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-v"]))
