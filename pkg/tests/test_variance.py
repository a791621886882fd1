import dataclasses
import json
import math

import numpy as np
import pytest

from ealab import disorder as dis
from ealab import groundstate as gs
from ealab import variance as var
from ealab.excitation import solve_crossing
from ealab.lattice import build


@pytest.mark.parametrize("h", ["linear", "square", "product", "cubic"])
def test_gaussian_identity_small(h):
    res = var.gaussian_identity_selftest(h, n=2, n_samples=20_000, seed=1)
    assert res.passed, res
    assert res.exact == {"linear": 1.0, "square": 2.0, "product": 1.0, "cubic": 15.0}[h]


def test_gaussian_identity_errors():
    with pytest.raises(ValueError):
        var.gaussian_identity_selftest("sine")
    with pytest.raises(ValueError):
        var.gaussian_identity_selftest("product", n=1)


def test_truncated_grid_widens_budget():
    # truncating at s = 0.5 drops e^-0.5 of the integral; the tail term must cover it
    res = var.gaussian_identity_selftest("linear", n=2, n_samples=5_000, s_grid=np.linspace(0, 0.5, 50))
    assert res.estimate == pytest.approx(1 - math.exp(-0.5), abs=1e-5)
    assert res.tail >= res.exact - res.estimate


def test_identical_ensemble_is_trivial():
    ens = var.ReplicaEnsemble("identical", 2)
    rep = var.variance_report(ens, 3, t=0.5, n_real=40, seed=2)
    assert all(r.dH == 0.0 and r.q12 == 0.0 for r in rep.records)
    assert rep.lhs.value == 0.0
    assert rep.rhs.value <= 0.0
    assert rep.verdict == "bound holds trivially" and rep.consistent


def test_pa_bookkeeping_identity():
    ens = var.ReplicaEnsemble("PA", 2)
    recs, _ = var.replica_records(ens, 4, 30, seed=3)
    for r in recs:
        # H(sigma1) = E_P(sigma1) and H(sigma2) = E_AP(sigma2) - bookkeeping
        assert r.dH == pytest.approx(r.E1 - r.E2 + r.bookkeeping, abs=1e-10)


def test_wrap_bookkeeping_definition():
    lat = build(2, 3, "periodic")
    J = dis.sample(lat, 1)
    sigma = 1 - 2 * np.random.default_rng(0).integers(0, 2, lat.n_vertices)
    ap = gs.energy(lat, J, sigma, gs.BoundaryCondition.antiperiodic(0))
    assert gs.interior_energy(lat, J, sigma) == pytest.approx(ap - var.wrap_bookkeeping(lat, J, sigma), abs=1e-12)


def test_ring_stiffness_closed_form():
    n_real = 400
    X, n_disc = var.stiffness_samples(1, 7, n_real, seed=5)
    assert n_disc == 0
    lat = build(1, 7, "periodic")
    mins = np.array([np.min(np.abs(dis.sample(lat, 5, r).values)) for r in range(n_real)])
    assert np.allclose(np.abs(X), 2 * mins, atol=1e-12)
    # Var(X) against an independent Monte Carlo of (2 min |J|)^2, X being symmetric
    ref = (2 * np.min(np.abs(np.random.default_rng(11).standard_normal((200_000, 7))), axis=1)) ** 2
    v = float(np.mean(X**2))
    se = math.hypot(np.std(X**2, ddof=1) / math.sqrt(n_real), ref.std(ddof=1) / math.sqrt(len(ref)))
    assert abs(v - ref.mean()) <= 3 * se


def test_ferromagnet_stiffness():
    scan = var.stiffness_scan(2, [3, 4, 5], ferromagnet=True, n_real=3)
    # the antiperiodic ground state pays for one flipped column of L bonds
    assert scan.mean.tolist() == [-6.0, -8.0, -10.0]
    assert np.all(scan.var == 0.0)
    assert math.isnan(scan.theta2.exponent)


def test_stiffness_scan_reports():
    scan = var.stiffness_scan(2, [3, 4, 5], n_real=60, seed=1)
    d = scan.to_dict()
    assert d["L"] == [3, 4, 5] and all(v > 0 for v in d["var"])
    assert np.allclose(scan.ratio, scan.var / np.array([3, 4, 5]))
    with pytest.raises(ValueError):
        var.stiffness_scan(2, [3, 4], n_real=5)


@pytest.mark.parametrize("lat", [build(2, 3), build(2, 5, "periodic"), build(1, 9)])
def test_triangle_inequality(lat):
    ok, worst = var.triangle_check(lat, 2000, seed=2)
    assert ok and worst >= -1e-12


def test_rhs_closed_form_without_chaos():
    ens = var.ReplicaEnsemble("FF", 2)
    t = 0.5
    recs, _ = var.replica_records(ens, 3, 40, seed=4)
    s = np.linspace(0.0, t, 2001)
    quiet = [dataclasses.replace(r, d1=np.zeros(len(s)), d2=np.zeros(len(s))) for r in recs]
    n_edges = ens.lattice(3).n_edges
    rhs = var.rhs_from_records(quiet, s, n_edges)
    expected = 2 * n_edges * np.mean([r.q12 for r in recs]) * (1 - math.exp(-t))
    assert rhs.value == pytest.approx(expected, rel=1e-6)


def test_rhs_bound_validation():
    ens = var.ReplicaEnsemble("FF", 2)
    with pytest.raises(ValueError):
        var.rhs_bound(ens, 3, t=0.0)
    with pytest.raises(ValueError):
        var.rhs_bound(ens, 3, t=0.5, s_grid=[0.0, 0.7])
    with pytest.raises(ValueError):
        var.ReplicaEnsemble("XY")


def test_rhs_grid():
    s = var.rhs_s_grid(0.5)
    assert s[0] == 0.0 and s[-1] == pytest.approx(0.5) and len(s) == 21


@pytest.mark.parametrize("kind", ["FF", "PA"])
def test_variance_report_small(kind):
    ens = var.ReplicaEnsemble(kind, 2)
    rep = var.variance_report(ens, 3, t=0.5, n_real=60, seed=6)
    assert rep.lhs.value > 0 and rep.lhs.se > 0
    assert rep.consistent and rep.cross_nonnegative
    d = json.loads(rep.to_json())
    assert d["verdict"] in ("bound holds trivially", "bound holds", "inconclusive")
    assert len(rep.csv_rows()) == rep.n_real


def test_variance_report_worker_invariance():
    ens = var.ReplicaEnsemble("FF", 2)
    a = var.variance_report(ens, 3, n_real=20, seed=8, workers=1)
    b = var.variance_report(ens, 3, n_real=20, seed=8, workers=2)
    assert a.to_json() == b.to_json() and a.csv_rows() == b.csv_rows()


def test_single_edge_chain_closed_form():
    ens = var.ReplicaEnsemble("identical", 1, identical_bc="free")
    lat = ens.lattice(8)
    b = 3
    rep = var.single_edge_bound(ens, 8, b, n_real=50, seed=3, t=0.5)
    assert rep.window_violations == 0
    for r in range(50):
        J = dis.sample(lat, 3, r).values[b]
        Jp = dis.sample(lat, 3, r, dis.STREAM_JPRIME).values[b]
        # C_b = 0 in one dimension: sigma_b flips when J_b(t) changes sign
        roots = solve_crossing(J, Jp, 0.0, 1.0)
        first = roots[0] if roots else math.inf
        assert rep.exit_times[r, 0] == pytest.approx(first) and rep.exit_times[r, 1] == pytest.approx(first)


def test_single_edge_identical_and_two_dimensions():
    rep = var.single_edge_bound(var.ReplicaEnsemble("identical", 2), 3, 2, n_real=30, seed=1)
    assert rep.rhs.value <= 0
    rep = var.single_edge_bound(var.ReplicaEnsemble("FF", 2), 3, 5, n_real=40, seed=1)
    assert rep.window_violations == 0 and np.all(rep.window_lower > 0)
    with pytest.raises(ValueError):
        var.single_edge_bound(var.ReplicaEnsemble("FF", 2), 3, 99, n_real=2)
