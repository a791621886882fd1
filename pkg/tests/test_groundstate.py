import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ealab import disorder as dis
from ealab import groundstate as gs
from ealab.lattice import build, edge_values


def four_cycle():
    lat = build(2, 2)
    # edges in canonical order: (0,2), (0,1), (1,3), (2,3); 0.5 sits on (0,1)
    return lat, dis.CouplingField(lat, np.array([1.0, 0.5, 2.0, -1.5]))


def test_energy_examples():
    lat = build(2, 3)
    J = dis.constant(lat)
    s = np.ones(9, dtype=np.int8)
    assert gs.energy(lat, J, s) == -12
    s[0] = -1
    assert gs.energy(lat, J, s) == -8
    chain = build(1, 4)
    Jc = dis.CouplingField(chain, np.array([1.0, -0.5, 2.0]))
    assert gs.energy(chain, Jc, np.array([1, 1, -1, -1])) == -3.5


def test_energy_mismatched_lattice():
    with pytest.raises(ValueError):
        gs.energy(build(2, 3), dis.constant(build(2, 4)), np.ones(9))


def test_four_cycle_ground_state(brute):
    lat, J = four_cycle()
    res = gs.solve(lat, J)
    assert res.energy == -4.0
    ev = edge_values(lat, res.config)
    assert ev[1] == -1 and np.all(ev[[0, 2, 3]] == np.sign(J.values[[0, 2, 3]]))
    assert brute(lat, J)[0] == -4.0


def test_four_cycle_constrained():
    lat, J = four_cycle()
    assert gs.constrained_solve(lat, J, edge=1, sign=1).energy == -3.0
    assert gs.constrained_solve(lat, J, edge=1, sign=-1).energy == -4.0


@pytest.mark.parametrize("lat", [build(2, 3), build(2, 4, "periodic"), build(1, 6), build(3, 2)])
def test_ferromagnet(lat):
    res = gs.solve(lat, dis.constant(lat))
    assert np.all(res.config == 1) and res.energy == -lat.n_edges
    for b in (0, lat.n_edges - 1):
        assert gs.constrained_solve(lat, dis.constant(lat), edge=b, sign=1).energy == res.energy


CASES = [
    (build(2, 3), gs.FREE),
    (build(2, 4), gs.FREE),
    (build(2, (3, 4), "op"), gs.BoundaryCondition.periodic()),
    (build(2, (4, 3), "po"), gs.BoundaryCondition.periodic()),
    (build(2, 3, "periodic"), gs.BoundaryCondition.periodic()),
    (build(2, 3, "periodic"), gs.BoundaryCondition.antiperiodic(0)),
    (build(2, 3, "periodic"), gs.BoundaryCondition.antiperiodic(1)),
    (build(1, 8, "periodic"), gs.BoundaryCondition.antiperiodic(0)),
    (build(3, 2), gs.FREE),
]


@pytest.mark.parametrize("lat,bc", CASES)
def test_solvers_match_brute_force(brute, lat, bc):
    for r in range(4):
        J = dis.sample(lat, 3, r)
        best, _, levels = brute(lat, J, bc)
        for method in ("enumeration", "column_dp"):
            if method == "column_dp" and lat.d > 2:
                continue
            res = gs.solve(lat, J, bc, method)
            assert res.energy == pytest.approx(best, abs=1e-12)
            # second level above the pair {sigma, -sigma}
            assert res.gap == pytest.approx(levels[2] - levels[0], abs=1e-9)
            assert res.config[0] == 1


def test_fixed_bc_matches_brute_force(brute):
    lat = build(2, 3)
    gen = np.random.default_rng(4)
    for r in range(4):
        J = dis.sample(lat, 1, r)
        xi = 1 - 2 * gen.integers(0, 2, lat.n_boundary_slots)
        bc = gs.BoundaryCondition.fixed(xi, gen.standard_normal(lat.n_boundary_slots))
        best, arg, levels = brute(lat, J, bc)
        for method in ("enumeration", "column_dp"):
            res = gs.solve(lat, J, bc, method)
            assert res.energy == pytest.approx(best, abs=1e-12)
            assert np.array_equal(res.config, arg)
            assert res.gap == pytest.approx(levels[1] - levels[0], abs=1e-9)


def test_constrained_matches_brute_force(brute):
    lat = build(2, 3, "periodic")
    bc = gs.BoundaryCondition.periodic()
    J = dis.sample(lat, 9)
    for b in (0, 5, 17):
        for s in (1, -1):
            best = brute(lat, J, bc, edge=b, sign=s)[0]
            for method in ("enumeration", "column_dp"):
                r = gs.constrained_solve(lat, J, bc, edge=b, sign=s, method=method)
                assert r.energy == pytest.approx(best, abs=1e-12)
                assert r.config[lat.edges[b, 0]] * r.config[lat.edges[b, 1]] == s
    pins = {0: -1, 4: 1}
    best = brute(lat, J, bc, pins=pins)[0]
    for method in ("enumeration", "column_dp"):
        assert gs.constrained_solve(lat, J, bc, pins=pins, method=method).energy == pytest.approx(best, abs=1e-12)


def test_solver_limits():
    with pytest.raises(gs.SolverError):
        gs.solve(build(2, 6), dis.sample(build(2, 6), 0), method="enumeration")
    with pytest.raises(gs.SolverError):
        gs.solve(build(3, 3), dis.sample(build(3, 3), 0), method="column_dp")
    with pytest.raises(gs.SolverError):
        gs.solve(build(2, (3, 13)), dis.sample(build(2, (3, 13)), 0), method="column_dp")


def test_bc_validation():
    with pytest.raises(ValueError):
        gs.solve(build(2, 3), dis.sample(build(2, 3), 0), gs.BoundaryCondition.antiperiodic(0))
    with pytest.raises(ValueError):
        gs.solve(build(2, 3), dis.sample(build(2, 3), 0), gs.BoundaryCondition.fixed([1, 1], [1.0, 1.0]))


def test_result_json():
    lat = build(2, 3)
    res = gs.solve(lat, dis.sample(lat, 2))
    d = json.loads(res.to_json(lat, seed=2))
    assert set(d) >= {"d", "L", "topology", "bc", "seed", "energy", "config", "degenerate", "gap"}
    assert len(d["config"]) == 9 and d["config"][0] == "0"


def test_criterion_examples():
    lat = build(2, 4)
    for r in range(100):
        J = dis.sample(lat, 21, r)
        res = gs.solve(lat, J)
        assert gs.check_gs_criterion(lat, J, res.config, k=4).passed
    J = dis.sample(lat, 21, 0)
    s = gs.solve(lat, J).config.copy()
    s[5] *= -1
    rep = gs.check_gs_criterion(lat, J, s, k=4)
    assert not rep.passed and rep.worst_subset.vertices() == [5]
    ferro = gs.check_gs_criterion(lat, dis.constant(lat), np.ones(16), k=3)
    assert ferro.passed and ferro.worst_value > 0
    with pytest.raises(ValueError):
        gs.check_gs_criterion(lat, J, s, k=7)


def test_criterion_ferromagnet_value_is_boundary_size():
    lat = build(2, 3)
    rep = gs.check_gs_criterion(lat, dis.constant(lat), np.ones(9), k=1)
    # a corner spin has the smallest boundary, 2 edges
    assert rep.worst_value == 2.0


def test_edge_overlap_examples():
    lat = build(2, 4)
    s = gs.solve(lat, dis.sample(lat, 0)).config
    assert gs.edge_overlap(lat, s, s) == 1.0
    assert gs.edge_overlap(lat, s, -s) == 1.0
    t = s.copy()
    t[5] *= -1  # interior vertex (1, 1)
    assert gs.edge_overlap(lat, s, t) == pytest.approx(1 - 2 * 4 / lat.n_edges, abs=1e-15)
    with pytest.raises(ValueError):
        gs.edge_overlap(lat, s, s[:-1])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(0, 15))
def test_gauge_covariance(seed, v):
    lat = build(2, 4)
    J = dis.sample(lat, seed)
    s = 1 - 2 * np.random.default_rng(seed).integers(0, 2, 16)
    vals = J.values.copy()
    for _, e in lat.incidence[v]:
        vals[e] *= -1
    t = s.copy()
    t[v] *= -1
    assert gs.energy(lat, J.with_values(vals), t) == pytest.approx(gs.energy(lat, J, s), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_summation_order(seed):
    lat = build(3, 3, "periodic")
    J = dis.sample(lat, seed)
    s = 1 - 2 * np.random.default_rng(seed).integers(0, 2, lat.n_vertices)
    perm = np.random.default_rng(seed + 1).permutation(lat.n_edges)
    terms = -J.values * edge_values(lat, s)
    assert abs(sum(terms[perm]) - gs.energy(lat, J, s)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from([(2, 3, "open"), (2, 4, "periodic"), (1, 10, "periodic")]))
def test_solver_output_passes_criterion(seed, case):
    d, L, topo = case
    lat = build(d, L, topo)
    bc = gs.BoundaryCondition.periodic() if topo == "periodic" else gs.FREE
    J = dis.sample(lat, seed)
    res = gs.solve(lat, J, bc)
    assert gs.check_gs_criterion(lat, J, res.config, bc, k=4).passed
