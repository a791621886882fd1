"""Experiment dispatch, result files and the run manifest.

Result files are a pure function of the configuration: floats are written
with ``repr``, JSON keys are sorted, and realizations are ordered by index.
Only ``manifest.json`` carries wall-clock timestamps.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from . import chaos as ch
from . import disorder as dis
from . import excitation as ex
from . import groundstate as gs
from . import variance as va
from .config import ConfigError, ExperimentConfig
from .lattice import build

SCHEMA_VERSION = 1
log = logging.getLogger("ealab")


@dataclass
class RunManifest:
    config_hash: str
    version: str
    kind: str
    out_dir: str
    started: str = ""
    finished: str = ""
    discarded: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config_hash": self.config_hash,
            "artifact_version": self.version,
            "kind": self.kind,
            "started": self.started,
            "finished": self.finished,
            "discarded_degenerate": self.discarded,
            "files": self.files,
            "violations": self.violations,
        }

    @classmethod
    def load(cls, out_dir) -> "RunManifest":
        path = Path(out_dir) / "manifest.json"
        if not path.exists():
            raise FileNotFoundError(f"no manifest in {out_dir}")
        d = json.loads(path.read_text())
        return cls(d["config_hash"], d["artifact_version"], d["kind"], str(out_dir), d["started"],
                   d["finished"], d["discarded_degenerate"], d["files"], d["violations"])


class _Writer:
    """Writes result files into the output directory with a provenance header."""

    def __init__(self, cfg: ExperimentConfig, manifest: RunManifest):
        self.cfg = cfg
        self.manifest = manifest
        self.dir = Path(cfg.out)
        self.dir.mkdir(parents=True, exist_ok=True)

    def _meta(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "config_hash": self.manifest.config_hash,
                "seed": self.cfg.seed, "kind": self.cfg.kind, "artifact_version": __version__}

    def csv(self, name: str, header, rows) -> None:
        buf = io.StringIO()
        meta = self._meta()
        buf.write("# " + " ".join(f"{k}={meta[k]}" for k in sorted(meta)) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        self._emit(name, buf.getvalue())

    def json(self, name: str, payload: dict) -> None:
        body = {"meta": self._meta(), **_clean(payload)}
        self._emit(name, json.dumps(body, sort_keys=True, indent=2) + "\n")

    def _emit(self, name: str, text: str) -> None:
        (self.dir / name).write_text(text)
        if name not in self.manifest.files:
            self.manifest.files.append(name)


def _clean(x: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


# --- experiments -----------------------------------------------------------------------

def _bc(cfg: ExperimentConfig) -> gs.BoundaryCondition:
    return ch.resolve_bc(cfg.bc)


def _lattice(cfg: ExperimentConfig, L: int):
    return build(cfg.d, L, cfg.resolved_topology)


def _run_gs(cfg, w: _Writer, m: RunManifest):
    bc = _bc(cfg)
    rows, n_fail = [], 0
    for L in cfg.L:
        lat = _lattice(cfg, L)
        solver = gs.FastSolver(lat, bc, cfg.method)
        for r in range(cfg.n_real):
            J = dis.sample(lat, cfg.seed, r)
            res = solver.solve_values(J.values)
            ok = True
            if lat.n_vertices <= 64:
                ok = gs.check_gs_criterion(lat, J, res.config, bc, k=4).passed
            n_fail += not ok
            rows.append((L, r, repr(res.energy), repr(res.gap), int(res.degenerate), res.bitstring(), int(ok)))
    w.csv("ground_states.csv", ("L", "r", "energy", "gap", "degenerate", "config", "criterion_pass"), rows)
    m.discarded["ground_states"] = sum(row[4] for row in rows)
    if n_fail:
        m.violations.append(f"ground-state criterion failed on {n_fail} instances")


def _run_droplet(cfg, w: _Writer, m: RunManifest):
    scan = ch.droplet_size_scan(cfg.d, cfg.L, _bc(cfg), cfg.n_real, cfg.seed, cfg.resolved_topology,
                                cfg.method, cfg.workers, cfg.ferromagnet)
    w.csv("droplets.csv", ex.DropletReport.CSV_HEADER + ("r",), scan.rows)
    w.json("droplet_summary.json", scan.summary())
    m.discarded["droplet"] = {str(k): v for k, v in scan.n_discarded.items()}
    bad = [row for row in scan.rows if row[7] < 1]
    if bad:
        m.violations.append(f"{len(bad)} droplets do not contain their edge")


def _run_chaos(cfg, w: _Writer, m: RunManifest):
    bc = _bc(cfg)
    grid = ch.default_t_grid(cfg.n_t, cfg.t_min, cfg.t_max)
    curves, rows = [], []
    for L in cfg.L:
        c = ch.chaos_curve(cfg.d, L, bc, grid, cfg.n_real, cfg.seed, cfg.resolved_topology, cfg.method,
                           cfg.workers)
        curves.append(c)
        rows.extend(c.csv_rows())
        if not np.all(c.overlaps[:, 0] == 1.0):
            m.violations.append(f"Q(sigma(0), sigma(0)) != 1 at L={L}")
    w.csv("chaos_curves.csv", ch.ChaosCurve.CSV_HEADER, rows)
    m.discarded["chaos"] = {str(c.L): c.n_discarded for c in curves}
    thresholds = [ch.adc_threshold(c, cfg.eps) for c in curves]
    alpha = ch.fit_alpha([(c.L, th.t_star) for c, th in zip(curves, thresholds)], cfg.d)
    collapse = ch.collapse_fit(curves, seed=cfg.seed)
    scan = ch.droplet_size_scan(cfg.d, cfg.L, bc, cfg.n_real_droplet, cfg.seed, cfg.resolved_topology,
                                cfg.method, cfg.workers)
    theta = (cfg.theta2 / 2, cfg.theta2_se / 2) if cfg.theta2 is not None else (math.nan, 0.0)
    rel = ch.relation_report(alpha, scan.gamma, collapse, theta, scan.d_f, cfg.d)
    w.json("chaos_summary.json", {
        "curves": [c.to_dict() for c in curves],
        "thresholds": [{"L": c.L, "t_star": th.t_star, "eps": th.eps, "flagged": th.flagged}
                       for c, th in zip(curves, thresholds)],
        "alpha": alpha.to_dict(),
        "gamma": scan.gamma.to_dict(),
        "d_f": scan.d_f.to_dict(),
        "collapse": collapse.to_dict(),
        "relations": rel.to_dict(),
    })


def _run_variance(cfg, w: _Writer, m: RunManifest):
    ens = va.ReplicaEnsemble(cfg.ensemble, cfg.d, cfg.method)
    s = va.rhs_s_grid(cfg.t, cfg.n_s)
    reports = []
    for L in cfg.L:
        rep = va.variance_report(ens, L, cfg.t, cfg.n_real, cfg.seed, s, cfg.workers)
        reports.append(rep)
        w.csv(f"variance_records_L{L}.csv", va.VarianceReport.CSV_HEADER, rep.csv_rows())
        m.discarded[f"variance_L{L}"] = rep.n_discarded
        if not rep.consistent:
            m.violations.append(f"variance bound violated beyond 2 SE at L={L}")
        if not rep.cross_nonnegative:
            m.violations.append(f"cross-term mean below -3 SE at L={L}")
        ok, worst = va.triangle_check(ens.lattice(L), 10_000, cfg.seed)
        if not ok:
            m.violations.append(f"triangle inequality failed at L={L} (slack {worst})")
    w.json("variance_summary.json", {"reports": [r.to_dict() for r in reports]})


def _run_stiffness(cfg, w: _Writer, m: RunManifest):
    scan = va.stiffness_scan(cfg.d, cfg.L, cfg.n_real, cfg.seed, cfg.method, cfg.workers, cfg.ferromagnet)
    rows = [(L, r, repr(float(x))) for L in scan.L_list for r, x in enumerate(scan.samples[L])]
    w.csv("stiffness_samples.csv", ("L", "k", "X"), rows)
    w.json("stiffness_summary.json", scan.to_dict())
    m.discarded["stiffness"] = {str(k): v for k, v in scan.n_discarded.items()}


def _run_window(cfg, w: _Writer, m: RunManifest):
    bc = _bc(cfg)
    rows, bad = [], 0
    for L in cfg.L:
        lat = _lattice(cfg, L)
        try:
            ex._validate_window(lat, cfg.window)
        except ValueError as exc:
            raise ConfigError("window", f"{exc} (L={L})") from None
        for r in range(cfg.n_real):
            J = dis.sample(lat, cfg.seed, r)
            E = ex.window_energy_vector(lat, J, bc, cfg.window, cfg.method)
            for eta, val in zip(E.configs, E.values):
                rows.append((L, r, "".join("+" if x > 0 else "-" for x in eta), repr(float(val)), repr(E.bound)))
                if abs(val) > E.bound + 1e-9:
                    bad += 1
    w.csv("window_vectors.csv", ("L", "r", "eta", "E_eta_ref", "bound"), rows)
    if bad:
        m.violations.append(f"{bad} window energies exceed the boundary bound")


def _run_selftest(cfg, w: _Writer, m: RunManifest):
    checks = []
    for h in ("linear", "square", "product"):
        res = va.gaussian_identity_selftest(h, 4, 100_000, seed=cfg.seed)
        checks.append({"name": f"gaussian identity {h}", "passed": res.passed, "exact": res.exact,
                       "estimate": res.estimate, "se": res.se})
    lat = build(2, 4, "open")
    agree = True
    for r in range(20):
        J = dis.sample(lat, cfg.seed, r)
        a = gs.solve(lat, J, method="enumeration")
        b = gs.solve(lat, J, method="column_dp")
        agree &= abs(a.energy - b.energy) <= 1e-12 and np.array_equal(a.config, b.config)
    checks.append({"name": "solver cross-check 4x4", "passed": bool(agree)})
    ok, worst = va.triangle_check(lat, 10_000, cfg.seed)
    checks.append({"name": "triangle inequality", "passed": ok, "worst_slack": worst})
    w.json("selftest.json", {"checks": checks})
    for c in checks:
        if not c["passed"]:
            m.violations.append(f"selftest failed: {c['name']}")


_DISPATCH: dict[str, Callable] = {
    "gs": _run_gs,
    "droplet": _run_droplet,
    "chaos": _run_chaos,
    "variance": _run_variance,
    "stiffness": _run_stiffness,
    "window": _run_window,
    "selftest": _run_selftest,
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run(cfg: ExperimentConfig) -> RunManifest:
    """Run one experiment and write its outputs, resolved config and manifest to ``cfg.out``."""
    cfg.validate()
    m = RunManifest(cfg.config_hash(), __version__, cfg.kind, cfg.out, started=_now())
    w = _Writer(cfg, m)
    (w.dir / "config.yaml").write_text(cfg.to_yaml())
    m.files.append("config.yaml")
    log.info("running %s (config %s)", cfg.kind, m.config_hash)
    _DISPATCH[cfg.kind](cfg, w, m)
    m.finished = _now()
    (w.dir / "manifest.json").write_text(json.dumps(m.to_dict(), sort_keys=True, indent=2) + "\n")
    return m
