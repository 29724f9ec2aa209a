"""End-to-end runs: shell sweeps at fixed couplings, random-coupling grids, Chern baseline.

Every run is a pure function of its :class:`~mpsberry.config.RunConfig`;
writers format floats with ``repr`` so equal configs give byte-identical files.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field
import json
import logging
import math
from pathlib import Path

import numpy as np

from .berry import (CurvatureEvaluator, CurvatureReport, berry_phase_0d, chern_number_0d,
                    shell_estimate)
from .errors import MpsBerryError
from .geometry import (PRISM_SIGNS, PRISM_TETS, cube_grid_complex, prism_curvature_cell,
                       shell_alphas, sphere_surface)
from .io import CheckpointStore
from .model import ModelPoint, analytic_mps, hamiltonian, random_coupling_field, rotate_mps
from .mps import entanglement_entropy
from .overlap import OverlapCache, vertex_key
from .solver import ground_state

log = logging.getLogger(__name__)
TWO_PI = 2 * math.pi


# -- ground states at n = z ----------------------------------------------------------

def _solve_task(args):
    alpha, j1, j2, opts, warm = args
    try:
        return ground_state(hamiltonian(ModelPoint(alpha, 0.0, 0.0, j1, j2)), opts, warm), None
    except MpsBerryError as exc:
        return None, f"{type(exc).__name__}: {exc}"


class BaseStates:
    """Ground states at ``n = z`` keyed by ``(alpha, j1, j2)``.

    The couplings are SU(2) symmetric, so the state at any ``n`` is the
    rotation of this one.  Analytic tensors are used when requested and
    ``j1 = j2 = 0``; otherwise the solver runs, through the checkpoint store
    if one is given.
    """

    def __init__(self, opts, analytic=False, store=None, threads=1, warm_start=False):
        self.opts = opts
        self.analytic = analytic
        self.store = store
        self.threads = threads
        self.warm_start = warm_start
        self.states = {}
        self.failures = {}

    def key(self, alpha, j1, j2):
        return {"alpha": float(alpha), "j1": float(j1), "j2": float(j2),
                "solver": list(self.opts.key())}

    def solve_all(self, points):
        """Solve every distinct ``(alpha, j1, j2)``; failures are recorded, not raised."""
        todo = []
        for p in sorted(set(points)):
            if p in self.states or p in self.failures:
                continue
            alpha, j1, j2 = p
            if self.analytic and j1 == 0 and j2 == 0:
                self.states[p] = analytic_mps(alpha)
                continue
            if self.store is not None:
                hit = self.store.get(self.key(*p))
                if hit is not None:
                    self.states[p] = hit
                    continue
            todo.append(p)
        if not todo:
            return
        if self.warm_start:
            self._record(todo, self._solve_chains(todo))
        elif self.threads > 1:
            tasks = [(a, j1, j2, self.opts, None) for a, j1, j2 in todo]
            with ProcessPoolExecutor(self.threads) as pool:
                self._record(todo, pool.map(_solve_task, tasks))
        else:
            self._record(todo, (_solve_task((a, j1, j2, self.opts, None)) for a, j1, j2 in todo))

    def _record(self, todo, results):
        # results may be lazy; each point is checkpointed as soon as it is solved
        for p, (mps, err) in zip(todo, results):
            if err is not None:
                log.warning("solver failed at %s: %s", p, err)
                self.failures[p] = err
                continue
            self.states[p] = mps
            if self.store is not None:
                self.store.put(self.key(*p), mps)
            log.info("solved alpha=%.6f j1=%.6f j2=%.6f (D=%d)", p[0], p[1], p[2], mps.bond_dim)

    def _solve_chains(self, todo):
        # consecutive points in sorted order (alpha ascending) seed each other
        prev = None
        for a, j1, j2 in todo:
            res = _solve_task((a, j1, j2, self.opts, prev))
            prev = res[0]
            yield res

    def get(self, alpha, j1=0.0, j2=0.0):
        return self.states.get((alpha, j1, j2))


def _diag(mps):
    return {"entropy": entanglement_entropy(mps), "bond_dim": mps.bond_dim,
            "schmidt_sq": (np.asarray(mps.schmidt) ** 2).tolist()}


def _base_states(cfg, store_dir):
    store = CheckpointStore(store_dir) if store_dir is not None else None
    return BaseStates(cfg.solver, cfg.analytic, store, cfg.threads, cfg.warm_start)


# -- fixed couplings: prism stack over one small patch ----------------------------------

@dataclass
class ShellResult:
    alphas: np.ndarray
    f: np.ndarray
    report: CurvatureReport
    vertex_diagnostics: list
    failures: dict = field(default_factory=dict)

    @property
    def nu(self):
        return self.report.nu


def run_fixed_couplings(cfg, store_dir=None):
    """Per-shell curvature ``f_j`` and ``nu = sum f_j / 2 pi`` for fixed ``(j1, j2)``."""
    n = cfg.n_shells
    alphas = shell_alphas(n)
    base = _base_states(cfg, store_dir)
    base.solve_all([(a, cfg.j1, cfg.j2) for a in alphas])
    if base.failures:
        raise MpsBerryError(f"solver failed at {len(base.failures)} shell points: "
                            f"{next(iter(base.failures.values()))}")

    states = {}
    for j in range(n):
        cell = prism_curvature_cell(j, cfg.theta0, cfg.phi0, cfg.dtheta, cfg.dphi, n)
        for k, (alpha, theta, phi) in enumerate(cell.coords):
            vid = (j + k % 2, k // 2)
            if vid not in states:
                states[vid] = rotate_mps(base.get(alphas[vid[0]], cfg.j1, cfg.j2), theta, phi)

    ev = CurvatureEvaluator(states)
    tet_f, signs, f = [], [], np.zeros(n)
    for j in range(n):
        ids = [(j + k % 2, k // 2) for k in range(6)]
        for t, s in zip(PRISM_TETS, PRISM_SIGNS):
            tet_f.append(ev.curvature(tuple(ids[k] for k in t)))
            signs.append(s)
        f[j] = shell_estimate(math.fsum(signs[-3 + m] * tet_f[-3 + m] for m in range(3)),
                              cfg.theta0, cfg.dtheta, cfg.dphi)
    nu = math.fsum(f) / TWO_PI
    nearest = int(round(nu))
    report = CurvatureReport(np.asarray(tet_f), np.asarray(signs, dtype=float), nu, nearest,
                             abs(nu - nearest), ev.cache.min_gap(), {j: float(f[j]) for j in range(n)})
    diags = [_diag(base.get(a, cfg.j1, cfg.j2)) for a in alphas]
    report.diagnostics = {"vertices": diags}
    return ShellResult(np.asarray(alphas), f, report, diags)


def write_fixed(result, cfg, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    kmax = max(d["bond_dim"] for d in result.vertex_diagnostics[:-1])
    with open(out / "shells.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha_j", "f_j_over_2pi", "entropy", "bond_dim"]
                   + [f"schmidt_sq_{k + 1}" for k in range(kmax)])
        for j, fj in enumerate(result.f):
            d = result.vertex_diagnostics[j]
            sq = [repr(x) for x in d["schmidt_sq"]] + [""] * (kmax - d["bond_dim"])
            w.writerow([repr(float(result.alphas[j])), repr(float(fj / TWO_PI)),
                        repr(float(d["entropy"])), d["bond_dim"]] + sq)
    _write_manifest(out, cfg, result.report.summary())


def _write_manifest(out, cfg, summary, extra=None):
    doc = {"config_hash": cfg.config_hash(), "kind": cfg.kind, **summary}
    if extra:
        doc.update(extra)
    with open(Path(out) / "manifest.json", "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


# -- random couplings on the full S^3 grid ----------------------------------------------

@dataclass
class GridResult:
    complex: object
    couplings: dict
    report: CurvatureReport
    cube_f: dict
    failures: dict
    complete: bool

    @property
    def nu(self):
        return self.report.nu


def coupling_table(cfg, cx):
    ids = sorted(cx.vertices, key=vertex_key)
    pts = np.array([cx.vertices[p] for p in ids])
    j1, j2 = random_coupling_field(cfg.seed, pts, cfg.amplitude, cfg.envelope_width)
    return {p: (float(a), float(b)) for p, a, b in zip(ids, j1, j2)}


def run_random_couplings(cfg, store_dir=None):
    """``nu`` over the closed cube-grid triangulation with seeded random couplings.

    Vertices whose solve fails are recorded; tetrahedra touching them are
    skipped and the result is flagged incomplete.
    """
    cx = cube_grid_complex(*cfg.grid)
    couplings = coupling_table(cfg, cx)
    base = _base_states(cfg, store_dir)
    base.solve_all([(cx.vertices[p][0],) + couplings[p] for p in cx.vertices])

    states = {}
    for p, (alpha, theta, phi) in cx.vertices.items():
        b = base.get(alpha, *couplings[p])
        if b is not None:
            states[p] = rotate_mps(b, theta, phi)
    ev = CurvatureEvaluator(states, OverlapCache(states))
    order = sorted(range(len(cx.tets)), key=lambda k: tuple(vertex_key(p) for p in cx.tets[k]))
    fvals = np.full(len(cx.tets), np.nan)
    for k in order:
        if all(p in states for p in cx.tets[k]):
            fvals[k] = ev.curvature(cx.tets[k])
    signs = np.asarray(cx.signs, dtype=float)
    valid = [k for k in order if not np.isnan(fvals[k])]
    nu = math.fsum(signs[k] * fvals[k] for k in valid) / TWO_PI
    shells, cubes = {}, {}
    for k in valid:
        cube = cx.cube_of[k]
        shells[cube[0]] = shells.get(cube[0], 0.0) + signs[k] * fvals[k]
        cubes[cube] = cubes.get(cube, 0.0) + signs[k] * fvals[k]
    nearest = int(round(nu))
    report = CurvatureReport(fvals, signs, nu, nearest, abs(nu - nearest), ev.cache.min_gap(), shells)
    complete = len(valid) == len(cx.tets)
    report.diagnostics = {"complete": complete, "n_failed_points": len(base.failures),
                          "n_skipped_tets": len(cx.tets) - len(valid)}
    return GridResult(cx, couplings, report, cubes, dict(base.failures), complete)


def write_random(result, cfg, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_alpha, n_theta, n_phi = cfg.grid
    alphas = np.linspace(-math.pi / 4, math.pi / 4, n_alpha)
    thetas = np.linspace(0, math.pi, n_theta)
    with open(out / "cells.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i_alpha", "i_theta", "i_phi", "alpha", "theta", "phi", "F_cell"])
        for (i, t, k), val in sorted(result.cube_f.items()):
            w.writerow([i, t, k, repr(float(0.5 * (alphas[i] + alphas[i + 1]))),
                        repr(float(0.5 * (thetas[t] + thetas[t + 1]))),
                        repr(float(TWO_PI * (k + 0.5) / n_phi)), repr(float(val))])
    with open(out / "shells.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha_lo", "alpha_hi", "f_over_2pi"])
        for i, val in sorted(result.report.shell_sums.items()):
            w.writerow([repr(float(alphas[i])), repr(float(alphas[i + 1])), repr(float(val / TWO_PI))])
    with open(out / "mesh.json", "w") as fh:
        json.dump(result.complex.to_json(), fh)
    _write_manifest(out, cfg, result.report.summary(),
                    {"complete": result.complete,
                     "failures": {str(k): v for k, v in sorted(result.failures.items())}})


# -- Chern-number baseline ---------------------------------------------------------------

def spin_half_state(theta, phi):
    """Ground state of ``-n . sigma``."""
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


def latitude_loop_phase(theta, n=200):
    """Discrete Berry phase of ``spin_half_state`` around the latitude ``theta``."""
    states = [spin_half_state(theta, TWO_PI * k / n) for k in range(n)]
    return berry_phase_0d(states, closed=True)


@dataclass
class ChernResult:
    ch1: int
    thetas: np.ndarray
    gamma: np.ndarray


def run_baseline_chern(cfg, n_loop=200, family=spin_half_state, reverse=False):
    n_theta, n_phi = cfg.sphere
    verts, faces = sphere_surface(n_theta, n_phi)
    states = {p: family(*c) for p, c in verts.items()}
    if reverse:
        faces = [f[::-1] for f in faces]
    ch1 = chern_number_0d(faces, states)
    thetas = np.linspace(0, math.pi, 9)[1:-1]
    gamma = np.array([latitude_loop_phase(t, n_loop) for t in thetas])
    return ChernResult(ch1, thetas, gamma)


def write_chern(result, cfg, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "berry_phase.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "gamma", "pi_one_minus_cos"])
        for t, g in zip(result.thetas, result.gamma):
            w.writerow([repr(float(t)), repr(float(g)), repr(math.pi * (1 - math.cos(t)))])
    _write_manifest(out, cfg, {"ch1": result.ch1})

