"""Oriented simplicial complexes over discretized parameter spaces.

Vertices carry ``(alpha, theta, phi)`` coordinates.  A tetrahedron is stored
as an ordered 4-tuple together with a sign ``sigma = +-1`` saying whether the
vertex order agrees with the orientation of the ambient 3-manifold, so that
sums run as ``sum sigma * F(tet)``.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import permutations
import json
import math

import numpy as np

from .errors import ConstructionError
from .overlap import vertex_key

PRISM_TETS = ((0, 1, 2, 4), (1, 2, 3, 5), (1, 2, 4, 5))
PRISM_SIGNS = (1, -1, 1)


def permutation_parity(seq, key=vertex_key):
    """+1 for an even permutation of ``sorted(seq)``, -1 for odd."""
    seq = [key(x) for x in seq]
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def tet_faces(tet):
    """Boundary faces of an ordered tetrahedron with their incidence signs."""
    p0, p1, p2, p3 = tet
    return (((p1, p2, p3), 1), ((p0, p2, p3), -1), ((p0, p1, p3), 1), ((p0, p1, p2), -1))


@dataclass
class SimplicialComplex3:
    vertices: dict
    tets: list
    signs: list
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.tets) != len(self.signs):
            raise ConstructionError("one sign per tetrahedron required")
        self.tets = [tuple(t) for t in self.tets]
        self.signs = [int(s) for s in self.signs]

    @property
    def faces(self):
        """Map sorted face -> list of ``(tet index, induced orientation sign)``."""
        out = defaultdict(list)
        for k, (tet, s) in enumerate(zip(self.tets, self.signs)):
            for face, inc in tet_faces(tet):
                key = tuple(sorted(face, key=vertex_key))
                out[key].append((k, s * inc * permutation_parity(face)))
        return dict(out)

    @property
    def edges(self):
        out = set()
        for tet in self.tets:
            for i in range(4):
                for j in range(i + 1, 4):
                    out.add(tuple(sorted((tet[i], tet[j]), key=vertex_key)))
        return sorted(out, key=lambda e: (vertex_key(e[0]), vertex_key(e[1])))

    def euler_characteristic(self):
        used = {p for t in self.tets for p in t}
        return len(used) - len(self.edges) + len(self.faces) - len(self.tets)

    def to_json(self):
        return {
            "format": "mpsberry.complex",
            "version": 1,
            "vertices": [{"id": _jsonable(k), "coords": list(map(float, v))}
                         for k, v in sorted(self.vertices.items(), key=lambda kv: vertex_key(kv[0]))],
            "tets": [{"vertices": [_jsonable(p) for p in t], "sign": s}
                     for t, s in zip(self.tets, self.signs)],
            "meta": self.meta,
        }

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)


def _jsonable(p):
    return list(p) if isinstance(p, tuple) else p


def _from_jsonable(p):
    return tuple(_from_jsonable(x) for x in p) if isinstance(p, list) else p


def complex_from_json(doc):
    if doc.get("format") != "mpsberry.complex":
        raise ConstructionError("not a mesh document")
    verts = {_from_jsonable(v["id"]): tuple(v["coords"]) for v in doc["vertices"]}
    tets = [tuple(_from_jsonable(p) for p in t["vertices"]) for t in doc["tets"]]
    signs = [t["sign"] for t in doc["tets"]]
    return SimplicialComplex3(verts, tets, signs, doc.get("meta", {}))


@dataclass(frozen=True)
class ClosedReport:
    closed: bool
    boundary_faces: list
    bad_faces: list

    def __bool__(self):
        return self.closed


def validate_closed(cx):
    """Check that each face meets exactly two tetrahedra with opposite orientation."""
    boundary, bad = [], []
    for face, inc in cx.faces.items():
        if len(inc) == 1:
            boundary.append(face)
        elif len(inc) != 2 or inc[0][1] + inc[1][1] != 0:
            bad.append(face)
    return ClosedReport(not boundary and not bad, boundary, bad)


def signed_volume(coords):
    c = np.asarray(coords, dtype=float)
    return float(np.linalg.det(c[1:] - c[0]))


def orientation_signs(cx):
    """Sign of the coordinate volume of each tetrahedron (0 if flat)."""
    return [int(np.sign(signed_volume([cx.vertices[p] for p in t]))) for t in cx.tets]


def boundary_of_4simplex():
    # coordinates are for export only; the complex is abstract
    pts = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)]
    verts = {k: tuple(float(x) for x in pts[k]) for k in range(5)}
    tets, signs = [], []
    for k in range(5):
        tets.append(tuple(p for p in range(5) if p != k))
        signs.append((-1) ** k)
    return SimplicialComplex3(verts, tets, signs, {"kind": "boundary of 4-simplex"})


@dataclass(frozen=True)
class PrismCell:
    """Triangular prism over ``[alpha_j, alpha_{j+1}]`` with six vertices.

    Vertex ``2m`` sits at ``alpha_j`` and ``2m + 1`` at ``alpha_{j+1}`` above
    corner ``m`` of the small triangle ``(theta-, phi-), (theta+, phi-),
    (theta-, phi+)``.
    """

    j: int
    coords: tuple
    tets: tuple = PRISM_TETS
    signs: tuple = PRISM_SIGNS

    @property
    def zero_volume(self):
        c = np.asarray(self.coords)
        return abs(signed_volume(c[[0, 1, 2, 4]])) == 0.0

    @property
    def corners(self):
        # (theta, phi) per corner m = 0, 1, 2
        return tuple((self.coords[2 * m][1], self.coords[2 * m][2]) for m in range(3))

    @property
    def alphas(self):
        return self.coords[0][0], self.coords[1][0]


def shell_alphas(n_shells):
    return [-math.pi / 4 + math.pi * j / (2 * n_shells) for j in range(n_shells + 1)]


def prism_curvature_cell(j, theta0=math.pi / 2, phi0=math.pi, dtheta=math.pi / 100,
                         dphi=2 * math.pi / 100, n_shells=100):
    if not 0 <= j < n_shells:
        raise ValueError(f"shell index {j} outside [0, {n_shells})")
    a = shell_alphas(n_shells)
    lo, hi = a[j], a[j + 1]
    tm, tp = theta0 - dtheta / 2, theta0 + dtheta / 2
    pm, pp = phi0 - dphi / 2, phi0 + dphi / 2
    coords = ((lo, tm, pm), (hi, tm, pm), (lo, tp, pm), (hi, tp, pm), (lo, tm, pp), (hi, tm, pp))
    return PrismCell(j, coords)


def prism_stack_complex(n_shells=100, theta0=math.pi / 2, phi0=math.pi, dtheta=math.pi / 100,
                        dphi=2 * math.pi / 100):
    """Stack of prisms over one small triangle; vertex ids are ``(j, corner)``."""
    verts, tets, signs = {}, [], []
    for j in range(n_shells):
        cell = prism_curvature_cell(j, theta0, phi0, dtheta, dphi, n_shells)
        ids = [(j + (k % 2), k // 2) for k in range(6)]
        for k, p in enumerate(ids):
            verts[p] = cell.coords[k]
        for t, s in zip(cell.tets, cell.signs):
            tets.append(tuple(ids[k] for k in t))
            signs.append(s)
    return SimplicialComplex3(verts, tets, signs, {"kind": "prism stack", "n_shells": n_shells})


_FREUDENTHAL = [(perm, permutation_parity(perm, key=int)) for perm in permutations(range(3))]


def cube_tets(origin_index):
    """Six Freudenthal tetrahedra of the unit cube at integer ``origin_index``.

    Each tetrahedron follows a monotone lattice path from the cube's lowest to
    highest corner; its sign is the parity of the axis order.
    """
    out = []
    base = [int(x) for x in origin_index]
    for perm, parity in _FREUDENTHAL:
        cur = list(base)
        pts = [tuple(cur)]
        for ax in perm:
            cur = list(cur)
            cur[ax] += 1
            pts.append(tuple(cur))
        out.append((tuple(pts), parity))
    return out


def grid_coords(n_alpha, n_theta, n_phi):
    alphas = np.linspace(-math.pi / 4, math.pi / 4, n_alpha)
    thetas = np.linspace(0, math.pi, n_theta)
    phis = 2 * math.pi * np.arange(n_phi) / n_phi
    return alphas, thetas, phis


def cube_grid_complex(n_alpha, n_theta, n_phi, drop_degenerate=True):
    """Closed triangulation of S^3 from an ``(alpha, theta, phi)`` grid.

    ``n_alpha`` and ``n_theta`` count grid points including the endpoints,
    ``n_phi`` counts distinct points around the periodic ``phi`` circle.  All
    points at ``alpha = +-pi/4`` are identified to single vertices
    ``"S"``/``"N"``, and on each interior ``alpha`` slice all points at
    ``theta = 0`` (resp. ``pi``) are identified to ``(i, "z+")`` (resp.
    ``(i, "z-")``).  Tetrahedra made degenerate by the identifications are
    dropped (they carry no curvature).
    """
    if min(n_alpha, n_theta, n_phi) < 2:
        raise ConstructionError("grid sizes must be >= 2")
    if n_phi < 3 and n_alpha > 2 and n_theta > 2:
        # two phi cells would share both side faces
        raise ConstructionError("n_phi must be >= 3 when the grid has interior points")
    alphas, thetas, phis = grid_coords(n_alpha, n_theta, n_phi)

    def vid(i, t, k):
        if i == 0:
            return ("S",)
        if i == n_alpha - 1:
            return ("N",)
        if t == 0:
            return (i, "z+")
        if t == n_theta - 1:
            return (i, "z-")
        return (i, t, k % n_phi)

    verts = {}
    for i in range(n_alpha):
        for t in range(n_theta):
            for k in range(n_phi):
                p = vid(i, t, k)
                if p not in verts:
                    tt = 0.0 if p[-1] == "z+" or len(p) == 1 else (math.pi if p[-1] == "z-" else thetas[t])
                    pp = phis[k] if len(p) == 3 else 0.0
                    verts[p] = (float(alphas[i]), float(tt), float(pp))

    tets, signs, cube_of = [], [], []
    n_raw = 0
    for i in range(n_alpha - 1):
        for t in range(n_theta - 1):
            for k in range(n_phi):
                for pts, parity in cube_tets((i, t, k)):
                    n_raw += 1
                    ids = tuple(vid(*p) for p in pts)
                    if drop_degenerate and len(set(ids)) < 4:
                        continue
                    tets.append(ids)
                    signs.append(parity)
                    cube_of.append((i, t, k))
    cx = SimplicialComplex3(verts, tets, signs, {
        "kind": "cube grid", "shape": [n_alpha, n_theta, n_phi], "n_raw_tets": n_raw,
        "n_cubes": (n_alpha - 1) * (n_theta - 1) * n_phi})
    cx.cube_of = cube_of
    report = validate_closed(cx)
    if drop_degenerate and not report.closed:
        raise ConstructionError(
            f"grid complex not closed: {len(report.boundary_faces)} boundary, "
            f"{len(report.bad_faces)} inconsistent faces")
    return cx


def _vid_key(p):
    return tuple(str(x) for x in p)


def sphere_surface(n_theta, n_phi):
    """Oriented triangulation of S^2 from a ``(theta, phi)`` grid.

    Returns ``(vertices, faces)`` with ``vertices`` a dict id -> (theta, phi)
    and faces oriented along ``d theta ^ d phi`` (outward normal).
    """
    thetas = np.linspace(0, math.pi, n_theta)
    phis = 2 * math.pi * np.arange(n_phi) / n_phi

    def vid(t, k):
        if t == 0:
            return "z+"
        if t == n_theta - 1:
            return "z-"
        return (t, k % n_phi)

    verts = {}
    for t in range(n_theta):
        for k in range(n_phi):
            p = vid(t, k)
            verts.setdefault(p, (float(thetas[t]), float(phis[k]) if isinstance(p, tuple) else 0.0))
    faces = []
    for t in range(n_theta - 1):
        for k in range(n_phi):
            a, b, c, d = vid(t, k), vid(t + 1, k), vid(t, k + 1), vid(t + 1, k + 1)
            # (theta, phi) increments: a->b is +theta, a->c is +phi
            for tri in ((a, b, d), (a, d, c)):
                if len(set(tri)) == 3:
                    faces.append(tri)
    return verts, faces
