"""Berry phases of state families and higher Berry curvature of MPS families.

Angles follow the convention ``Arg z`` in ``[-pi, pi)``.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .errors import (ChargeTransitionError, DegeneratePatchError, IllConditionedTriangleError,
                     RefinementError, RefinementWarning)
from .geometry import PRISM_SIGNS, PRISM_TETS, tet_faces
from .mps import entanglement_entropy
from .overlap import OverlapCache, vertex_key

TRACE_FLOOR = 1e-12
TWO_PI = 2 * math.pi


def wrap(x):
    """Map angles to ``[-pi, pi)``."""
    return (np.asarray(x) + math.pi) % TWO_PI - math.pi


def arg(z):
    return float(wrap(np.angle(z)))


# -- zero-dimensional baseline ------------------------------------------------

def berry_phase_0d(states, closed=True, floor=1e-12):
    """``Arg prod <psi_j|psi_{j+1}>`` along a discretized path.

    With ``closed=True`` the overlap from the last state back to the first is
    included, so the loop may be passed with or without its repeated endpoint.
    """
    states = [np.asarray(s, dtype=complex) for s in states]
    pairs = list(zip(states[:-1], states[1:]))
    if closed:
        pairs.append((states[-1], states[0]))
    prod = 1.0 + 0j
    for a, b in pairs:
        ov = np.vdot(a, b)
        if abs(ov) < floor:
            raise ChargeTransitionError("vanishing overlap between consecutive states")
        prod *= ov / abs(ov)
    return arg(prod)


def triangle_flux_0d(p0, p1, p2):
    return berry_phase_0d([p0, p1, p2], closed=True)


def chern_number_0d(faces, states, max_flux=math.pi / 2, tol=1e-6):
    """Sum of triangle fluxes over a closed oriented surface, divided by 2 pi.

    Raises
    ------
    RefinementError
        If any triangle flux exceeds ``max_flux`` in magnitude or the total is
        not within ``tol`` of an integer.
    """
    total = 0.0
    for f in faces:
        flux = triangle_flux_0d(*(states[p] for p in f))
        if abs(flux) > max_flux:
            raise RefinementError(f"flux {flux:.3f} on triangle {f}: refine the surface")
        total += flux
    nu = total / TWO_PI
    k = round(nu)
    if abs(nu - k) > tol:
        raise RefinementError(f"flux sum {nu} is not integral")
    return int(k)


# -- higher Berry connection and curvature ---------------------------------------

def _weights(mps, power):
    return np.asarray(mps.schmidt, dtype=float) ** power


@dataclass(frozen=True)
class TrianglePhase:
    face: tuple
    phi: float


class CurvatureEvaluator:
    """Triangle phases and tetrahedron curvatures over a family of MPS.

    Parameters
    ----------
    states : mapping
        Vertex id -> :class:`~mpsberry.mps.CanonicalMps`.
    cache : OverlapCache, optional
        Shared edge-overlap cache; created from ``states`` if omitted.
    weighted : bool
        ``True`` uses the ``Lambda^{2/3}`` weighting at each vertex.  ``False``
        gives the unweighted ``Lambda^2``-at-first-vertex variant, kept only as
        a negative control.
    """

    def __init__(self, states, cache=None, weighted=True, trace_floor=TRACE_FLOOR,
                 warn_threshold=math.pi / 2):
        self.states = states
        self.cache = cache if cache is not None else OverlapCache(states)
        self.weighted = weighted
        self.trace_floor = trace_floor
        self.warn_threshold = warn_threshold

    def trace(self, face):
        p0, p1, p2 = face
        v01, v12, v20 = self.cache.v(p0, p1), self.cache.v(p1, p2), self.cache.v(p2, p0)
        if self.weighted:
            w0, w1, w2 = (_weights(self.states[p], 2 / 3) for p in face)
            m = (w0[:, None] * v01) @ (w1[:, None] * v12) @ (w2[:, None] * v20)
        else:
            w0 = _weights(self.states[p0], 2)
            m = (w0[:, None] * v01) @ v12 @ v20
        return complex(np.trace(m))

    def phi(self, face):
        tr = self.trace(face)
        if abs(tr) < self.trace_floor:
            raise IllConditionedTriangleError(f"|tr| = {abs(tr):.2e} on triangle {face}", face=face)
        return arg(tr)

    def triangle_phase(self, face):
        return TrianglePhase(tuple(face), self.phi(face))

    def curvature(self, tet):
        raw = sum(inc * self.phi(face) for face, inc in tet_faces(tet))
        f = float(wrap(raw))
        if abs(f) > self.warn_threshold:
            warnings.warn(f"|F| = {abs(f):.3f} on tetrahedron {tet}; grid may be too coarse",
                          RefinementWarning, stacklevel=2)
        return f

    def higher_berry_phase(self, faces, signs=None):
        if signs is None:
            signs = [1] * len(faces)
        return float(wrap(sum(s * self.phi(f) for f, s in zip(faces, signs))))


def phi_triangle(face, states, cache=None):
    return CurvatureEvaluator(states, cache).phi(face)


def phi_triangle_unweighted(face, states, cache=None):
    return CurvatureEvaluator(states, cache, weighted=False).phi(face)


def higher_berry_phase(faces, states, cache=None, signs=None):
    return CurvatureEvaluator(states, cache).higher_berry_phase(faces, signs)


def curvature_tet(tet, states, cache=None, weighted=True):
    return CurvatureEvaluator(states, cache, weighted=weighted).curvature(tet)


@dataclass
class CurvatureReport:
    tet_curvature: np.ndarray
    signs: np.ndarray
    nu: float
    nearest: int
    residual: float
    min_gap: float
    shell_sums: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def summary(self):
        return {"nu": self.nu, "nearest_integer": self.nearest, "residual": self.residual,
                "min_edge_gap": self.min_gap, "n_tets": int(len(self.tet_curvature))}


def vertex_diagnostics(states):
    return {p: {"entropy": entanglement_entropy(m), "bond_dim": m.bond_dim,
                "schmidt_sq": (np.asarray(m.schmidt) ** 2).tolist()} for p, m in states.items()}


def invariant_3manifold(cx, states, cache=None, weighted=True, shell_key=None):
    """``nu = (1/2 pi) sum sigma F`` over all tetrahedra of ``cx``.

    ``shell_key(tet_index)``, if given, groups the signed curvatures into
    partial sums reported in ``shell_sums``.
    """
    ev = CurvatureEvaluator(states, cache, weighted=weighted)
    order = sorted(range(len(cx.tets)), key=lambda k: tuple(vertex_key(p) for p in cx.tets[k]))
    fvals = np.zeros(len(cx.tets))
    for k in order:
        fvals[k] = ev.curvature(cx.tets[k])
    signs = np.asarray(cx.signs, dtype=float)
    total = math.fsum(signs[k] * fvals[k] for k in order)
    nu = total / TWO_PI
    nearest = int(round(nu))
    shells = {}
    if shell_key is not None:
        for k in order:
            key = shell_key(k)
            shells[key] = shells.get(key, 0.0) + signs[k] * fvals[k]
    return CurvatureReport(fvals, signs, nu, nearest, abs(nu - nearest), ev.cache.min_gap(), shells)


# -- prism-stack estimator --------------------------------------------------------

def prism_curvature(evaluator, ids):
    """Signed curvature of a prism ``F(0124) - F(1235) + F(1245)``.

    ``ids`` lists the six vertex ids in prism order.
    """
    return sum(s * evaluator.curvature(tuple(ids[k] for k in t)) for t, s in zip(PRISM_TETS, PRISM_SIGNS))


def shell_estimate(prism_f, theta0, dtheta, dphi):
    """Rescale a prism curvature by the ratio of the sphere area to the patch area."""
    area = math.sin(theta0) * dtheta * dphi / 2
    if area == 0:
        raise DegeneratePatchError("patch has zero area (sin theta0 = 0 or zero step)")
    return prism_f * 4 * math.pi / area
