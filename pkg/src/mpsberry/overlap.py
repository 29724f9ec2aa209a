"""Overlap matrices on edges of a discretized parameter space."""

from dataclasses import dataclass
import threading

import numpy as np

from .errors import NotCloseError
from .transfer import DEFAULT_TOL, TransferMap, leading_eigenpair


@dataclass(frozen=True, eq=False)
class EdgeOverlap:
    """Leading eigenpair of the mixed transfer map from ``edge[0]`` to ``edge[1]``.

    ``v`` has shape ``(D0, D1)``, unit Frobenius norm and fixed phase.
    """

    eta: complex
    v: np.ndarray
    gap: float
    edge: tuple = (None, None)

    def reversed(self):
        return EdgeOverlap(np.conj(self.eta), self.v.conj().T, self.gap, self.edge[::-1])


def _tensor(x):
    return getattr(x, "tensor", x)


def edge_overlap(a0, a1, tol=DEFAULT_TOL, gap_threshold=1e-8, edge=(None, None)):
    """Overlap matrix ``V01`` with ``sum_i A0 V A1^dag = eta V``.

    Raises
    ------
    NotCloseError
        If the leading eigenvalue is not separated in modulus by at least
        ``gap_threshold * |eta|``.
    """
    res = leading_eigenpair(TransferMap(_tensor(a0), _tensor(a1)), tol=tol,
                            degeneracy_threshold=gap_threshold)
    if res.degenerate or res.modulus == 0:
        raise NotCloseError(
            f"edge {edge}: leading mixed eigenvalue not separated "
            f"(|eta|={res.modulus:.3e}, gap={res.gap:.3e})", edge=edge, gap=res.gap)
    return EdgeOverlap(res.eta, res.vec, res.gap, tuple(edge))


def edge_fidelity(e):
    """Per-site fidelity ``|eta|`` of two canonical states."""
    return abs(e.eta)


def mixed_fidelity(a0, a1, tol=DEFAULT_TOL):
    return edge_fidelity(edge_overlap(a0, a1, tol=tol, gap_threshold=0.0))


def vertex_key(p):
    """Total order on vertex ids built from ints, strings and tuples of those."""
    parts = p if isinstance(p, tuple) else (p,)
    return tuple((0, int(x), "") if isinstance(x, (int, np.integer)) else (1, 0, str(x)) for x in parts)


class OverlapCache:
    """Memoized edge overlaps keyed by vertex id.

    Each undirected edge is solved once with the smaller vertex id first; the
    reverse direction is returned as the Hermitian conjugate.  ``states`` maps
    vertex ids to :class:`~mpsberry.mps.CanonicalMps`.
    """

    def __init__(self, states, tol=DEFAULT_TOL, gap_threshold=1e-8):
        self.states = states
        self.tol = tol
        self.gap_threshold = gap_threshold
        self._store = {}
        self._lock = threading.Lock()

    def __len__(self):
        return len(self._store)

    def _canonical(self, p, q):
        return (p, q, False) if vertex_key(p) <= vertex_key(q) else (q, p, True)

    def get(self, p, q):
        """Return the :class:`EdgeOverlap` for the directed edge ``p -> q``."""
        lo, hi, flipped = self._canonical(p, q)
        ov = self._store.get((lo, hi))
        if ov is None:
            ov = edge_overlap(self.states[lo], self.states[hi], tol=self.tol,
                              gap_threshold=self.gap_threshold, edge=(lo, hi))
            with self._lock:
                ov = self._store.setdefault((lo, hi), ov)
        return ov.reversed() if flipped else ov

    def v(self, p, q):
        return self.get(p, q).v

    def set(self, p, q, overlap):
        """Install an overlap for ``p -> q`` (stored in canonical direction)."""
        lo, hi, flipped = self._canonical(p, q)
        with self._lock:
            self._store[(lo, hi)] = overlap.reversed() if flipped else overlap

    def items(self):
        return list(self._store.items())

    def min_gap(self):
        if not self._store:
            return float("nan")
        return min(ov.gap for ov in self._store.values())
