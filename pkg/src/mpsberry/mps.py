"""Translation-invariant MPS: canonical form, truncation and small-chain states.

Canonical form here means a right-canonical tensor (``sum_i A A^dag = 1``)
whose left fixed point is the diagonal ``Lambda^2`` with ``tr Lambda^2 = 1``;
Schmidt values are stored descending.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import CapacityError, EmptyStateError, InjectivityError, PhaseTransitionError
from .transfer import (DEFAULT_TOL, TransferMap, as_tensor, leading_eigenpair,
                       subleading_modulus)

PD_FLOOR = 1e-10
DEFAULT_DENSE_LIMIT = 2 ** 20


@dataclass(frozen=True, eq=False)
class CanonicalMps:
    """Injective MPS tensor in canonical form.

    Attributes
    ----------
    tensor : ndarray, shape (d, D, D)
        Right-canonical tensor whose left fixed point is ``diag(schmidt**2)``.
    schmidt : ndarray, shape (D,)
        Schmidt values, strictly positive and descending, ``sum(schmidt**2) == 1``.
    eta1 : float
        Modulus of the subleading transfer-map eigenvalue (leading is 1).
    """

    tensor: np.ndarray
    schmidt: np.ndarray
    eta1: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def d(self):
        return self.tensor.shape[0]

    @property
    def bond_dim(self):
        return self.tensor.shape[1]

    @property
    def gap(self):
        return 1.0 - self.eta1

    @property
    def corr_length(self):
        return correlation_length(self)

    def with_tensor(self, tensor):
        return CanonicalMps(np.asarray(tensor, dtype=complex), self.schmidt, self.eta1, dict(self.meta))


def _hermitian_eig(x, name, floor, real=False):
    """Eigen-decomposition of a Hermitized fixed point.

    With ``floor`` None a non positive-definite fixed point is an error;
    otherwise eigenvalues below ``floor * max`` are reported as dropped.
    """
    # fixed points of real maps are real once their phase is fixed
    x = 0.5 * (x + x.conj().T)
    if real:
        x = x.real
    w, u = np.linalg.eigh(x)
    if w[-1] < 0:
        w, u = -w[::-1], u[:, ::-1]
    if w[-1] <= 0:
        raise InjectivityError(f"{name} fixed point vanishes")
    if floor is None:
        if w[0] <= PD_FLOOR * w[-1]:
            raise InjectivityError(f"{name} fixed point is not positive definite (eigenvalues {w})")
        return u, w
    keep = w > floor * w[-1]
    return u[:, keep], w[keep]


def right_canonical_residual(a):
    a = as_tensor(a)
    s = np.einsum("iab,icb->ac", a, a.conj())
    return float(np.max(np.abs(s - np.eye(a.shape[1]))))


def left_canonical_residual(a, schmidt):
    a = as_tensor(a)
    l2 = np.diag(np.asarray(schmidt) ** 2)
    s = np.einsum("iba,bc,icd->ad", a.conj(), l2, a)
    return float(np.max(np.abs(s - l2)))


def _canonical_pass(a, tol, degeneracy, cutoff=None, left_guess=None):
    d, dim, _ = a.shape
    if dim == 1:
        norm = math.sqrt(float(np.sum(np.abs(a) ** 2)))
        if norm == 0:
            raise InjectivityError("zero tensor")
        return a / norm, np.ones(1)

    floor = None if cutoff is None else max(cutoff ** 2, PD_FLOOR * 1e-6)
    # the identity overlaps any positive-definite fixed point, and is exact for
    # tensors that are already right-canonical
    right = leading_eigenpair(TransferMap(a, a), tol=tol, degeneracy_threshold=degeneracy,
                              v0=np.eye(dim))
    if right.degenerate:
        raise InjectivityError(f"leading transfer eigenvalue not simple (gap {right.gap:.3e})")
    eta0 = right.eta
    if abs(eta0.imag) > 1e-8 * abs(eta0) or eta0.real <= 0:
        raise InjectivityError(f"leading transfer eigenvalue {eta0} is not positive")
    real = not np.iscomplexobj(a)
    u, w = _hermitian_eig(right.vec, "right", floor, real)
    # X^{-1/2} A X^{1/2} written in the eigenbasis of X (restricted to its support)
    sw = np.sqrt(w)
    a = ((u.conj().T @ a @ u) * sw[None, None, :] / sw[None, :, None]) / math.sqrt(eta0.real)

    if a.shape[1] > 1:
        guess = np.eye(a.shape[1]) if left_guess is None else sw[:, None] * (u.conj().T @ left_guess @ u) * sw[None, :]
        left = leading_eigenpair(TransferMap(a, a, adjoint=True), tol=tol,
                                 degeneracy_threshold=degeneracy, v0=guess)
        u, w = _hermitian_eig(left.vec, "left", None if cutoff is None else PD_FLOOR * 1e-6, real)
    else:
        u, w = np.ones((1, 1)), np.ones(1)
    order = np.argsort(-w, kind="stable")
    w, u = w[order], u[:, order]
    w = w / w.sum()
    if cutoff is not None:
        keep = max(1, int(np.count_nonzero(w >= cutoff ** 2)))
        w, u = w[:keep] / w[:keep].sum(), u[:, :keep]
    # Y = U diag(w) U^dag, so conjugating by U^dag diagonalizes the left fixed point
    return u.conj().T @ a @ u, np.sqrt(w)


def canonicalize(raw, tol=DEFAULT_TOL, degeneracy=1e-8, cutoff=None, left_guess=None,
                 with_gap=True):
    """Bring an injective tensor to canonical form.

    The tensor is rescaled by the leading transfer eigenvalue, conjugated by the
    square root of the right fixed point and rotated into the eigenbasis of the
    left fixed point.  A second pass polishes the canonical residuals down to
    round-off.

    With ``cutoff`` set, directions carrying Schmidt values below ``cutoff``
    (or outside the support of the right fixed point) are projected out instead
    of raising, and passes repeat until the bond dimension settles.
    ``left_guess`` seeds the left fixed-point solve of the first pass and
    ``with_gap=False`` skips computing the subleading transfer eigenvalue.

    Raises
    ------
    InjectivityError
        If the leading transfer eigenvalue is not simple or a fixed point is
        not positive definite.
    """
    a = as_tensor(raw)
    if a.shape[1] != a.shape[2]:
        raise InjectivityError(f"translation-invariant MPS needs square matrices, got {a.shape[1:]}")
    a, lam = _canonical_pass(a, tol, degeneracy, cutoff, left_guess)
    if a.shape[1] > 1:
        for _ in range(8):
            dim = a.shape[1]
            a, lam = _canonical_pass(a, tol, degeneracy, cutoff, np.diag(lam ** 2))
            if cutoff is None or a.shape[1] == dim:
                break
    eta1 = subleading_modulus(TransferMap(a, a), tol=tol) if a.shape[1] > 1 and with_gap else 0.0
    return CanonicalMps(a, lam, eta1)


def truncate(mps, cutoff):
    """Drop Schmidt values below ``cutoff`` and re-canonicalize."""
    if not 0 <= cutoff < 1:
        raise ValueError("cutoff must lie in [0, 1)")
    keep = int(np.count_nonzero(mps.schmidt >= cutoff))
    if keep == 0:
        raise EmptyStateError(f"all Schmidt values below cutoff {cutoff}")
    if keep == mps.bond_dim:
        return mps
    out = canonicalize(mps.tensor[:, :keep, :keep], cutoff=cutoff)
    return CanonicalMps(out.tensor, out.schmidt, out.eta1, dict(mps.meta))


def dense_state(tensor, length, limit=DEFAULT_DENSE_LIMIT):
    """Periodic-chain amplitudes ``tr[A^{i1} ... A^{iL}]`` (unnormalized).

    The returned vector has length ``d**length`` with the first site as the
    most significant index.
    """
    a = as_tensor(getattr(tensor, "tensor", tensor))
    d = a.shape[0]
    if d ** length > limit:
        raise CapacityError(f"d**L = {d ** length} exceeds limit {limit}")
    prod = a
    for _ in range(length - 1):
        prod = np.einsum("xab,ibc->xiac", prod, a).reshape(-1, a.shape[1], a.shape[2])
    return np.einsum("xaa->x", prod)


def correlation_length(mps):
    """``-1/log|eta_1|``; zero for a one-dimensional bond."""
    if mps.bond_dim == 1 or mps.eta1 == 0:
        return 0.0
    if mps.eta1 >= 1:
        raise PhaseTransitionError(f"|eta_1| = {mps.eta1} >= 1")
    return -1.0 / math.log(mps.eta1)


def entanglement_entropy(mps):
    p = np.asarray(getattr(mps, "schmidt", mps)) ** 2
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def random_tensor(d, dim, rng=None):
    rng = np.random.default_rng(rng)
    return rng.standard_normal((d, dim, dim)) + 1j * rng.standard_normal((d, dim, dim))
