"""Matrix-free (mixed) transfer maps and their dominant eigenpairs.

A translation-invariant MPS tensor is stored as an array of shape
``(d, D_left, D_right)``.  For two tensors ``A0`` and ``A1`` with the same
physical dimension the right-acting mixed transfer map is

    X  ->  sum_i A0[i] @ X @ A1[i].conj().T

and its adjoint (left-acting form) is ``Y -> sum_i A0[i]^dag @ Y @ A1[i]``.
Vectorization is row-major throughout, so the dense matrix of the right-acting
map is ``sum_i kron(A0[i], A1[i].conj())``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigs

from .errors import ConvergenceError, DimensionError

DEFAULT_TOL = 1e-12
POLISH_STEPS = 4
POLISH_TOL = 1e-14
DEFAULT_DENSE_MAX = 64
DEFAULT_DEGENERACY = 1e-8
KRYLOV_DIM = 20


def as_tensor(a):
    """Coerce ``a`` to a ``(d, Dl, Dr)`` array; real input stays real (float64)."""
    a = np.asarray(a)
    a = a.astype(complex if np.iscomplexobj(a) else float, copy=False)
    if a.ndim == 1:
        a = a.reshape(-1, 1, 1)
    if a.ndim != 3:
        raise DimensionError(f"MPS tensor must have 3 axes (d, Dl, Dr), got shape {a.shape}")
    return a


@dataclass(frozen=True)
class TransferMap:
    """Mixed transfer map between ``left`` and ``right`` tensors.

    ``adjoint=False`` is the right-acting map ``X -> sum A0 X A1^dag`` on
    ``Dr0 x Dr1`` matrices; ``adjoint=True`` is ``Y -> sum A0^dag Y A1`` on
    ``Dl0 x Dl1`` matrices.
    """

    left: np.ndarray
    right: np.ndarray
    adjoint: bool = False

    def __post_init__(self):
        object.__setattr__(self, "left", as_tensor(self.left))
        object.__setattr__(self, "right", as_tensor(self.right))
        if self.left.shape[0] != self.right.shape[0]:
            raise DimensionError(
                f"physical dimensions differ: {self.left.shape[0]} vs {self.right.shape[0]}")

    @property
    def in_shape(self):
        if self.adjoint:
            return (self.left.shape[1], self.right.shape[1])
        return (self.left.shape[2], self.right.shape[2])

    @property
    def out_shape(self):
        if self.adjoint:
            return (self.left.shape[2], self.right.shape[2])
        return (self.left.shape[1], self.right.shape[1])

    @property
    def is_endomorphism(self):
        return self.in_shape == self.out_shape

    @property
    def is_real(self):
        return not (np.iscomplexobj(self.left) or np.iscomplexobj(self.right))

    def __call__(self, x):
        return apply_transfer(self, x)

    def dagger(self):
        return TransferMap(self.left, self.right, adjoint=not self.adjoint)

    def dense(self):
        """Dense matrix of the map acting on row-major vectorized input."""
        a0, a1 = self.left, self.right
        if self.adjoint:
            a0 = a0.conj().transpose(0, 2, 1)
            a1 = a1.conj().transpose(0, 2, 1)
        d = a0.shape[0]
        m = np.zeros((a0.shape[1] * a1.shape[1], a0.shape[2] * a1.shape[2]),
                     dtype=np.result_type(a0, a1))
        for i in range(d):
            m += np.kron(a0[i], a1[i].conj())
        return m


def apply_transfer(tmap, x):
    """Apply ``tmap`` to the matrix ``x`` without materializing the map."""
    x = np.asarray(x)
    if x.shape != tmap.in_shape:
        raise DimensionError(f"input of shape {x.shape} does not match map input {tmap.in_shape}")
    a0, a1 = tmap.left, tmap.right
    d = a0.shape[0]
    # two GEMMs: stack the d products, then contract the physical index
    if tmap.adjoint:
        # sum_i A0^dag Y A1
        p, n = a0.shape[2], a1.shape[1]
        tmp = (a0.conj().transpose(0, 2, 1).reshape(d * p, -1) @ x).reshape(d, p, n)
        return tmp.transpose(1, 0, 2).reshape(p, d * n) @ a1.reshape(d * n, -1)
    m, q = a0.shape[1], a1.shape[2]
    tmp = (a0.reshape(d * m, -1) @ x).reshape(d, m, q)
    return tmp.transpose(1, 0, 2).reshape(m, d * q) @ a1.conj().transpose(0, 2, 1).reshape(d * q, -1)


@dataclass(frozen=True)
class SpectralResult:
    eta: complex
    vec: np.ndarray
    gap: float
    eta1: float
    converged: bool
    iterations: int
    residual: float
    degenerate: bool = False

    @property
    def modulus(self):
        return abs(self.eta)


def fix_phase(v, rtol=1e-10):
    """Rotate ``v`` so its largest-modulus entry is real positive.

    Entries within ``rtol`` (relative) of the maximum modulus count as ties;
    the lowest row-major index wins.
    """
    flat = v.reshape(-1)
    mags = np.abs(flat)
    top = mags.max()
    if top == 0:
        return v
    idx = int(np.flatnonzero(mags >= top * (1 - rtol))[0])
    z = flat[idx]
    return v * (np.conj(z) / abs(z))


def _dense_spectrum(tmap):
    w, v = np.linalg.eig(tmap.dense())
    order = np.argsort(-np.abs(w), kind="stable")
    return w[order], v[:, order]


def _krylov_spectrum(tmap, k, tol, max_iter, v0=None):
    n = int(np.prod(tmap.in_shape))
    shape = tmap.in_shape

    calls = [0]

    def matvec(x):
        calls[0] += 1
        return apply_transfer(tmap, x.reshape(shape)).reshape(-1)

    real = tmap.is_real
    op = LinearOperator((n, n), matvec=matvec, dtype=float if real else complex)
    if v0 is None:
        rng = np.random.default_rng(12345)
        v0 = rng.standard_normal(n) if real else rng.standard_normal(n) + 1j * rng.standard_normal(n)
    else:
        v0 = np.asarray(v0).reshape(-1)
        v0 = v0.real.astype(float) if real else v0.astype(complex)
    ncv = min(n, max(KRYLOV_DIM, 2 * k + 1))
    try:
        w, v = eigs(op, k=k, which="LM", tol=tol, maxiter=max_iter, v0=v0, ncv=ncv)
    except ArpackNoConvergence as exc:
        res = np.inf
        if len(exc.eigenvalues):
            i = int(np.argmax(np.abs(exc.eigenvalues)))
            x = exc.eigenvectors[:, i]
            res = float(np.linalg.norm(matvec(x) - exc.eigenvalues[i] * x))
        raise ConvergenceError(f"Arnoldi did not converge within {max_iter} restarts", residual=res)
    order = np.argsort(-np.abs(w), kind="stable")
    return w[order], v[:, order], calls[0]


def spectrum(tmap, k=2, tol=DEFAULT_TOL, max_iter=None, dense_max=DEFAULT_DENSE_MAX,
             return_count=False, v0=None):
    """Return the ``k`` largest-modulus eigenvalues and eigenvectors (columns).

    With ``return_count`` the number of map applications is returned as a third
    value (0 on the dense path).  ``v0`` overrides the seeded random Krylov
    start vector.
    """
    if not tmap.is_endomorphism:
        raise DimensionError(f"map {tmap.in_shape} -> {tmap.out_shape} is not square")
    n = int(np.prod(tmap.in_shape))
    if max_iter is None:
        max_iter = max(1000, 10 * n)
    if n <= max(dense_max, 3) or k >= n - 1:
        w, v = _dense_spectrum(tmap)
        out = (w[:k], v[:, :k], 0)
    else:
        out = _krylov_spectrum(tmap, k, tol, max_iter, v0)
    return out if return_count else out[:2]


def leading_eigenpair(tmap, tol=DEFAULT_TOL, max_iter=None, dense_max=DEFAULT_DENSE_MAX,
                      degeneracy_threshold=DEFAULT_DEGENERACY, v0=None):
    """Dominant eigenpair of ``tmap`` with its modulus gap.

    The eigenvector is normalized to unit Frobenius norm and phase-fixed with
    :func:`fix_phase`.  ``degenerate`` is set when the gap falls below
    ``degeneracy_threshold * |eta|``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    shape = tmap.in_shape
    n = int(np.prod(shape))
    k = 2 if n > 1 else 1
    w, v, count = spectrum(tmap, k=k, tol=tol, max_iter=max_iter, dense_max=dense_max,
                           return_count=True, v0=v0)
    eta = complex(w[0])
    vec = v[:, 0].reshape(shape)
    vec = fix_phase(vec / np.linalg.norm(vec))
    eta1 = float(abs(w[1])) if n > 1 else 0.0
    gap = max(abs(eta) - eta1, 0.0)
    tv = apply_transfer(tmap, vec)
    residual = float(np.linalg.norm(tv - eta * vec))
    # eig and Arnoldi can leave ~1e-8 residuals when the rest of the spectrum is
    # defective (nilpotent blocks); power steps damp the error by |eta1 / eta|
    for _ in range(POLISH_STEPS):
        if residual <= POLISH_TOL or eta == 0:
            break
        cand = fix_phase(tv / np.linalg.norm(tv))
        ctv = apply_transfer(tmap, cand)
        cres = float(np.linalg.norm(ctv - eta * cand))
        if cres >= residual:
            break
        vec, tv, residual = cand, ctv, cres
    return SpectralResult(
        eta=eta, vec=vec, gap=gap, eta1=eta1, converged=True, iterations=count,
        residual=residual, degenerate=gap < degeneracy_threshold * abs(eta))


def subleading_modulus(tmap, tol=DEFAULT_TOL, dense_max=DEFAULT_DENSE_MAX):
    """Modulus of the second-largest eigenvalue; 0 for a one-dimensional map."""
    n = int(np.prod(tmap.in_shape))
    if n == 1:
        return 0.0
    w, _ = spectrum(tmap, k=2, tol=tol, dense_max=dense_max)
    return float(abs(w[1]))
