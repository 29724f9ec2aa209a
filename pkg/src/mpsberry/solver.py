"""Imaginary-time TEBD ground states of translation-invariant chains.

The evolution runs on a two-site working cell in the right-canonical form of
Hastings (tensors ``B`` plus bond Schmidt values ``S``), which avoids dividing
by small singular values.  After convergence the cell is folded back to a
single-site canonical MPS.
"""

from dataclasses import dataclass, field, replace
import logging

import numpy as np
import scipy.linalg
from scipy.linalg import polar

from .errors import ConfigError, SolverError, SymmetrizationError
from .model import hamiltonian, rotate_mps
from .mps import CanonicalMps, canonicalize, entanglement_entropy, truncate
from .transfer import TransferMap, leading_eigenpair

log = logging.getLogger(__name__)


def svd(m):
    """Thin SVD, retrying with the QR-iteration driver when divide-and-conquer fails."""
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails on finite matrices with many tiny singular values
        log.debug("gesdd did not converge on a %s matrix, retrying with gesvd", m.shape)
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")


def geometric_schedule(start=0.1, stop=1e-3, stages=5):
    return tuple(float(x) for x in np.geomspace(start, stop, stages))


@dataclass(frozen=True)
class SolverOptions:
    sv_cutoff: float = 1e-8
    energy_tol: float = 1e-8
    entropy_tol: float = 1e-8
    max_bond: int = 256
    dtau: tuple = field(default_factory=geometric_schedule)
    steps_per_sweep: int = 10
    max_sweeps: int = 200
    # warm starts skip the coarse stages above this step
    warm_dtau: float = 0.1
    fidelity_tol: float = 1e-8
    # symmetry-breaking on-site term added during the first cold stage only
    pinning: float = 0.05

    def __post_init__(self):
        for name in ("sv_cutoff", "energy_tol", "entropy_tol", "warm_dtau", "fidelity_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.pinning < 0:
            raise ConfigError("pinning must be non-negative")
        if not self.dtau or min(self.dtau) <= 0:
            raise ConfigError("dtau schedule must be non-empty and positive")
        if self.max_bond < 1 or self.steps_per_sweep < 1 or self.max_sweeps < 1:
            raise ConfigError("max_bond, steps_per_sweep and max_sweeps must be >= 1")
        object.__setattr__(self, "dtau", tuple(float(x) for x in self.dtau))

    def key(self):
        return (self.sv_cutoff, self.energy_tol, self.entropy_tol, self.max_bond, self.dtau,
                self.steps_per_sweep, self.max_sweeps, self.warm_dtau, self.fidelity_tol, self.pinning)


@dataclass
class SolverTrace:
    """Per-sweep record ``(dtau, sweep, energy, entropy, bond_dim)``."""

    rows: list = field(default_factory=list)
    stage_energies: list = field(default_factory=list)

    @property
    def n_sweeps(self):
        return len(self.rows)

    def __str__(self):
        tail = self.rows[-3:]
        return "; ".join(f"dtau={r[0]:.1e} sweep={r[1]} E={r[2]:.10f} S={r[3]:.3e} D={r[4]}" for r in tail)


class _Cell:
    """Two-site cell; ``B[k]`` has shape (Dl, d, Dr), ``S[k]`` sits left of site k."""

    def __init__(self, b0, b1, s0, s1):
        self.B = [b0, b1]
        self.S = [s0, s1]

    @classmethod
    def from_mps(cls, mps):
        b = np.transpose(mps.tensor, (1, 0, 2)).copy()
        return cls(b, b.copy(), mps.schmidt.copy(), mps.schmidt.copy())

    @property
    def bond_dim(self):
        return max(len(self.S[0]), len(self.S[1]))

    def theta(self, i):
        j = 1 - i
        return np.tensordot(self.S[i][:, None, None] * self.B[i], self.B[j], axes=(2, 0))

    def bond_energy(self, i, h4):
        th = self.theta(i)
        hth = np.einsum("ijkl,aklb->aijb", h4, th)
        return float(np.real(np.vdot(th, hth)) / np.real(np.vdot(th, th)))

    def energy(self, h4):
        return 0.5 * (self.bond_energy(0, h4) + self.bond_energy(1, h4))

    def update(self, i, gate4, cutoff, max_bond):
        j = 1 - i
        c = np.tensordot(self.B[i], self.B[j], axes=(2, 0))
        c = np.einsum("ijkl,aklb->aijb", gate4, c)
        th = self.S[i][:, None, None, None] * c
        dl, d, _, dr = th.shape
        x, y, z = svd(th.reshape(dl * d, d * dr))
        y = y / np.linalg.norm(y)
        keep = min(max_bond, max(1, int(np.count_nonzero(y >= cutoff))))
        y, z = y[:keep], z[:keep]
        norm = np.linalg.norm(y)
        z = z.reshape(keep, d, dr)
        self.B[j] = z
        # right-canonical B_i without inverting S: C Z^dag
        self.B[i] = np.tensordot(c, z.conj(), axes=([2, 3], [1, 2])) / norm
        self.S[j] = y / norm

    def recanonicalize(self, cutoff, max_bond):
        """Restore canonical form, which non-unitary gates slowly erode."""
        b0 = np.transpose(self.B[0], (1, 0, 2))
        b1 = np.transpose(self.B[1], (1, 0, 2))
        d = b0.shape[0]
        blocked = np.einsum("iab,jbc->ijac", b0, b1).reshape(d * d, b0.shape[1], b1.shape[2])
        can = canonicalize(blocked, cutoff=cutoff, left_guess=np.diag(self.S[0] ** 2), with_gap=False)
        dim = can.bond_dim
        c = np.transpose(can.tensor.reshape(d, d, dim, dim), (2, 0, 1, 3))
        th = can.schmidt[:, None, None, None] * c
        x, y, z = svd(th.reshape(dim * d, d * dim))
        y = y / np.linalg.norm(y)
        keep = min(max_bond, max(1, int(np.count_nonzero(y >= cutoff))))
        y, z = y[:keep], z[:keep].reshape(keep, d, dim)
        self.B = [np.tensordot(c, z.conj(), axes=([2, 3], [1, 2])), z]
        self.S = [can.schmidt, y / np.linalg.norm(y)]


def _gate(h2, dtau, d):
    w, u = np.linalg.eigh(h2)
    return ((u * np.exp(-dtau * (w - w[0]))) @ u.conj().T).reshape(d, d, d, d)


def _is_real(x, tol=1e-14):
    return not np.iscomplexobj(x) or float(np.max(np.abs(np.imag(x)), initial=0.0)) <= tol


def _cold_start(h):
    onsite = 0.5 * (h.onsite + h.onsite.conj().T)
    if _is_real(onsite):
        onsite = onsite.real
    w, u = np.linalg.eigh(onsite)
    return CanonicalMps(u[:, 0].reshape(h.d, 1, 1), np.ones(1))


def _pinning(d, strength):
    """Generic diagonal on-site term spread over the two sites of a bond."""
    p = np.diag(strength * np.linspace(-1.0, 1.0, d))
    eye = np.eye(d)
    return 0.5 * (np.kron(p, eye) + np.kron(eye, p))


def _to_one_site(cell, opts, trace):
    """Fold the two-site cell into a single-site canonical MPS.

    With blocked tensors ``C = B0 B1`` and ``C' = B1 B0`` a translation
    invariant cell satisfies ``B1 = Q M`` and ``M = B0 Q`` for a unitary ``Q``
    solving ``C' Q = Q C``, i.e. the fixed point of ``X -> sum C' X C^dag``.
    """
    b0 = np.transpose(cell.B[0], (1, 0, 2))
    b1 = np.transpose(cell.B[1], (1, 0, 2))
    d = b0.shape[0]
    c = np.einsum("iab,jbc->ijac", b0, b1).reshape(d * d, b0.shape[1], b1.shape[2])
    cp = np.einsum("iab,jbc->ijac", b1, b0).reshape(d * d, b1.shape[1], b0.shape[2])
    # Q is an isometry when the two bonds were truncated to different sizes
    res = leading_eigenpair(TransferMap(cp, c))
    q, _ = polar(res.vec.real if not np.iscomplexobj(b0) else res.vec)
    m_left = canonicalize(np.einsum("iab,bc->iac", b0, q), cutoff=opts.sv_cutoff)
    m_right = canonicalize(np.einsum("ba,ibc->iac", q.conj(), b1), cutoff=opts.sv_cutoff)
    fid = abs(leading_eigenpair(TransferMap(m_left.tensor, m_right.tensor)).eta)
    if fid < 1 - opts.fidelity_tol:
        raise SymmetrizationError(f"sublattice fidelity {fid:.12f} below 1 - {opts.fidelity_tol}",
                                  trace=trace, tensors=(b0, b1), fidelity=fid)
    out = truncate(m_left, opts.sv_cutoff)
    if out.bond_dim > opts.max_bond:
        out = canonicalize(out.tensor[:, :opts.max_bond, :opts.max_bond])
    return out, fid


def ground_state(h, opts=None, warm_start=None, return_trace=False):
    """Ground state of the translation-invariant chain with local terms ``h``.

    Parameters
    ----------
    h : LocalHamiltonian
    opts : SolverOptions, optional
    warm_start : CanonicalMps, optional
        Initial state; the ``dtau`` schedule then starts at ``opts.warm_dtau``.

    Notes
    -----
    A cold start evolves its first stage under ``h`` plus a weak generic
    on-site term (``opts.pinning``).  Starting a symmetric product state in a
    different symmetry-protected phase from the ground state otherwise ends on
    a non-injective MPS (the ground state times a decoupled virtual factor).

    Raises
    ------
    SolverError
        If the last ``dtau`` stage does not converge within ``max_sweeps``.
    SymmetrizationError
        If the two sublattice tensors do not describe the same state.
    """
    opts = opts or SolverOptions()
    d = h.d
    h2 = h.bond_with_onsite()
    start = warm_start if warm_start is not None else _cold_start(h)
    # real Hamiltonians with a real start evolve in real arithmetic
    if _is_real(h2) and _is_real(start.tensor):
        h2 = h2.real
        start = CanonicalMps(np.real(start.tensor), start.schmidt)
    h4 = h2.reshape(d, d, d, d)
    cell = _Cell.from_mps(start)
    schedule = list(opts.dtau)
    if warm_start is not None:
        schedule = [t for t in schedule if t <= opts.warm_dtau * (1 + 1e-12)] or schedule[-1:]
    trace = SolverTrace()

    e_prev = cell.energy(h4)
    s_prev = entanglement_entropy(cell.S[0])
    for stage, dt in enumerate(schedule):
        hs = h2
        if stage == 0 and warm_start is None and opts.pinning > 0 and len(schedule) > 1:
            hs = h2 + _pinning(d, opts.pinning)
        half, full = _gate(hs, dt / 2, d), _gate(hs, dt, d)
        converged = False
        for sweep in range(opts.max_sweeps):
            # second-order splitting, merging adjacent half steps on bond 0
            cell.update(0, half, opts.sv_cutoff, opts.max_bond)
            for step in range(opts.steps_per_sweep):
                cell.update(1, full, opts.sv_cutoff, opts.max_bond)
                cell.update(0, full if step < opts.steps_per_sweep - 1 else half,
                            opts.sv_cutoff, opts.max_bond)
            cell.recanonicalize(opts.sv_cutoff, opts.max_bond)
            e = cell.energy(h4)
            s = entanglement_entropy(cell.S[0])
            trace.rows.append((dt, sweep, e, s, cell.bond_dim))
            done = abs(e - e_prev) < opts.energy_tol and abs(s - s_prev) < opts.entropy_tol
            e_prev, s_prev = e, s
            if done:
                converged = True
                break
        trace.stage_energies.append(e_prev)
        log.debug("stage dtau=%.1e sweeps=%d E=%.12f D=%d", dt, sweep + 1, e_prev, cell.bond_dim)
        if not converged and stage == len(schedule) - 1:
            raise SolverError(f"no convergence at dtau={dt} after {opts.max_sweeps} sweeps: {trace}",
                              trace=trace)

    mps, fid = _to_one_site(cell, opts, trace)
    mps.meta.update({"energy": e_prev, "sweeps": trace.n_sweeps, "sublattice_fidelity": fid})
    return (mps, trace) if return_trace else mps


def energy_density(mps, h):
    """Energy per site of a canonical MPS under local terms ``h``."""
    a = mps.tensor
    d, dim, _ = a.shape
    lam = np.asarray(mps.schmidt)
    phi = np.einsum("a,iab,jbc->ijac", lam, a, a).reshape(d * d, dim * dim)
    bond = np.real(np.trace(phi.conj().T @ h.bond @ phi))
    # reduced single-site density matrix rho_ij = tr(A^j^dag Lambda^2 A^i)
    rho = np.einsum("iab,a,jab->ij", a, lam ** 2, a.conj())
    onsite = np.real(np.trace(h.onsite @ rho))
    return float(bond + onsite)


def solve_point(point, opts=None, warm_start=None):
    """Ground state at a model point, solved at ``n = z`` and rotated to ``n``.

    Returns ``(rotated, unrotated)``; the unrotated state is the natural warm
    start for neighbouring points since the couplings are SU(2) symmetric.
    """
    base = ground_state(hamiltonian(point.at_z()), opts, warm_start)
    return rotate_mps(base, point.theta, point.phi), base


def with_schedule(opts, *dtau):
    return replace(opts, dtau=tuple(dtau))
