"""Two-spin-per-site chain whose ground states wrap the parameter 3-sphere.

Each site carries spins sigma and tau; the local basis is
``(uu, ud, du, dd)`` in (sigma, tau) with ``u`` the +1 eigenstate of ``Z``.
Parameters are ``alpha`` in [-pi/4, pi/4] and a direction ``n`` on S^2;
``alpha`` interpolates between on-site singlets (alpha < 0) and singlets on
the ``tau_l -- sigma_{l+1}`` bonds (alpha > 0), while ``n`` sets a staggered
field.  ``j1`` and ``j2`` switch on Heisenberg perturbations.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import InjectivityError
from .mps import canonicalize

I2 = np.eye(2, dtype=complex)
PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
SIGMA = tuple(np.kron(p, I2) for p in PAULI)
TAU = tuple(np.kron(I2, p) for p in PAULI)
ALPHA_MIN, ALPHA_MAX = -math.pi / 4, math.pi / 4
ANALYTIC_CUTOFF = 1e-12


def _dot(a, b):
    return sum(x @ y for x, y in zip(a, b))


def _bond_dot(left, right):
    return sum(np.kron(x, y) for x, y in zip(left, right))


def direction(theta, phi):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


@dataclass(frozen=True)
class ModelPoint:
    alpha: float
    theta: float = 0.0
    phi: float = 0.0
    j1: float = 0.0
    j2: float = 0.0

    def __post_init__(self):
        if not ALPHA_MIN - 1e-12 <= self.alpha <= ALPHA_MAX + 1e-12:
            raise ValueError(f"alpha={self.alpha} outside [-pi/4, pi/4]")

    @property
    def n(self):
        return direction(self.theta, self.phi)

    def at_z(self):
        return ModelPoint(self.alpha, 0.0, 0.0, self.j1, self.j2)


@dataclass(frozen=True, eq=False)
class LocalHamiltonian:
    """On-site (4x4) and nearest-neighbour bond (16x16, site l then l+1) terms."""

    onsite: np.ndarray
    bond: np.ndarray

    @property
    def d(self):
        return self.onsite.shape[0]

    def bond_with_onsite(self):
        """Bond term with the on-site term split evenly over the two sites."""
        eye = np.eye(self.d)
        return self.bond + 0.5 * (np.kron(self.onsite, eye) + np.kron(eye, self.onsite))

    def chain(self, length):
        """Dense Hamiltonian of a periodic chain of ``length`` sites."""
        d = self.d
        dim = d ** length
        h = np.zeros((dim, dim), dtype=complex)
        for l in range(length):
            ops = [np.eye(d)] * length
            ops[l] = self.onsite
            h += _kron_all(ops)
        b = self.bond.reshape(d, d, d, d)
        for l in range(length):
            r = (l + 1) % length
            h += _embed_two_site(b, l, r, length, d)
        return h


def _kron_all(ops):
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def _embed_two_site(b, l, r, length, d):
    dim = d ** length
    psi_shape = (d,) * length
    out = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        v = np.zeros(dim, dtype=complex)
        v[col] = 1
        t = v.reshape(psi_shape)
        t = np.tensordot(b, t, axes=([2, 3], [l, r]))
        t = np.moveaxis(t, [0, 1], [l, r])
        out[:, col] = t.reshape(-1)
    return out


def hamiltonian(point):
    """Local terms of ``H0(alpha, n) + j1 V1 + j2 V2``."""
    s2a, c2a = math.sin(2 * point.alpha), math.cos(2 * point.alpha)
    n = point.n
    field = -sum(n[k] * SIGMA[k] for k in range(3)) + sum(n[k] * TAU[k] for k in range(3))
    st = _dot(SIGMA, TAU)
    onsite = c2a * field + point.j1 * st
    if point.alpha < 0:
        onsite = onsite - s2a * st
    tau_sigma = _bond_dot(TAU, SIGMA)
    bond = point.j1 * tau_sigma + point.j2 * (_bond_dot(SIGMA, SIGMA) + _bond_dot(TAU, TAU))
    if point.alpha > 0:
        bond = bond + s2a * tau_sigma
    return LocalHamiltonian(onsite, bond)


def _spin_rotation(theta, phi):
    rz = np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    ry = np.array([[c, -s], [s, c]], dtype=complex)
    return rz @ ry


def site_unitary(theta, phi):
    """Single-site rotation taking ``z`` to ``n(theta, phi)`` on both spins."""
    r = _spin_rotation(theta, phi)
    return np.kron(r, r)


def rotate_tensor(tensor, theta, phi):
    u = site_unitary(theta, phi)
    return np.einsum("ij,jab->iab", u, tensor)


def rotate_mps(mps, theta, phi):
    """Rotate the physical index; Schmidt data is untouched."""
    return mps.with_tensor(rotate_tensor(mps.tensor, theta, phi))


def analytic_tensor(alpha):
    """Exact ground-state tensor of the unperturbed model at ``n = z``."""
    c, s = math.cos(alpha), math.sin(alpha)
    if alpha <= 0:
        return np.array([0, c, s, 0], dtype=complex).reshape(4, 1, 1)
    return np.array([
        [[0, 0], [-s, 0]],
        [[0, 0], [0, c]],
        [[-s, 0], [0, 0]],
        [[0, c], [0, 0]],
    ], dtype=complex)


def analytic_mps(alpha, theta=0.0, phi=0.0):
    """Canonical ground state of the unperturbed model at ``(alpha, n)``.

    For ``0 < alpha`` so small that the second Schmidt value underflows the
    injectivity floor the state is returned with that direction removed.
    """
    try:
        mps = canonicalize(analytic_tensor(alpha))
    except InjectivityError:
        mps = canonicalize(analytic_tensor(alpha), cutoff=ANALYTIC_CUTOFF)
    if theta == 0 and phi == 0:
        return mps
    return rotate_mps(mps, theta, phi)


def analytic_energy_density(alpha):
    """Ground-state energy per site of the unperturbed model."""
    return -abs(math.sin(2 * alpha)) - 2.0


def two_site_ground_energy(point):
    """Exact ground energy of the decoupled two-spin problem (unperturbed only).

    For ``alpha <= 0`` the chain decouples into on-site (sigma_l, tau_l) pairs,
    for ``alpha >= 0`` into (tau_l, sigma_{l+1}) pairs; each pair carries one
    unit of the staggered field on each spin.
    """
    if point.j1 or point.j2:
        raise ValueError("two-site decoupling holds only for j1 = j2 = 0")
    s2a, c2a = math.sin(2 * point.alpha), math.cos(2 * point.alpha)
    n = point.n
    x, y, z = PAULI
    ns = n[0] * x + n[1] * y + n[2] * z
    heis = sum(np.kron(p, p) for p in PAULI)
    if point.alpha <= 0:
        h = -s2a * heis + c2a * (-np.kron(ns, I2) + np.kron(I2, ns))
    else:
        # first factor tau_l, second sigma_{l+1}
        h = s2a * heis + c2a * (np.kron(ns, I2) - np.kron(I2, ns))
    return float(np.linalg.eigvalsh(h)[0])


def random_coupling_field(seed, points, amplitude=0.1, envelope_width=0.3, order=2):
    """Smooth seeded random couplings ``(j1, j2)`` at parameter points.

    Each field is a random combination of monomials of degree <= ``order`` in
    the Cartesian components of ``n`` with coefficients that are random
    cosine series in ``alpha``, rescaled into ``(-1, 1)`` and multiplied by
    ``amplitude`` and a Gaussian envelope in ``alpha`` shifted to vanish at
    ``alpha = +-pi/4``.  Because the field depends on ``n`` only through its
    Cartesian components, it is single valued at the poles of S^2.

    Parameters
    ----------
    seed : int
    points : array_like, shape (N, 3)
        ``(alpha, theta, phi)`` rows.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    alpha, theta, phi = pts[:, 0], pts[:, 1], pts[:, 2]
    n = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=1)
    monomials = [np.ones(len(pts))]
    for k in range(3):
        monomials.append(n[:, k])
    if order >= 2:
        for k in range(3):
            for l in range(k, 3):
                monomials.append(n[:, k] * n[:, l])
    mono = np.stack(monomials, axis=1)
    n_harm = 3
    harm = np.stack([np.cos(m * 2 * (alpha - ALPHA_MIN)) for m in range(n_harm)], axis=1)

    rng = np.random.default_rng(seed)
    out = []
    for _ in range(2):
        coef = rng.uniform(-1, 1, size=(mono.shape[1], n_harm))
        raw = np.einsum("pm,mk,pk->p", mono, coef, harm)
        bound = np.sum(np.abs(coef)) * 1.000001
        out.append(raw / bound)
    g = np.exp(-(alpha / envelope_width) ** 2)
    g_end = math.exp(-(ALPHA_MAX / envelope_width) ** 2)
    env = np.clip((g - g_end) / (1 - g_end), 0.0, None)
    return amplitude * env * out[0], amplitude * env * out[1]
