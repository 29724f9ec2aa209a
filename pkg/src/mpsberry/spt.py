"""Symmetry action on MPS, projective gauge data and the modulus-degeneracy test."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.linalg import polar

from .errors import InconsistentGaugeError, NotSymmetricError
from .model import PAULI
from .transfer import DEFAULT_DENSE_MAX, TransferMap, leading_eigenpair, spectrum

UNITARY_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class SymmetryElement:
    """On-site symmetry ``g`` acting as ``u`` (followed by conjugation if antiunitary)."""

    u: np.ndarray
    antiunitary: bool = False
    label: str = ""

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        err = float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))
        if err > UNITARY_TOL * max(1, u.shape[0]):
            raise ValueError(f"symmetry {self.label!r} is not unitary (error {err:.2e})")
        object.__setattr__(self, "u", u)

    @property
    def phi(self):
        return -1 if self.antiunitary else 1


@dataclass(frozen=True, eq=False)
class SymmetryGauge:
    """``sum_j u_ij (A^j)^phi = e^{i theta} V^dag A^i V``."""

    theta: float
    v: np.ndarray
    residual: float


def _conj_if(x, flag):
    return np.conj(x) if flag else x


def apply_symmetry(mps, g):
    a = getattr(mps, "tensor", mps)
    if g.u.shape[0] != a.shape[0]:
        raise ValueError(f"symmetry acts on dimension {g.u.shape[0]}, tensor has d={a.shape[0]}")
    return np.einsum("ij,jab->iab", g.u, _conj_if(a, g.antiunitary))


def extract_symmetry_gauge(mps, g, tol=1e-8):
    """Phase ``e^{i theta_g}`` and bond unitary ``V_g`` of a symmetric canonical MPS.

    With ``A' = g A`` the mixed map ``X -> sum A X A'^dag`` has ``V_g`` as
    eigenvector with eigenvalue ``e^{-i theta_g}``.

    Raises
    ------
    NotSymmetricError
        If the leading mixed eigenvalue has modulus below ``1 - tol`` or the
        extracted gauge does not reproduce the transformed tensor.
    """
    a = mps.tensor
    ag = apply_symmetry(mps, g)
    res = leading_eigenpair(TransferMap(a, ag), degeneracy_threshold=0.0)
    if res.modulus < 1 - tol:
        raise NotSymmetricError(f"|eta| = {res.modulus:.12f} < 1 - {tol} for symmetry {g.label!r}")
    theta = -float(np.angle(res.eta))
    v, _ = polar(res.vec)
    recon = np.exp(1j * theta) * (v.conj().T @ a @ v)
    residual = float(np.max(np.abs(ag - recon)))
    lam = np.diag(mps.schmidt)
    comm = float(np.max(np.abs(v @ lam - lam @ v)))
    if residual > max(tol, 1e-10) * 10 or comm > max(tol, 1e-10) * 10:
        raise NotSymmetricError(
            f"gauge for {g.label!r} inconsistent (residual {residual:.2e}, [V, Lambda] {comm:.2e})")
    return SymmetryGauge(theta, v, residual)


def cocycle(vg, vh, vgh, phi_g=1, tol=1e-8):
    """``omega`` with ``V_g V_h^{phi_g} = omega V_gh``, via a normalized trace."""
    vg, vh, vgh = (np.asarray(x, dtype=complex) for x in (vg, vh, vgh))
    dim = vg.shape[0]
    omega = complex(np.trace(vgh.conj().T @ vg @ _conj_if(vh, phi_g == -1)) / dim)
    if abs(omega) < 1 - tol:
        raise InconsistentGaugeError(f"V_g V_h is not proportional to V_gh (|omega| = {abs(omega):.6f})")
    return omega / abs(omega)


def group_table(elements, tol=1e-12):
    """Index table ``t[g][h] = gh`` from ``u_g u_h^{phi_g} = u_gh``."""
    n = len(elements)
    table = np.zeros((n, n), dtype=int)
    for i, g in enumerate(elements):
        for j, h in enumerate(elements):
            prod = g.u @ _conj_if(h.u, g.antiunitary)
            match = [k for k, e in enumerate(elements)
                     if e.antiunitary == (g.antiunitary != h.antiunitary)
                     and np.max(np.abs(prod - e.u)) < tol]
            if len(match) != 1:
                raise ValueError(f"product {g.label}*{h.label} not found exactly once in the set")
            table[i, j] = match[0]
    return table


@dataclass
class ProjectiveData:
    thetas: list
    gauges: list
    omega: np.ndarray
    table: np.ndarray

    def commutator_phases(self):
        """``omega_{g,h} / omega_{h,g}``, a gauge-invariant cocycle signature for abelian groups."""
        return self.omega / self.omega.T


def projective_data(mps, elements, tol=1e-8):
    table = group_table(elements)
    gauges = [extract_symmetry_gauge(mps, g, tol) for g in elements]
    n = len(elements)
    omega = np.zeros((n, n), dtype=complex)
    for i, g in enumerate(elements):
        for j in range(n):
            omega[i, j] = cocycle(gauges[i].v, gauges[j].v, gauges[table[i, j]].v, g.phi, tol)
    return ProjectiveData([gg.theta for gg in gauges], gauges, omega, table)


def _angle_close(x, y, tol):
    return abs(math.remainder(x - y, 2 * math.pi)) < tol


@dataclass
class DegeneracyReport:
    moduli: np.ndarray
    multiplicity: int
    degenerate: bool
    spectral_radius: float
    reps_differ: bool = None
    cocycles_differ: bool = None
    details: dict = field(default_factory=dict)

    @property
    def gap(self):
        if len(self.moduli) < 2:
            return float(self.moduli[0]) if len(self.moduli) else 0.0
        return float(self.moduli[0] - self.moduli[1])


def modulus_degeneracy_test(a0, a1, g_set=None, tol=1e-8, k=6, dense_max=DEFAULT_DENSE_MAX):
    """Multiplicity of the leading modulus of the mixed map between ``a0`` and ``a1``.

    The spectrum is dense for small bond products and a ``k``-eigenvalue
    Krylov estimate otherwise.  A vanishing spectral radius (orthogonal
    states at every site) counts as degenerate.  With ``g_set`` the one
    dimensional representations and commutator cocycle phases of both states
    are compared as well.
    """
    t0, t1 = getattr(a0, "tensor", a0), getattr(a1, "tensor", a1)
    tmap = TransferMap(t0, t1)
    n = int(np.prod(tmap.in_shape))
    w, _ = spectrum(tmap, k=n if n <= dense_max else min(k, n - 2), dense_max=dense_max)
    moduli = np.sort(np.abs(w))[::-1]
    radius = float(moduli[0])
    if radius < tol:
        mult, degenerate = len(moduli), True
    else:
        mult = int(np.count_nonzero(moduli >= radius * (1 - tol)))
        degenerate = mult > 1
    report = DegeneracyReport(moduli, mult, degenerate, radius)
    if g_set:
        th0 = [extract_symmetry_gauge(a0, g, tol).theta for g in g_set]
        th1 = [extract_symmetry_gauge(a1, g, tol).theta for g in g_set]
        report.reps_differ = not all(_angle_close(x, y, 1e-6) for x, y in zip(th0, th1))
        report.details = {"theta0": th0, "theta1": th1}
        try:
            group_table(g_set)
        except ValueError:
            # not closed under products (e.g. sampled U(1) angles): no cocycle comparison
            return report
        c0 = projective_data(a0, g_set, tol).commutator_phases()
        c1 = projective_data(a1, g_set, tol).commutator_phases()
        report.cocycles_differ = not np.allclose(c0, c1, atol=1e-6)
        report.details.update(commutators0=c0, commutators1=c1)
    return report


def spin_flip_group(d_spins=2):
    """``{1, R_x(pi), R_y(pi), R_z(pi)}`` applied to every spin of a site."""
    elements = []
    for label, p in (("1", np.eye(2)), ("x", PAULI[0]), ("y", PAULI[1]), ("z", PAULI[2])):
        r = p if label == "1" else -1j * p
        u = r
        for _ in range(d_spins - 1):
            u = np.kron(u, r)
        elements.append(SymmetryElement(u, False, label))
    return elements


def z_rotation(angle, d_spins=1):
    r = np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])
    u = r
    for _ in range(d_spins - 1):
        u = np.kron(u, r)
    return SymmetryElement(u, False, f"Rz({angle:.3f})")
